"""Empirical privacy audit of the randomized-response release.

For one fixed neighboring pair (A, A'), each released bit j is compared
across the two datasets: bits where the ground-truth arrays differ must show
a log output ratio within +-eps0, bits where they agree must show none. A
second check samples W over fresh hash seeds and measures how often the
total loss W * eps0 exceeds the calibrated epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..calibration import dist_W, quantile_N
from ..errors import DomainError
from ..filter import FilterParams, bloom_init
from ..mechanism import PrivacyBudget, derive_budget, flip_generator, randomized_response, response_probabilities
from .experiments import sample_distinct
from .oracles import DEFAULT_UNIVERSE, mc_w_samples

RATIO_SIGMAS = 4.0
TAIL_SIGMAS = 3.0
CHUNK = 100_000


@dataclass(frozen=True)
class AuditRow:
    bit_class: str  # "differing" or "agreeing"
    bit: int
    value: int
    log_ratio: float
    sigma: float
    band: float

    @property
    def passed(self) -> bool:
        return abs(self.log_ratio) <= self.band


@dataclass(frozen=True)
class TailCheck:
    """Pr[W * eps0 > epsilon] estimated over fresh neighboring pairs."""

    epsilon: float
    delta: float
    N: int
    trials: int
    exceed_rate: float
    sigma: float
    w_histogram: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.exceed_rate <= self.delta + TAIL_SIGMAS * self.sigma


@dataclass
class AuditReport:
    epsilon0: float
    trials: int
    rows: list[AuditRow]
    tail: TailCheck | None = None
    inconclusive: bool = False

    def max_abs_log_ratio(self, bit_class: str = "differing") -> float:
        vals = [abs(r.log_ratio) for r in self.rows if r.bit_class == bit_class]
        return max(vals) if vals else float("nan")

    @property
    def passed(self) -> bool:
        if self.inconclusive:
            return False
        ok = all(r.passed for r in self.rows)
        return ok and (self.tail is None or self.tail.passed)


def _ones_frequency(bits: np.ndarray, flip_prob: float, trials: int, rng_seed: int) -> np.ndarray:
    gen = flip_generator(rng_seed)
    ones = np.zeros(bits.size, dtype=np.int64)
    done = 0
    while done < trials:
        step = min(CHUNK, trials - done)
        ones += randomized_response(np.broadcast_to(bits, (step, bits.size)), flip_prob, gen).sum(axis=0)
        done += step
    return ones / trials


def _log_ratio(p: float, q: float, trials: int) -> tuple[float, float]:
    if p == 0.0 or q == 0.0:
        return (math.inf if p != q else 0.0), math.inf
    sigma = math.sqrt((1 - p) / (trials * p) + (1 - q) / (trials * q))
    return math.log(p / q), sigma


def find_neighbors(m, k, dataset_size, rng, n=DEFAULT_UNIVERSE, attempts=100):
    """Draw (params, A, A') until the two ground-truth arrays differ."""
    for _ in range(attempts):
        params = FilterParams(m, k, n, int(rng.integers(0, 2**63)))
        elems = sample_distinct(rng, n, dataset_size + 1)
        a, a2 = elems[:-1], elems[1:]
        g, g2 = bloom_init(a, params), bloom_init(a2, params)
        if (g.bits != g2.bits).any():
            return params, g, g2
    return None


def loss_tail_check(budget: PrivacyBudget, trials: int, rng_seed: int, n: int = DEFAULT_UNIVERSE) -> TailCheck:
    """Estimate Pr[W * eps0 > epsilon] for a calibrated budget."""
    if not budget.calibrated:
        raise DomainError("tail check needs a budget calibrated from (epsilon, delta)")
    w = mc_w_samples(budget.m, budget.k, budget.dataset_size, trials, rng_seed, n)
    # the 1e-12 relative guard keeps W = N from tripping on eps0 * N rounding
    rate = float(np.mean(w * budget.epsilon0 > budget.epsilon * (1 + 1e-12)))
    return TailCheck(
        epsilon=budget.epsilon,
        delta=budget.delta,
        N=budget.N,
        trials=trials,
        exceed_rate=rate,
        sigma=math.sqrt(budget.delta * (1 - budget.delta) / trials),
        w_histogram=np.bincount(w, minlength=2 * budget.k + 1),
    )


def privacy_audit(
    m: int,
    k: int,
    dataset_size: int,
    epsilon0: float,
    trials: int,
    rng_seed: int,
    delta: float | None = None,
    max_agreeing: int = 16,
    n: int = DEFAULT_UNIVERSE,
) -> AuditReport:
    """Audit per-bit output ratios for one neighboring pair.

    When ``delta`` is given, also checks Pr[W > N] <= delta with N the
    calibrated quantile (so that W * eps0 > N * eps0 = epsilon).
    """
    if not epsilon0 > 0.0:
        raise DomainError(f"epsilon0 must be positive, got {epsilon0!r}")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng(rng_seed)
    found = find_neighbors(m, k, dataset_size, rng, n)
    if found is None:
        return AuditReport(epsilon0, trials, [], inconclusive=True)
    _, g, g2 = found
    differ = np.nonzero(g.bits != g2.bits)[0]
    agree = np.nonzero(g.bits == g2.bits)[0]
    if agree.size > max_agreeing:
        agree = np.sort(rng.choice(agree, max_agreeing, replace=False))
    selected = np.concatenate([differ, agree])

    flip = response_probabilities(epsilon0)[1]
    seeds = rng.integers(0, 2**63, size=2)
    f1 = _ones_frequency(g.bits[selected], flip, trials, int(seeds[0]))
    f2 = _ones_frequency(g2.bits[selected], flip, trials, int(seeds[1]))

    rows = []
    for idx, bit in enumerate(selected):
        cls = "differing" if idx < differ.size else "agreeing"
        for v in (0, 1):
            p = f1[idx] if v else 1.0 - f1[idx]
            q = f2[idx] if v else 1.0 - f2[idx]
            lr, sigma = _log_ratio(p, q, trials)
            band = (epsilon0 if cls == "differing" else 0.0) + RATIO_SIGMAS * sigma
            rows.append(AuditRow(cls, int(bit), v, lr, sigma, band))

    tail = None
    if delta is not None:
        n_q = quantile_N(dist_W(m, k, dataset_size), delta)
        budget = derive_budget(epsilon0 * n_q, delta, m, k, dataset_size)
        tail = loss_tail_check(budget, trials, int(rng.integers(0, 2**63)), n)
    return AuditReport(epsilon0, trials, rows, tail)

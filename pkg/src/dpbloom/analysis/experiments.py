"""Simulation runners for false-positive rate, utility and W fidelity.

Every runner splits its trials into fixed batches with spawned seeds, so
results are reproducible for a given ``rng_seed`` regardless of the
DPBLOOM_THREADS setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._parallel import map_batches
from ..calibration import dist_W
from ..errors import DomainError
from ..filter import FilterParams, bloom_init
from ..mechanism import derive_budget, fixed_budget, privatize
from .bounds import (
    UtilityParams,
    accuracy_bound_private,
    accuracy_bound_private_vs_standard,
    accuracy_bound_standard,
    fpr_exact,
)

DEFAULT_UNIVERSE = 1 << 32
# trials are grouped so one batch carries a few thousand queries
TRIALS_PER_BATCH = 64


def sample_distinct(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """``size`` distinct elements drawn uniformly from ``[0, n)``."""
    if size > n:
        raise DomainError(f"cannot draw {size} distinct elements from a universe of {n}")
    out = np.zeros(0, dtype=np.uint64)
    while out.size < size:
        draw = rng.integers(0, n, size=size - out.size, dtype=np.uint64)
        out = np.unique(np.concatenate([out, draw]))
    return rng.permutation(out)[:size] if out.size > size else rng.permutation(out)


def sample_nonmembers(rng: np.random.Generator, n: int, members: np.ndarray, size: int) -> np.ndarray:
    if members.size >= n:
        raise DomainError("universe has no non-members")
    out = np.zeros(0, dtype=np.uint64)
    while out.size < size:
        draw = rng.integers(0, n, size=size - out.size, dtype=np.uint64)
        out = np.concatenate([out, draw[~np.isin(draw, members)]])
    return out


@dataclass(frozen=True)
class Rate:
    hits: int
    total: int

    @property
    def value(self) -> float:
        return self.hits / self.total if self.total else float("nan")

    @property
    def sigma(self) -> float:
        p = self.value
        return math.sqrt(p * (1 - p) / self.total) if self.total else float("nan")

    def ci(self, sigmas: float = 3.0) -> tuple[float, float]:
        return self.value - sigmas * self.sigma, self.value + sigmas * self.sigma


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


@dataclass
class FprResult:
    m: int
    k: int
    dataset_size: int
    fpr_exact: float
    fpr: Rate
    false_negatives: int
    member_checks: int

    @property
    def sigma_model(self) -> float:
        """Binomial sigma of the empirical rate around the exact value."""
        p = self.fpr_exact
        return math.sqrt(p * (1 - p) / self.fpr.total)


def run_fpr_experiment(
    m: int,
    k: int,
    dataset_size: int,
    query_count: int,
    trials: int,
    rng_seed: int,
    n: int = DEFAULT_UNIVERSE,
) -> FprResult:
    """Empirical false-positive rate over ``trials`` independent filters.

    ``query_count`` non-member queries are spread evenly across trials, and
    every inserted element is re-queried to confirm there are no false
    negatives.
    """
    if trials < 1 or query_count < trials:
        raise DomainError("need trials >= 1 and at least one query per trial")
    per_trial = _split(query_count, trials)

    def batch(start: int, size: int, rng: np.random.Generator):
        hits = total = fn = checked = 0
        for q in per_trial[start:start + size]:
            params = FilterParams(m, k, n, int(rng.integers(0, 2**63)))
            data = sample_distinct(rng, n, dataset_size)
            f = bloom_init(data, params)
            fn += int((~f.query_many(data)).sum())
            checked += data.size
            ys = sample_nonmembers(rng, n, data, q)
            hits += int(f.query_many(ys).sum())
            total += q
        return hits, total, fn, checked

    parts = map_batches(batch, trials, rng_seed, TRIALS_PER_BATCH)
    hits, total, fn, checked = (sum(col) for col in zip(*parts))
    return FprResult(m, k, dataset_size, fpr_exact(m, k, dataset_size), Rate(hits, total), fn, checked)


@dataclass
class UtilityResult:
    """Aggregated outcomes of a utility simulation at one grid point."""

    m: int
    k: int
    dataset_size: int
    alpha: float
    epsilon: float
    delta: float
    N: int
    epsilon0: float
    queries: int
    private_correct: int  # z~ == z
    standard_correct: int  # z^ == z
    agree: int  # z~ == z^
    private_positive: int
    standard_false_negatives: int
    delta_err: float = field(init=False)

    def __post_init__(self):
        self.delta_err = fpr_exact(self.m, self.k, self.dataset_size)

    @property
    def accuracy_private(self) -> Rate:
        return Rate(self.private_correct, self.queries)

    @property
    def accuracy_standard(self) -> Rate:
        return Rate(self.standard_correct, self.queries)

    @property
    def agreement(self) -> Rate:
        return Rate(self.agree, self.queries)

    @property
    def positive_rate(self) -> Rate:
        return Rate(self.private_positive, self.queries)

    @property
    def utility_params(self) -> UtilityParams:
        return UtilityParams.from_epsilon0(self.alpha, self.epsilon0, self.k, self.delta_err)

    @property
    def bound_private(self) -> float:
        return accuracy_bound_private(self.utility_params)

    @property
    def bound_agreement(self) -> float:
        return accuracy_bound_private_vs_standard(self.utility_params)

    @property
    def bound_standard(self) -> float:
        return accuracy_bound_standard(self.m, self.k, self.dataset_size, self.alpha)


def run_utility_experiment(
    m: int,
    k: int,
    dataset_size: int,
    alpha: float,
    epsilon: float,
    delta: float,
    query_count: int,
    trials: int,
    rng_seed: int,
    n: int = DEFAULT_UNIVERSE,
    epsilon0: float | None = None,
) -> UtilityResult:
    """Build, calibrate, privatize and query ``trials`` independent filters.

    Each trial answers its share of ``query_count`` queries, a fraction
    ``alpha`` of them drawn from outside the dataset. Passing ``epsilon0``
    skips calibration and flips with that per-bit budget directly (0 gives
    the coin-flip baseline).
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    if dataset_size < 1:
        raise DomainError("utility experiments need a non-empty dataset")
    if trials < 1 or query_count < trials:
        raise DomainError("need trials >= 1 and at least one query per trial")
    if epsilon0 is None:
        budget = derive_budget(epsilon, delta, m, k, dataset_size)
    else:
        budget = fixed_budget(epsilon0, m, k, dataset_size)
    per_trial = _split(query_count, trials)

    def batch(start: int, size: int, rng: np.random.Generator):
        acc = np.zeros(6, dtype=np.int64)
        for q in per_trial[start:start + size]:
            params = FilterParams(m, k, n, int(rng.integers(0, 2**63)))
            data = sample_distinct(rng, n, dataset_size)
            f = bloom_init(data, params)
            pf = privatize(f, budget, int(rng.integers(0, 2**63)))
            n_out = int(round(alpha * q))
            ys = np.concatenate([rng.choice(data, q - n_out), sample_nonmembers(rng, n, data, n_out)])
            z = np.zeros(q, dtype=bool)
            z[: q - n_out] = True
            z_hat = f.query_many(ys)
            z_til = pf.query_many(ys)
            acc += [
                q,
                int((z_til == z).sum()),
                int((z_hat == z).sum()),
                int((z_til == z_hat).sum()),
                int(z_til.sum()),
                int((z & ~z_hat).sum()),
            ]
        return acc

    total = sum(map_batches(batch, trials, rng_seed, TRIALS_PER_BATCH))
    return UtilityResult(
        m, k, dataset_size, alpha, budget.epsilon, budget.delta, budget.N, budget.epsilon0,
        *(int(v) for v in total),
    )


@dataclass
class WdistResult:
    analytic: np.ndarray
    empirical: np.ndarray
    trials: int

    @property
    def tv(self) -> float:
        return 0.5 * float(np.abs(self.analytic - self.empirical).sum())

    @property
    def tv_running(self) -> np.ndarray:
        return 0.5 * np.cumsum(np.abs(self.analytic - self.empirical))


def run_wdist_experiment(m: int, k: int, dataset_size: int, trials: int, rng_seed: int, n: int = DEFAULT_UNIVERSE) -> WdistResult:
    from .oracles import mc_w_distribution

    return WdistResult(dist_W(m, k, dataset_size).pmf.copy(), mc_w_distribution(m, k, dataset_size, trials, rng_seed, n), trials)

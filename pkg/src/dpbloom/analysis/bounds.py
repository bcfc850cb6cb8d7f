"""Closed-form false-positive rates and accuracy lower bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError
from ..mechanism import response_probabilities


def _check(m: int, k: int, dataset_size: int) -> None:
    if m < 2:
        raise DomainError(f"m must be >= 2, got {m}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if dataset_size < 0:
        raise DomainError(f"dataset_size must be >= 0, got {dataset_size}")


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {p!r}")


def fpr_exact(m: int, k: int, dataset_size: int) -> float:
    """(1 - (1 - 1/m)^(|A| k))^k under ideal uniform hashing."""
    _check(m, k, dataset_size)
    zero = math.exp(dataset_size * k * math.log1p(-1.0 / m))
    return (1.0 - zero) ** k


def fpr_approx(m: int, k: int, dataset_size: int) -> float:
    """The textbook approximation (1 - e^(-k|A|/m))^k."""
    _check(m, k, dataset_size)
    return (-math.expm1(-k * dataset_size / m)) ** k


def fpr_bound(m: int, k: int, dataset_size: int) -> float:
    """Upper bound (1 - e^(-2|A|k/m))^k, using (1 - 1/m)^x >= e^(-2x/m)."""
    _check(m, k, dataset_size)
    return (-math.expm1(-2.0 * dataset_size * k / m)) ** k


def accuracy_bound_standard(m: int, k: int, dataset_size: int, alpha: float) -> float:
    """Lower bound on Pr[standard answer == truth]: 1 - fpr_bound * alpha."""
    _check_prob("alpha", alpha)
    return 1.0 - fpr_bound(m, k, dataset_size) * alpha


@dataclass(frozen=True)
class UtilityParams:
    """Inputs to the private-filter accuracy bounds.

    Attributes:
        alpha: Fraction of queries that are true non-members.
        t: Keep probability e^eps0 / (e^eps0 + 1).
        k: Number of hash functions.
        delta_err: False-positive mass of the standard filter.
    """

    alpha: float
    t: float
    k: int
    delta_err: float

    def __post_init__(self):
        _check_prob("alpha", self.alpha)
        _check_prob("delta_err", self.delta_err)
        if not 0.5 <= self.t <= 1.0:
            raise DomainError(f"t must lie in [1/2, 1], got {self.t!r}")
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")

    @classmethod
    def from_epsilon0(cls, alpha: float, epsilon0: float, k: int, delta_err: float) -> "UtilityParams":
        return cls(alpha, response_probabilities(epsilon0)[0], k, delta_err)


def accuracy_bound_private(u: UtilityParams) -> float:
    """Lower bound on Pr[private answer == truth]: a(1 - t - t^k)d + a t."""
    return u.alpha * (1.0 - u.t - u.t**u.k) * u.delta_err + u.alpha * u.t


def accuracy_bound_private_vs_standard(u: UtilityParams) -> float:
    """Lower bound on Pr[private answer == standard answer]: t a (1 - d)."""
    return u.t * u.alpha * (1.0 - u.delta_err)


def random_guess_rate(k: int) -> float:
    """Positive rate of a filter whose bits are pure coin flips."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return 0.5**k


@dataclass(frozen=True)
class QueryOutcome:
    """Truth, standard-filter answer and private-filter answer for one query."""

    z: bool
    z_hat: bool
    z_tilde: bool

    def __post_init__(self):
        if self.z and not self.z_hat:
            raise DomainError("standard filter answered false for a member")

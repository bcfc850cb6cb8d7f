"""Differentially private Bloom filters with exact budget calibration."""

from .calibration import (
    WDistribution,
    YDistribution,
    ZConditional,
    dist_W,
    dist_Y,
    dist_Z_given_Y,
    quantile_N,
)
from .errors import CalibrationDomainError, DomainError, FileFormatError, NumericalError
from .filter import BloomFilter, FilterParams, bloom_init, bloom_query, hash_index
from .mechanism import (
    PrivacyBudget,
    PrivateBloomFilter,
    derive_budget,
    fixed_budget,
    private_query,
    privatize,
)

__version__ = "0.1.0"

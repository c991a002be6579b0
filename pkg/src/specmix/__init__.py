"""Limit spectra of (1/N) sum X_i U_i U_i^* for exchangeable, possibly localized vectors U_i."""

__version__ = "0.1.0"

from .partitions import Partition, parse_partition, enumerate_partitions, kappa, thin, is_noncrossing
from .gamma import GammaSpec, HeavyTailTrunc, Interpolation, ProductSequence, Tabulated, Unit
from .levy import Cauchy, CompoundPoisson, Dirac, GaussianStd, LevyPair, cumulants, poisson
from .moments import MomentTable, f_gamma, limit_moments

__all__ = [
    "Partition", "parse_partition", "enumerate_partitions", "kappa", "thin", "is_noncrossing",
    "GammaSpec", "HeavyTailTrunc", "Interpolation", "ProductSequence", "Tabulated", "Unit",
    "Cauchy", "CompoundPoisson", "Dirac", "GaussianStd", "LevyPair", "cumulants", "poisson",
    "MomentTable", "f_gamma", "limit_moments",
]

"""Renormalization of golden-mean Siegel pairs in truncated Taylor series arithmetic."""

from .errors import SiegelRenormError
from .newton import Certificate, FixedPointResult, build_L0, certify, solve_fixed_point
from .pairs import FactorPair, initial_pair, project, residuals
from .renorm import renormalize, rg, scaling_factor
from .series import Disk, TaylorDisk, compose, evaluate
from .spectral import cone_bounds, cone_invariance_check, spectrum
from .quasiarc import MultiIndex, arc_points, partition_dynamical, partition_model
from .twod import BiDiskMap, Pair2D, collapse, embed, rg_2d

__all__ = [
    "BiDiskMap",
    "Certificate",
    "Disk",
    "FactorPair",
    "FixedPointResult",
    "MultiIndex",
    "Pair2D",
    "SiegelRenormError",
    "TaylorDisk",
    "arc_points",
    "build_L0",
    "certify",
    "collapse",
    "compose",
    "cone_bounds",
    "cone_invariance_check",
    "embed",
    "evaluate",
    "initial_pair",
    "partition_dynamical",
    "partition_model",
    "project",
    "renormalize",
    "residuals",
    "rg",
    "rg_2d",
    "scaling_factor",
    "solve_fixed_point",
    "spectrum",
]

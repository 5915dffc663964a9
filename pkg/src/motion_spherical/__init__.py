"""Spherical analysis for the motion groups SO(n) x R^n, n = 3, 4."""
import os as _os

# MOTION_SPHERICAL_THREADS caps BLAS/OpenMP threads; it must be set before numpy loads
_threads = _os.environ.get("MOTION_SPHERICAL_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .reps import TauLabel, enumerate_taus
from .branch import build_branch_data
from .transform import GeneratorProfile, BranchProfile, spherical_transform, decompose_gamma
from .extension import cutoff_extension, bump_extension, finite_borel, curve_jet, jet_solve

__version__ = "0.1.0"

__all__ = [
    "TauLabel", "enumerate_taus", "build_branch_data",
    "GeneratorProfile", "BranchProfile", "spherical_transform", "decompose_gamma",
    "cutoff_extension", "bump_extension", "finite_borel", "curve_jet", "jet_solve",
]

"""Numerical laboratory for curvature under warped deformations of Riemannian submersions."""

from __future__ import annotations

import os as _os

# RICCI_LAB_THREADS caps BLAS/OpenMP parallelism; it must be set before numpy loads its backend
_threads = _os.environ.get("RICCI_LAB_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the numpy reference
implementation when the extension is missing or BCX_KERNELS=python is set.
"""
import os

from . import kernels_py

BACKEND = "python"
_impl = kernels_py

if os.environ.get("BCX_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled

        _impl = _compiled
        BACKEND = "compiled"
    except ImportError:
        pass

sq_distances = _impl.sq_distances
ols_fit = _impl.ols_fit
ols_scan = _impl.ols_scan
irls_fit = _impl.irls_fit
logistic_scan = _impl.logistic_scan

__all__ = [
    "BACKEND",
    "kernels_py",
    "sq_distances",
    "ols_fit",
    "ols_scan",
    "irls_fit",
    "logistic_scan",
]

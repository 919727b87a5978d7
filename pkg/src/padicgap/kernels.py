"""Kernel selection: compiled extension when importable, else pure Python.

Set ``PADICGAP_PURE=1`` to force the Python kernels.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("PADICGAP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _kernels_py
else:
    _impl = _kernels_py

mul_trunc = _impl.mul_trunc
compose = _impl.compose
horner = _impl.horner

__all__ = ["BACKEND", "mul_trunc", "compose", "horner"]

"""Kernel selection.

Uses the compiled extension when it was built, otherwise the pure-Python
twin.  Set ``SPINBLIMP_PURE_PYTHON=1`` to force the fallback.
"""
import os
from importlib import import_module

from . import _kernels_py

if os.environ.get("SPINBLIMP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.NAME
deriv_simplified = _impl.deriv_simplified
deriv_full = _impl.deriv_full
rk4_simplified = _impl.rk4_simplified
rk4_full = _impl.rk4_full


def available(backend: str) -> bool:
    """True if ``backend`` (``"python"`` or ``"cython"``) can be imported."""
    if backend == "python":
        return True
    try:
        import_module(f"{__package__}._kernels")
    except ImportError:
        return False
    return True


def get(model: str, backend: str | None = None):
    """Return ``(deriv, rk4)`` for ``model`` from the chosen backend module."""
    impl = _impl
    if backend == "python":
        impl = _kernels_py
    elif backend == "cython":
        from . import _kernels as impl
    elif backend is not None:
        raise ValueError(f"unknown backend {backend!r}")
    if model == "simplified":
        return impl.deriv_simplified, impl.rk4_simplified
    if model == "full":
        return impl.deriv_full, impl.rk4_full
    raise ValueError(f"unknown model {model!r}")

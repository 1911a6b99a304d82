"""Backend selection for the sweep kernels.

Prefers the compiled extension; falls back to the pure-Python implementation
when the extension is missing or ``MIRRORLAT_PURE_PYTHON=1`` is set.  Both
backends are trajectory-identical for the same pre-drawn randoms, so the
choice affects speed only (see benchmarks/bench_kernels.py).
"""
import os

from . import _kernels_py

if os.environ.get("MIRRORLAT_PURE_PYTHON", "") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
scalar_sweep = _impl.scalar_sweep
u1_sweep = _impl.u1_sweep
zn_sweep = _impl.zn_sweep


def available_backends():
    backends = {"python": _kernels_py}
    try:
        from . import _kernels
        backends["cython"] = _kernels
    except ImportError:
        pass
    return backends

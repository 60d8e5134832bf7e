"""Backend selection for the numerical hot loops.

The compiled extension ``macroq._ckernels`` is used when it imports; otherwise
the numpy implementation in :mod:`macroq._pykernels` is used. Setting the
environment variable ``MACROQ_PURE_PYTHON=1`` forces the numpy backend.
"""
import os

from macroq import _pykernels

try:
    from macroq import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _ckernels is not None and not os.environ.get("MACROQ_PURE_PYTHON"):
    _impl = _ckernels
    BACKEND = "compiled"
else:
    _impl = _pykernels
    BACKEND = "python"

besselj = _impl.besselj
cosine_series = _impl.cosine_series


def available_backends():
    """Return a mapping of backend name to kernel module for every importable backend."""
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["compiled"] = _ckernels
    return backends

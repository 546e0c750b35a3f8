"""
Backend selection for the point-probe kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``CYLPROC_PURE`` is set to a non-empty value other
than ``0``, the numpy implementation is used. Both return identical codes.
"""

import os

from . import _kernels_py

COVERED, SHELL, OUTSIDE = _kernels_py.COVERED, _kernels_py.SHELL, _kernels_py.OUTSIDE
KIND_BALL, KIND_BOX, KIND_INTERVAL, KIND_POINT = (
    _kernels_py.KIND_BALL, _kernels_py.KIND_BOX, _kernels_py.KIND_INTERVAL,
    _kernels_py.KIND_POINT)

try:
    from . import _kernels as _compiled
    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
    HAVE_COMPILED = False

_force_pure = os.environ.get("CYLPROC_PURE", "") not in ("", "0")
backend = _kernels_py if (_force_pure or not HAVE_COMPILED) else _compiled
BACKEND_NAME = "numpy" if backend is _kernels_py else "compiled"


def classify(probes, proj, centers, kinds, params, reach, eps, half_extent):
    return backend.classify(probes, proj, centers, kinds, params, reach, eps, half_extent)


def interval_union_lengths(starts, ends, offsets, lo, hi):
    return backend.interval_union_lengths(starts, ends, offsets, lo, hi)

"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``LOGCONCAVE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("LOGCONCAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if compiled_backend is not None else "python"

sturm_count = backend.sturm_count
tridiag_eigenvalue = backend.tridiag_eigenvalue
conv_logdensity = backend.conv_logdensity
band_matched_mass = backend.band_matched_mass
bf_isoperimetric = backend.bf_isoperimetric
bf_concentration = backend.bf_concentration

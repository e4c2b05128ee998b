"""Backend selection for the hot solver kernel.

The compiled Cython kernel is preferred when importable; otherwise the numpy
reference backend is used. Set CYCLE_CENSUS_BACKEND=python to force the
fallback (e.g. for benchmarking). Both backends share one contract, and the
selection is fixed at import time so every worker process of a run computes
with the same code.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

FLAG_OK = _kernels_py.FLAG_OK
FLAG_MAX_ITER = _kernels_py.FLAG_MAX_ITER
FLAG_NO_CONTRACTION = _kernels_py.FLAG_NO_CONTRACTION
FLAG_NONFINITE = _kernels_py.FLAG_NONFINITE

cumulative_simpson = _kernels_py.cumulative_simpson

try:  # compiled extension is optional
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None


def picard_batch_python(fk, gk, w, h, tol, max_iter):
    return _kernels_py.picard_batch(fk, gk, w, h, tol, max_iter)


def picard_batch_compiled(fk, gk, w, h, tol, max_iter):
    if _compiled is None:
        raise RuntimeError("compiled kernel extension is not available")
    fk = np.asarray(fk, dtype=np.complex128)
    gk = np.asarray(gk, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    r_re, r_im, iters, resid, ratio_max, flags = _compiled.picard_batch_soa(
        np.ascontiguousarray(fk.real),
        np.ascontiguousarray(fk.imag),
        np.ascontiguousarray(gk.real),
        np.ascontiguousarray(gk.imag),
        np.ascontiguousarray(w.real),
        np.ascontiguousarray(w.imag),
        float(h),
        float(tol),
        int(max_iter),
    )
    return r_re + 1j * r_im, iters, resid, ratio_max, flags


if _compiled is not None and os.environ.get("CYCLE_CENSUS_BACKEND", "") != "python":
    BACKEND = "compiled"
    picard_batch = picard_batch_compiled
else:
    BACKEND = "python"
    picard_batch = picard_batch_python


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names

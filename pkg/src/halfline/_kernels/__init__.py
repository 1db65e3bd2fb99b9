"""Backend selection for the hot ODE kernel.

The compiled Cython core is preferred; the pure-numpy twin is the fallback.
Set HALFLINE_BACKEND=python (or =cython) to force a choice at import time.
"""

import os

from . import _dp_py
from ._dp_py import POT_LAYERS, POT_LINEAR

_forced = os.environ.get("HALFLINE_BACKEND", "").lower()

_dp_cy = None
if _forced != "python":
    try:
        import importlib

        _dp_cy = importlib.import_module(".._kernels._dp_cy", __name__)
    except ImportError:
        _dp_cy = None
        if _forced == "cython":
            raise

BACKEND = "cython" if _dp_cy is not None else "python"


def available_backends():
    """Names of the importable kernel implementations."""
    return ("python", "cython") if _dp_cy is not None else ("python",)


def integrate_jost(ks, x_nodes, mode, pxs, pvals, rtol=1e-10, atol=1e-12,
                   backend=None, max_steps=2_000_000):
    """Integrate the phase-removed Jost system; dispatches to the active backend."""
    impl = _dp_cy if (backend or BACKEND) == "cython" and _dp_cy is not None else _dp_py
    import numpy as _np

    # the compiled kernel takes writable contiguous memoryviews; domain
    # objects hand out read-only arrays
    pxs = _np.ascontiguousarray(pxs, dtype=float)
    pvals = _np.ascontiguousarray(pvals, dtype=complex)
    if not pxs.flags.writeable:
        pxs = pxs.copy()
    if not pvals.flags.writeable:
        pvals = pvals.copy()
    return impl.integrate_jost(ks, x_nodes, mode, pxs, pvals, rtol=rtol,
                               atol=atol, max_steps=max_steps)

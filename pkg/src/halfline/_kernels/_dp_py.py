"""Pure-numpy Dormand-Prince 5(4) integrator for the phase-removed Jost system.

The Jost solution is written as f(k,x) = e^{ikx} g(k,x); then g solves
g'' + 2ik g' = V(x) g with g = I, g' = 0 at the top of the integration range.
Integrating g instead of f keeps every quantity bounded for Im k >= 0.

POT_LINEAR interprets (pxs, pvals) as samples joined by linear interpolation
(zero outside the sampled range); POT_LAYERS as piecewise-constant layers with
edges pxs (pxs[0] = 0) and pvals[i] on [pxs[i], pxs[i+1]), zero beyond.
"""

import numpy as np

from ..errors import IntegrationFailure, NonFinite

POT_LINEAR = 0
POT_LAYERS = 1

_A = [
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
]
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _potential_eval(mode, pxs, pvals, x, n):
    if pvals.shape[0] == 0 or x > pxs[-1] or x < pxs[0]:
        return np.zeros((n, n), dtype=complex)
    if mode == POT_LAYERS:
        i = int(np.searchsorted(pxs, x, side="right")) - 1
        if i >= pvals.shape[0]:
            return np.zeros((n, n), dtype=complex)
        return pvals[i]
    i = int(np.searchsorted(pxs, x, side="right")) - 1
    i = min(max(i, 0), len(pxs) - 2)
    x0, x1 = pxs[i], pxs[i + 1]
    w = 0.0 if x1 <= x0 else (x - x0) / (x1 - x0)
    return (1 - w) * pvals[i] + w * pvals[i + 1]


def _integrate_span(k, x_hi, x_lo, g, h, mode, pxs, pvals, rtol, atol, max_steps):
    """Advance (g, h) from x_hi down to x_lo; returns updated state.

    A span never crosses a layer edge, so in layers mode the potential is a
    constant picked at the span midpoint.
    """
    n = g.shape[0]
    if mode == POT_LAYERS:
        Vconst = _potential_eval(mode, pxs, pvals, 0.5 * (x_hi + x_lo), n)

        def vfun(x):
            return Vconst

    else:

        def vfun(x):
            return _potential_eval(mode, pxs, pvals, x, n)
    two_ik = 2j * k
    span = x_hi - x_lo
    if span <= 0:
        return g, h
    step = -min(span, 0.1 / (1.0 + abs(two_ik)))
    x = x_hi
    nsteps = 0
    while x > x_lo + 1e-14 * max(1.0, abs(x_lo)):
        if nsteps > max_steps:
            raise IntegrationFailure(f"step budget exceeded at k={k}, x={x}")
        if x + step < x_lo:
            step = x_lo - x
        kg = []
        kh = []
        for s in range(7):
            gg = g
            hh = h
            for j, a in enumerate(_A[s]):
                if a != 0.0:
                    gg = gg + (step * a) * kg[j]
                    hh = hh + (step * a) * kh[j]
            kg.append(hh)
            kh.append(vfun(x + _C[s] * step) @ gg - two_ik * hh)
        g5 = g
        h5 = h
        for j, a in enumerate(_A[6]):
            if a != 0.0:
                g5 = g5 + (step * a) * kg[j]
                h5 = h5 + (step * a) * kh[j]
        eg = sum((step * e) * kg[j] for j, e in enumerate(_E) if e != 0.0)
        eh = sum((step * e) * kh[j] for j, e in enumerate(_E) if e != 0.0)
        sc = atol + rtol * max(np.abs(g5).max(), np.abs(h5).max())
        err = max(np.abs(eg).max(), np.abs(eh).max()) / sc
        if not np.isfinite(err):
            raise NonFinite(f"non-finite state at k={k}, x={x}")
        if err <= 1.0:
            x = x + step
            g, h = g5, h5
        fac = 0.9 * (err + 1e-16) ** -0.2
        step = step * min(5.0, max(0.2, fac))
        if abs(step) < 1e-14 * max(1.0, abs(x)):
            raise IntegrationFailure(f"step underflow at k={k}, x={x}")
        nsteps += 1
    return g, h


def integrate_jost(ks, x_nodes, mode, pxs, pvals, rtol=1e-10, atol=1e-12, max_steps=2_000_000):
    """Integrate the phase-removed Jost system down through `x_nodes`.

    Returns (g, gp) with shape (nk, nx, n, n): g and g' recorded at every
    node, integrating from x_nodes[-1] (where g=I, g'=0) down to x_nodes[0].
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    x_nodes = np.asarray(x_nodes, dtype=float)
    pvals = np.asarray(pvals, dtype=complex)
    n = pvals.shape[1] if pvals.ndim == 3 and pvals.shape[0] else pvals.shape[-1]
    nx = len(x_nodes)
    g_out = np.empty((len(ks), nx, n, n), dtype=complex)
    h_out = np.empty_like(g_out)
    # breakpoints where the integration must stop exactly
    if mode == POT_LAYERS and pvals.shape[0]:
        brk = np.asarray(pxs, dtype=float)
    else:
        brk = np.empty(0)
    for ik, k in enumerate(ks):
        g = np.eye(n, dtype=complex)
        h = np.zeros((n, n), dtype=complex)
        g_out[ik, nx - 1] = g
        h_out[ik, nx - 1] = h
        for j in range(nx - 2, -1, -1):
            x_hi, x_lo = x_nodes[j + 1], x_nodes[j]
            stops = brk[(brk > x_lo + 1e-12) & (brk < x_hi - 1e-12)]
            pieces = np.concatenate([[x_hi], stops[::-1], [x_lo]])
            for p in range(len(pieces) - 1):
                g, h = _integrate_span(
                    k, pieces[p], pieces[p + 1], g, h, mode, pxs, pvals, rtol, atol, max_steps
                )
            g_out[ik, j] = g
            h_out[ik, j] = h
    return g_out, h_out

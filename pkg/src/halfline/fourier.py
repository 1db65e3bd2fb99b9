"""Oscillatory quadrature and the rational large-k basis.

The Fourier step of the inverse transform needs (1/2pi) int G(k) e^{iky} dk
for y up to twice the reconstruction range. Plain quadrature degrades as
O(h^2) near large y, so the integral is evaluated Filon-style: G is replaced
by its cubic spline on the k-grid and spline * e^{iky} is integrated exactly
on every interval.

The slowly decaying part of S(k) - S_inf is removed first by a least-squares
fit in the basis chi_m(k) = 1 / (ik + gamma)^m, whose Fourier transforms are
known in closed form, so only a fast-decaying residual reaches the spline.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AsymmetricGrid


def chi_basis(ks, gamma, p):
    """chi_m(k) = 1/(ik + gamma)^m for m = 1..p, shape (nk, p)."""
    ks = np.asarray(ks, dtype=float)
    base = 1.0 / (1j * ks + gamma)
    return base[:, None] ** np.arange(1, p + 1)[None, :]


def chi_fourier(ys, gamma, p):
    """(1/2pi) int chi_m(k) e^{iky} dk = y^{m-1} e^{-gamma y} / (m-1)! on y >= 0.

    The transform vanishes for y < 0 (all poles lie in the upper half plane);
    at y = 0 the right-limit value is used. Shape (ny, p).
    """
    ys = np.asarray(ys, dtype=float)
    out = np.zeros((len(ys), p))
    pos = ys >= 0
    y = ys[pos]
    decay = np.exp(-np.clip(gamma * y, -700.0, 700.0))
    for m in range(1, p + 1):
        out[pos, m - 1] = y ** (m - 1) * decay / math.factorial(m - 1)
    return out


def _moments(w, h):
    """M_p(w) = int_0^h t^p e^{iwt} dt for p = 0..3, shape (4, nw).

    Valid for complex w with Im w >= 0. Upward recurrence in p for |wh| away
    from 0; Taylor series branch where the recurrence would cancel
    catastrophically.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    M = np.zeros((4, len(w)), dtype=complex)
    z = w * h
    small = np.abs(z) < 0.5

    if np.any(~small):
        ww = w[~small]
        iw = 1j * ww
        e = np.exp(1j * ww * h)
        m0 = (e - 1.0) / iw
        M[0, ~small] = m0
        prev = m0
        for p in range(1, 4):
            prev = (h ** p * e - p * prev) / iw
            M[p, ~small] = prev

    if np.any(small):
        zz = z[small]
        for p in range(4):
            acc = np.zeros_like(zz, dtype=complex)
            term = np.ones_like(zz, dtype=complex)
            for s in range(0, 18):
                acc = acc + term / (p + s + 1)
                term = term * (1j * zz) / (s + 1)
            M[p, small] = h ** (p + 1) * acc
    return M


def spline_oscillatory_integral(t_grid, G_values, ws):
    """int G(t) e^{iwt} dt over the grid range, exactly for the cubic spline
    of G. Handles complex w with Im w >= 0. Returns shape (nw, n, n)."""
    t_grid = np.asarray(t_grid, dtype=float)
    G = np.asarray(G_values, dtype=complex)
    scalar = G.ndim == 1
    if scalar:
        G = G[:, None, None]
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    dts = np.diff(t_grid)
    h = dts[0]
    if np.abs(dts - h).max() > 1e-9 * h:
        raise AsymmetricGrid("oscillatory integral requires a uniform grid")

    spline = CubicSpline(t_grid, G, axis=0)
    c = spline.c  # (4, nt-1, n, n); c[0] multiplies (t - t_j)^3
    M = _moments(ws, h)  # (4, nw)
    phase = np.exp(1j * np.outer(ws, t_grid[:-1]))  # (nw, nj)
    # pair polynomial degree 3-p with moment order 3-p
    out = np.einsum("yj,pjab,py->yab", phase, c, M[::-1], optimize=True)
    return out[:, 0, 0] if scalar else out


def oscillatory_transform(k_grid, G_values, ys):
    """(1/2pi) int_{k_min}^{k_max} G(k) e^{iky} dk via exact cubic-Filon.

    k_grid must be uniformly spaced. G_values has shape (nk, n, n) (or (nk,)
    for scalars); returns shape (ny, n, n).
    """
    out = spline_oscillatory_integral(k_grid, G_values,
                                      np.asarray(ys, dtype=float))
    return out / (2.0 * np.pi)


def fit_rational_tail(k_grid, S_values, S_inf, gamma=1.0, p=6, window=0.5):
    """Least-squares coefficients C_m with S(k) - S_inf ~ sum_m C_m chi_m(k).

    The fit uses only |k| >= window * k_max on both signs. Returns C of shape
    (p, n, n); C[0] is the 1/(ik) coefficient when gamma terms are resummed
    at large k, i.e. the leading large-k slope of S.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    S = np.asarray(S_values, dtype=complex)
    mask = np.abs(k_grid) >= window * np.abs(k_grid).max()
    A = chi_basis(k_grid[mask], gamma, p)  # (nm, p)
    rhs = (S[mask] - S_inf).reshape(mask.sum(), -1)
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    n = S.shape[1]
    return coef.reshape(p, n, n)


def rational_tail_values(k_grid, C, gamma):
    """sum_m C_m chi_m(k) on the grid; shape (nk, n, n)."""
    p = C.shape[0]
    A = chi_basis(k_grid, gamma, p)  # (nk, p)
    return np.einsum("km,mab->kab", A, C)


def rational_tail_fourier(ys, C, gamma):
    """Closed-form Fourier transform of the fitted tail on y >= 0."""
    p = C.shape[0]
    W = chi_fourier(ys, gamma, p)  # (ny, p)
    return np.einsum("ym,mab->yab", W, C)

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 5(4) core for the phase-removed Jost system.

Same contract as _dp_py.integrate_jost; see that module for the math.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, fmax, fmin

cnp.import_array()

ctypedef double complex cplx

cdef int POT_LINEAR = 0
cdef int POT_LAYERS = 1

cdef double _A1_0 = 1.0 / 5
cdef double _A2_0 = 3.0 / 40, _A2_1 = 9.0 / 40
cdef double _A3_0 = 44.0 / 45, _A3_1 = -56.0 / 15, _A3_2 = 32.0 / 9
cdef double _A4_0 = 19372.0 / 6561, _A4_1 = -25360.0 / 2187
cdef double _A4_2 = 64448.0 / 6561, _A4_3 = -212.0 / 729
cdef double _A5_0 = 9017.0 / 3168, _A5_1 = -355.0 / 33, _A5_2 = 46732.0 / 5247
cdef double _A5_3 = 49.0 / 176, _A5_4 = -5103.0 / 18656
cdef double _A6_0 = 35.0 / 384, _A6_2 = 500.0 / 1113, _A6_3 = 125.0 / 192
cdef double _A6_4 = -2187.0 / 6784, _A6_5 = 11.0 / 84
cdef double _E0 = 71.0 / 57600, _E2 = -71.0 / 16695, _E3 = 71.0 / 1920
cdef double _E4 = -17253.0 / 339200, _E5 = 22.0 / 525, _E6 = -1.0 / 40
cdef double _C1 = 1.0 / 5, _C2 = 3.0 / 10, _C3 = 4.0 / 5, _C4 = 8.0 / 9


cdef inline int _bisect_right(double[::1] xs, double x, int m) noexcept nogil:
    cdef int lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if x < xs[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef inline void _pot_linear(double[::1] pxs, cplx[:, :, ::1] pvals,
                             double x, int n, cplx* V) noexcept nogil:
    cdef int m = pxs.shape[0]
    cdef int i, a, nn = n * n
    cdef double x0, x1, w
    if m == 0 or pvals.shape[0] == 0 or x > pxs[m - 1] or x < pxs[0]:
        for a in range(nn):
            V[a] = 0
        return
    i = _bisect_right(pxs, x, m) - 1
    if i < 0:
        i = 0
    if i > m - 2:
        i = m - 2
    x0 = pxs[i]
    x1 = pxs[i + 1]
    w = 0.0 if x1 <= x0 else (x - x0) / (x1 - x0)
    cdef cplx* lo = &pvals[i, 0, 0]
    cdef cplx* hi = &pvals[i + 1, 0, 0]
    for a in range(nn):
        V[a] = (1.0 - w) * lo[a] + w * hi[a]


cdef inline void _rhs(cplx* V, cplx two_ik, cplx* g, cplx* h,
                      cplx* dg, cplx* dh, int n) noexcept nogil:
    # dg = h;  dh = V g - 2ik h
    cdef int r, c, t, n2 = n * n
    cdef cplx acc
    for r in range(n2):
        dg[r] = h[r]
    for r in range(n):
        for c in range(n):
            acc = 0
            for t in range(n):
                acc = acc + V[r * n + t] * g[t * n + c]
            dh[r * n + c] = acc - two_ik * h[r * n + c]


cdef int _integrate_span(cplx k, double x_hi, double x_lo,
                         cplx* g, cplx* h,
                         int mode, double[::1] pxs, cplx[:, :, ::1] pvals,
                         double rtol, double atol, long max_steps,
                         cplx* work) noexcept nogil:
    """Returns 0 on success, 1 on step underflow, 2 on step budget, 3 non-finite."""
    cdef int n = <int>pvals.shape[1]
    cdef int n2
    # work layout: V | kg(7 blocks) | kh(7) | gg | hh | g5 | h5
    cdef cplx* V
    cdef cplx* kg
    cdef cplx* kh
    cdef cplx* gg
    cdef cplx* hh
    cdef cplx* g5
    cdef cplx* h5
    cdef cplx two_ik = 2j * k
    cdef double span = x_hi - x_lo
    cdef double step, x, sc, err, mag, fac, cs
    cdef long nsteps = 0
    cdef int s, j, a, vconst
    cdef double eg_max, eh_max
    cdef cplx acc
    cdef double[7] arow
    if span <= 0:
        return 0
    n2 = n * n
    V = work
    kg = work + n2
    kh = kg + 7 * n2
    gg = kh + 7 * n2
    hh = gg + n2
    g5 = hh + n2
    h5 = g5 + n2
    vconst = 1 if (mode == POT_LAYERS or pvals.shape[0] == 0) else 0
    if vconst:
        _pot_layers(pxs, pvals, 0.5 * (x_hi + x_lo), n, V)
    mag = 2.0 * (fabs(two_ik.real) + fabs(two_ik.imag))
    step = -fmin(span, 0.1 / (1.0 + mag))
    x = x_hi
    while x > x_lo + 1e-14 * fmax(1.0, fabs(x_lo)):
        if nsteps > max_steps:
            return 2
        if x + step < x_lo:
            step = x_lo - x
        for s in range(7):
            if s == 0:
                for a in range(n2):
                    gg[a] = g[a]
                    hh[a] = h[a]
                cs = 0.0
            else:
                if s == 1:
                    arow[0] = _A1_0; cs = _C1
                elif s == 2:
                    arow[0] = _A2_0; arow[1] = _A2_1; cs = _C2
                elif s == 3:
                    arow[0] = _A3_0; arow[1] = _A3_1; arow[2] = _A3_2; cs = _C3
                elif s == 4:
                    arow[0] = _A4_0; arow[1] = _A4_1; arow[2] = _A4_2
                    arow[3] = _A4_3; cs = _C4
                elif s == 5:
                    arow[0] = _A5_0; arow[1] = _A5_1; arow[2] = _A5_2
                    arow[3] = _A5_3; arow[4] = _A5_4; cs = 1.0
                else:
                    arow[0] = _A6_0; arow[1] = 0.0; arow[2] = _A6_2
                    arow[3] = _A6_3; arow[4] = _A6_4; arow[5] = _A6_5; cs = 1.0
                for a in range(n2):
                    acc = g[a]
                    for j in range(s):
                        if arow[j] != 0.0:
                            acc = acc + (step * arow[j]) * kg[j * n2 + a]
                    gg[a] = acc
                    acc = h[a]
                    for j in range(s):
                        if arow[j] != 0.0:
                            acc = acc + (step * arow[j]) * kh[j * n2 + a]
                    hh[a] = acc
            if not vconst:
                _pot_linear(pxs, pvals, x + cs * step, n, V)
            _rhs(V, two_ik, gg, hh, kg + s * n2, kh + s * n2, n)
        # 5th-order solution reuses the last stage row (stage 6 is b5)
        for a in range(n2):
            g5[a] = g[a] + step * (_A6_0 * kg[a] + _A6_2 * kg[2 * n2 + a]
                                   + _A6_3 * kg[3 * n2 + a] + _A6_4 * kg[4 * n2 + a]
                                   + _A6_5 * kg[5 * n2 + a])
            h5[a] = h[a] + step * (_A6_0 * kh[a] + _A6_2 * kh[2 * n2 + a]
                                   + _A6_3 * kh[3 * n2 + a] + _A6_4 * kh[4 * n2 + a]
                                   + _A6_5 * kh[5 * n2 + a])
        eg_max = 0.0
        eh_max = 0.0
        sc = 0.0
        for a in range(n2):
            acc = step * (_E0 * kg[a] + _E2 * kg[2 * n2 + a] + _E3 * kg[3 * n2 + a]
                          + _E4 * kg[4 * n2 + a] + _E5 * kg[5 * n2 + a]
                          + _E6 * kg[6 * n2 + a])
            eg_max = fmax(eg_max, fabs(acc.real) + fabs(acc.imag))
            acc = step * (_E0 * kh[a] + _E2 * kh[2 * n2 + a] + _E3 * kh[3 * n2 + a]
                          + _E4 * kh[4 * n2 + a] + _E5 * kh[5 * n2 + a]
                          + _E6 * kh[6 * n2 + a])
            eh_max = fmax(eh_max, fabs(acc.real) + fabs(acc.imag))
            sc = fmax(sc, fabs(g5[a].real) + fabs(g5[a].imag))
            sc = fmax(sc, fabs(h5[a].real) + fabs(h5[a].imag))
        err = fmax(eg_max, eh_max) / (atol + rtol * sc)
        if err != err:
            return 3
        if err <= 1.0:
            x = x + step
            for a in range(n2):
                g[a] = g5[a]
                h[a] = h5[a]
        fac = 0.9 * pow(err + 1e-16, -0.2)
        step = step * fmin(5.0, fmax(0.2, fac))
        if fabs(step) < 1e-14 * fmax(1.0, fabs(x)):
            return 1
        nsteps = nsteps + 1
    return 0


cdef inline void _pot_layers(double[::1] pxs, cplx[:, :, ::1] pvals,
                             double x, int n, cplx* V) noexcept nogil:
    cdef int m = pxs.shape[0]
    cdef int i, a, nn = n * n
    if pvals.shape[0] == 0 or x < pxs[0] or x > pxs[m - 1]:
        for a in range(nn):
            V[a] = 0
        return
    i = _bisect_right(pxs, x, m) - 1
    if i >= pvals.shape[0]:
        for a in range(nn):
            V[a] = 0
        return
    cdef cplx* src = &pvals[i, 0, 0]
    for a in range(nn):
        V[a] = src[a]


def integrate_jost(ks, x_nodes, int mode, pxs, pvals,
                   double rtol=1e-10, double atol=1e-12, long max_steps=2_000_000):
    """Compiled twin of _dp_py.integrate_jost."""
    cdef cnp.ndarray[cplx, ndim=1] ks_arr = np.atleast_1d(np.asarray(ks, dtype=complex))
    cdef cnp.ndarray[double, ndim=1] xn = np.ascontiguousarray(x_nodes, dtype=float)
    cdef cnp.ndarray[double, ndim=1] pxs_arr = np.ascontiguousarray(pxs, dtype=float)
    pv = np.asarray(pvals, dtype=complex)
    cdef int n = pv.shape[1] if (pv.ndim == 3 and pv.shape[0] > 0) else pv.shape[pv.ndim - 1]
    if pv.ndim != 3:
        pv = pv.reshape(0, n, n)
    cdef cplx[:, :, ::1] pv_mv = np.ascontiguousarray(pv)
    cdef double[::1] pxs_mv = pxs_arr
    cdef int nk = ks_arr.shape[0]
    cdef int nx = xn.shape[0]
    cdef cnp.ndarray[cplx, ndim=4] g_out = np.empty((nk, nx, n, n), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=4] h_out = np.empty((nk, nx, n, n), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=1] work = np.zeros(20 * n * n, dtype=complex)
    cdef cplx* wp = <cplx*>cnp.PyArray_DATA(work)
    cdef cnp.ndarray[cplx, ndim=1] gbuf = np.empty(n * n, dtype=complex)
    cdef cnp.ndarray[cplx, ndim=1] hbuf = np.empty(n * n, dtype=complex)
    cdef cplx* g = <cplx*>cnp.PyArray_DATA(gbuf)
    cdef cplx* h = <cplx*>cnp.PyArray_DATA(hbuf)

    # stop points inside a node interval: layer edges (true discontinuities)
    if mode == POT_LAYERS and pv_mv.shape[0] > 0:
        brk = np.asarray(pxs_arr)
    else:
        brk = np.empty(0)

    cdef int ik, j, a, r, c, status, p
    cdef double p_hi, p_lo
    cdef cplx k
    cdef int n2 = n * n
    for ik in range(nk):
        k = ks_arr[ik]
        for a in range(n2):
            g[a] = 0
            h[a] = 0
        for a in range(n):
            g[a * n + a] = 1
        for r in range(n):
            for c in range(n):
                g_out[ik, nx - 1, r, c] = g[r * n + c]
                h_out[ik, nx - 1, r, c] = h[r * n + c]
        for j in range(nx - 2, -1, -1):
            stops = brk[(brk > xn[j] + 1e-12) & (brk < xn[j + 1] - 1e-12)]
            pieces = np.concatenate([[xn[j + 1]], stops[::-1], [xn[j]]])
            for p in range(len(pieces) - 1):
                p_hi = pieces[p]
                p_lo = pieces[p + 1]
                with nogil:
                    status = _integrate_span(k, p_hi, p_lo, g, h,
                                             mode, pxs_mv, pv_mv, rtol, atol,
                                             max_steps, wp)
                if status == 1:
                    from ..errors import IntegrationFailure
                    raise IntegrationFailure(f"step underflow at k={k}")
                if status == 2:
                    from ..errors import IntegrationFailure
                    raise IntegrationFailure(f"step budget exceeded at k={k}")
                if status == 3:
                    from ..errors import NonFinite
                    raise NonFinite(f"non-finite state at k={k}")
            for r in range(n):
                for c in range(n):
                    g_out[ik, j, r, c] = g[r * n + c]
                    h_out[ik, j, r, c] = h[r * n + c]
    return g_out, h_out

"""Closed-form reference solutions used to cross-check the numerical solvers.

Every oracle here is derived independently of the ODE kernel:

* zero potential: f(k, x) = e^{ikx} I exactly, so J(k) = B - ik A.
* piecewise-constant potential: exact layer propagators e^{L d} with
  L = [[0, I], [V - k^2 I, 0]], chained from the free region down to x = 0.
* exponential potential V(x) = C e^{-ax}: the Jost solution has the
  convergent series f(k, x) = e^{ikx} sum_m c_m e^{-amx} with c_0 = I and
  c_m = C c_{m-1} / (a m (a m - 2ik)), valid for Im k >= 0.
* scalar Robin boundary with V = 0: fully explicit scattering data and
  Marchenko kernels.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .types import BoundaryCondition, Potential, make_potential, validate_boundary


def diagonal_boundary(thetas) -> BoundaryCondition:
    """A = diag(-sin theta_j), B = diag(cos theta_j) for angles in (0, pi]."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    return validate_boundary(np.diag(-np.sin(thetas)), np.diag(np.cos(thetas)))


def zero_jost_oracle(n, ks):
    """(f(k,0), f'(k,0)) for V = 0: the identity and ik times it."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    eye = np.eye(n, dtype=complex)
    f0 = np.broadcast_to(eye, (len(ks), n, n)).copy()
    fp0 = 1j * ks[:, None, None] * f0
    return f0, fp0


def zero_scattering_oracle(bc: BoundaryCondition, ks):
    """S(k) = -(B + ikA)(B - ikA)^{-1} for the zero potential."""
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    S = np.empty((len(ks), bc.n, bc.n), dtype=complex)
    for i, k in enumerate(ks):
        Jp = bc.B - 1j * k * bc.A
        Jm = bc.B + 1j * k * bc.A
        S[i] = -Jm @ np.linalg.inv(Jp)
    return S


def step_jost_oracle(edges, layers, ks):
    """Exact Jost boundary values for a piecewise-constant potential.

    `edges` are the layer boundaries starting at 0; layer j occupies
    [edges[j], edges[j+1]) with constant matrix layers[j]; V = 0 beyond
    edges[-1]. Returns (f(k,0), f'(k,0)) with shape (nk, n, n). Each layer is
    crossed with the matrix exponential of the first-order system, evaluated
    per k, which is exact up to the expm routine itself.
    """
    edges = np.asarray(edges, dtype=float)
    layers = [np.asarray(V, dtype=complex) for V in layers]
    n = layers[0].shape[0] if layers else 1
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    eye = np.eye(n, dtype=complex)
    f0 = np.empty((len(ks), n, n), dtype=complex)
    fp0 = np.empty_like(f0)
    top = edges[-1] if len(edges) > 1 else 0.0
    for i, k in enumerate(ks):
        state = np.vstack([np.exp(1j * k * top) * eye,
                           1j * k * np.exp(1j * k * top) * eye])
        for j in range(len(layers) - 1, -1, -1):
            d = edges[j + 1] - edges[j]
            L = np.zeros((2 * n, 2 * n), dtype=complex)
            L[:n, n:] = eye
            L[n:, :n] = layers[j] - k * k * eye
            state = expm(-d * L) @ state
        f0[i] = state[:n]
        fp0[i] = state[n:]
    return f0, fp0


def exponential_jost_oracle(C, a, ks, xs=0.0, terms=80):
    """Jost solution for V(x) = C e^{-ax} via its convergent power series.

    Substituting f = e^{ikx} sum_m c_m e^{-amx} into the equation gives the
    recursion c_0 = I, c_m = C c_{m-1} / (a m (a m - 2ik)), which converges
    factorially for every k with Im k >= 0. Returns (f, fp) of shape
    (nk, nx, n, n).
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    n = C.shape[0]
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    f = np.zeros((len(ks), len(xs), n, n), dtype=complex)
    fp = np.zeros_like(f)
    for i, k in enumerate(ks):
        c = np.eye(n, dtype=complex)
        for m in range(terms + 1):
            if m > 0:
                c = C @ c / (a * m * (a * m - 2j * k))
            decay = np.exp((1j * k - a * m) * xs)
            f[i] += decay[:, None, None] * c
            fp[i] += ((1j * k - a * m) * decay)[:, None, None] * c
            if np.abs(c).max() < 1e-18 and m > 2:
                break
    return f, fp


def jost_matrix_oracle(f0_fn, bc: BoundaryCondition, ks):
    """J(k) from an oracle returning boundary values; handles the reflection
    k -> -conj(k) required by the definition."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    f0, fp0 = f0_fn(-ks.conj())
    return (f0.conj().swapaxes(-2, -1) @ bc.B
            - fp0.conj().swapaxes(-2, -1) @ bc.A)


def robin_oracle(theta):
    """Everything about the scalar Robin problem with V = 0.

    Boundary pair (-sin theta, cos theta) for theta in (0, pi]. Returns a dict
    with callables S(k), Fs(y) and the constants S_inf, G1, and the bound
    state (kappa, M) or None.
    """
    st, ct = np.sin(theta), np.cos(theta)

    def S(k):
        k = np.asarray(k, dtype=float)
        return -(ct - 1j * k * st) / (ct + 1j * k * st)

    if abs(st) < 1e-15:      # Dirichlet: S = -1 identically
        S_inf, G1 = -1.0, 0.0

        def Fs(y):
            return np.zeros_like(np.asarray(y, dtype=float))

        bound = None
    else:
        cot = ct / st
        S_inf, G1 = 1.0, -2.0 * cot

        def Fs(y):
            y = np.asarray(y, dtype=float)
            return np.where(y >= 0, -2.0 * cot * np.exp(-np.clip(cot * y, -700, 700)), 0.0)

        bound = (cot, np.sqrt(2.0 * cot)) if cot > 0 else None

    return {
        "theta": theta,
        "boundary": validate_boundary([[-st]], [[ct]]),
        "S": S,
        "S_inf": S_inf,
        "G1": G1,
        "Fs": Fs,
        "bound_state": bound,
    }


def standard_fixtures(x_max=12.0):
    """Named (potential, boundary) pairs exercised by the round-trip suite."""
    fixtures = []

    fixtures.append((
        "scalar_well_dirichlet",
        make_potential(1, x_max, {"name": "step", "params": {
            "boundaries": [1.0], "layers": [[[-2.0]]]}}),
        validate_boundary([[0.0]], [[1.0]]),
    ))
    fixtures.append((
        "scalar_barrier_neumann",
        make_potential(1, x_max, {"name": "step", "params": {
            "boundaries": [0.7, 1.5], "layers": [[[1.5]], [[-0.3]]]}}),
        validate_boundary([[-1.0]], [[0.0]]),
    ))
    th = np.pi / 3
    fixtures.append((
        "scalar_exponential_robin",
        make_potential(1, x_max, {"name": "exponential", "params": {
            "amplitude": [[-1.5]], "rate": 1.0}}),
        validate_boundary([[-np.sin(th)]], [[np.cos(th)]]),
    ))
    C = np.array([[0.8, 0.3], [0.3, -0.5]])
    fixtures.append((
        "matrix_exponential_mixed",
        make_potential(2, x_max, {"name": "exponential", "params": {
            "amplitude": C, "rate": 1.2}}),
        validate_boundary(np.diag([0.0, -np.sin(np.pi / 4)]),
                          np.diag([1.0, np.cos(np.pi / 4)])),
    ))
    V1 = np.array([[-1.0, 0.4], [0.4, 0.3]])
    V2 = np.array([[0.2, -0.1], [-0.1, -0.8]])
    fixtures.append((
        "matrix_step_dirichlet",
        make_potential(2, x_max, {"name": "step", "params": {
            "boundaries": [0.8, 1.6], "layers": [V1, V2]}}),
        validate_boundary(np.zeros((2, 2)), np.eye(2)),
    ))
    return fixtures

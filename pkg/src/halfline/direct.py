"""Direct scattering for the half-line matrix Schrodinger problem.

Pipeline: Jost solutions f(k, x) via the phase-removed ODE kernel, Jost
matrix J(k) = f(-conj(k), 0)^H B - f'(-conj(k), 0)^H A, scattering matrix
S(k) = -J(-k) J(k)^{-1} on a symmetric k-grid, bound states from the
singular values of J(i kappa) on the positive imaginary axis, and
normalization matrices M_j built from the kernel projectors of J(i kappa_j).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.linalg import eig
from scipy.optimize import minimize_scalar

from ._kernels import POT_LAYERS, POT_LINEAR, integrate_jost
from .errors import (
    ClusterUnresolved,
    NotPositive,
    ScanInconclusive,
    SingularJost,
)
from .types import (
    BoundaryCondition,
    JostBundle,
    Potential,
    ScatteringData,
    make_bound_state,
)

# Condition-number ceiling above which J(k) is treated as numerically singular.
JOST_COND_MAX = 1e12


@dataclass(frozen=True)
class DirectConfig:
    """Tunable knobs for the direct transform.

    k_count is the total number of grid points (half per sign); the grid is
    uniform with half-step offset so k = 0 is excluded. kappa_max = None
    means "derive from the potential": bound states satisfy
    kappa^2 <= max |V|, so the scan stops a little above that radius.
    """

    k_max: float = 60.0
    k_count: int = 2048
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    sample_step: float = 0.005
    profile_step: float = 0.005
    kappa_min: float = 1e-3
    kappa_max: float | None = None
    kappa_scan_points: int = 600
    det_rtol: float = 1e-7
    dip_threshold: float = 0.1
    backend: str | None = None


def symmetric_k_grid(config: DirectConfig) -> np.ndarray:
    """Uniform grid of k_count points on [-k_max, k_max] excluding 0."""
    half = config.k_count // 2
    dk = config.k_max / half
    kp = (np.arange(half) + 0.5) * dk
    return np.concatenate([-kp[::-1], kp])


def _kernel_inputs(potential: Potential, sample_step=0.005):
    """(mode, pxs, pvals) for the ODE kernel, preferring exact layers."""
    layered = potential.as_layers()
    if layered is not None:
        edges, layers = layered
        if layers.shape[0] == 0:
            return POT_LAYERS, np.array([0.0, potential.x_max]), layers
        return POT_LAYERS, edges, layers
    xs, vals = potential.sampled_on(sample_step)
    return POT_LINEAR, xs, vals


def jost_solution(potential: Potential, ks, x_nodes=None, config: DirectConfig | None = None):
    """Jost solutions at the requested k values.

    Returns (f, fp) of shape (nk, nx, n, n) with f(k, x) = e^{ikx} g(k, x)
    evaluated at x_nodes (default: just x = 0 and x = x_max).
    """
    config = config or DirectConfig()
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if x_nodes is None:
        x_nodes = np.array([0.0, potential.x_max])
    x_nodes = np.asarray(x_nodes, dtype=float)
    mode, pxs, pvals = _kernel_inputs(potential, config.sample_step)
    g, gp = integrate_jost(
        ks, x_nodes, mode, pxs, pvals,
        rtol=config.ode_rtol, atol=config.ode_atol, backend=config.backend,
    )
    phase = np.exp(1j * ks[:, None] * x_nodes[None, :])[..., None, None]
    f = phase * g
    fp = phase * (1j * ks[:, None, None, None] * g + gp)
    return f, fp


def jost_matrix_from_boundary(f0_ref, fp0_ref, bc: BoundaryCondition):
    """J(k) from Jost boundary values already evaluated at -conj(k)."""
    return (
        f0_ref.conj().swapaxes(-2, -1) @ bc.B
        - fp0_ref.conj().swapaxes(-2, -1) @ bc.A
    )


def jost_matrix(potential: Potential, bc: BoundaryCondition, ks, config: DirectConfig | None = None):
    """J(k) at arbitrary k with Im k >= 0 (real or positive-imaginary)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    f, fp = jost_solution(potential, -ks.conj(), config=config)
    return jost_matrix_from_boundary(f[:, 0], fp[:, 0], bc)


def scattering_from_jost(J_values, k_grid):
    """S(k) = -J(-k) J(k)^{-1} on a symmetric grid; J(-k) is the reversed row."""
    J = np.asarray(J_values)
    Jm = J[::-1]
    conds = np.linalg.cond(J)
    worst = int(np.argmax(conds))
    if conds[worst] > JOST_COND_MAX:
        raise SingularJost(
            f"J(k) condition number {conds[worst]:.3e} at k={k_grid[worst]:.6g}"
        )
    return -np.linalg.solve(J.swapaxes(-2, -1), Jm.swapaxes(-2, -1)).swapaxes(-2, -1)


def scattering_matrix(potential: Potential, bc: BoundaryCondition,
                      config: DirectConfig | None = None):
    """(k_grid, S values) on the symmetric grid, without bound-state search."""
    config = config or DirectConfig()
    k_grid = symmetric_k_grid(config)
    f, fp = jost_solution(potential, k_grid, config=config)
    J = jost_matrix_from_boundary(f[::-1, 0], fp[::-1, 0], bc)
    return k_grid, scattering_from_jost(J, k_grid)


def normalization_matrices(potential: Potential, located,
                           config: DirectConfig | None = None):
    """BoundState for every (kappa, multiplicity, P) triple from the scan."""
    out = []
    for kap, _mult, P in located:
        M = normalization_matrix(potential, kap, P, config=config)
        out.append(make_bound_state(kap, M))
    return out


def regular_solution(potential: Potential, bc: BoundaryCondition, ks, x_grid):
    """Solution with phi(k, 0) = A, phi'(k, 0) = B, on x_grid, per k.

    Returns (phi, phip) of shape (nk, nx, n, n); integrated with a standard
    adaptive IVP solver since no phase removal is needed from x = 0 outward.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    x_grid = np.asarray(x_grid, dtype=float)
    n = bc.n
    phi = np.empty((len(ks), len(x_grid), n, n), dtype=complex)
    phip = np.empty_like(phi)
    y0 = np.concatenate([bc.A.ravel(), bc.B.ravel()])
    for i, k in enumerate(ks):
        k2 = k * k

        def rhs(x, y):
            u = y[: n * n].reshape(n, n)
            v = y[n * n:].reshape(n, n)
            V = potential.evaluate(x)[0]
            return np.concatenate([v.ravel(), ((V - k2 * np.eye(n)) @ u).ravel()])

        sol = solve_ivp(
            rhs, (x_grid[0], x_grid[-1]), y0, t_eval=x_grid,
            method="DOP853", rtol=1e-10, atol=1e-12,
        )
        ys = sol.y.T.reshape(len(x_grid), 2, n, n)
        phi[i] = ys[:, 0]
        phip[i] = ys[:, 1]
    return phi, phip


def physical_solution(potential: Potential, bc: BoundaryCondition, k, x_grid,
                      config: DirectConfig | None = None):
    """Psi(k, x) = f(-k, x) + f(k, x) S(k) for one real k."""
    config = config or DirectConfig()
    k = float(k)
    x_nodes = np.asarray(x_grid, dtype=float)
    if x_nodes[-1] < potential.x_max:
        x_nodes = np.concatenate([x_nodes, [potential.x_max]])
    f, fp = jost_solution(potential, [k, -k], x_nodes=x_nodes, config=config)
    J_plus = jost_matrix_from_boundary(f[1, 0], fp[1, 0], bc)   # J(k) uses f(-k, 0)
    J_minus = jost_matrix_from_boundary(f[0, 0], fp[0, 0], bc)  # J(-k) uses f(k, 0)
    S = -np.linalg.solve(J_plus.T, J_minus.T).T
    nx = len(x_grid)
    psi = f[1, :nx] + f[0, :nx] @ S
    psip = fp[1, :nx] + fp[0, :nx] @ S
    return psi, psip, S


def _sigma_min_of_J(potential, bc, kappa, config):
    J = jost_matrix(potential, bc, [1j * kappa], config=config)[0]
    s = np.linalg.svd(J, compute_uv=False)
    return s[-1], s[0], J


def _default_kappa_max(potential: Potential, bc: BoundaryCondition) -> float:
    """Scan ceiling: covers potential-induced roots (kappa^2 <= max |V|) and
    boundary-induced ones, which for V = 0 solve det(B^H + kappa A^H) = 0."""
    xs, vals = potential.sampled_on(0.01)
    vmax = float(np.linalg.norm(vals, ord=2, axis=(1, 2)).max(initial=0.0))
    lam = eig(bc.B.conj().T, -bc.A.conj().T, right=False)
    lam = lam[np.isfinite(lam)]
    kap_bc = float(np.max(lam.real, initial=0.0))
    return 1.25 * (np.sqrt(vmax) + kap_bc) + 0.5


def locate_bound_states(potential: Potential, bc: BoundaryCondition,
                        config: DirectConfig | None = None):
    """Bound-state positions kappa_j and kernel projectors P_j of J(i kappa_j)^H.

    Scans sigma_min(J(i kappa)) / sigma_max on a kappa grid, refines every dip
    below dip_threshold by bounded minimization, and keeps roots whose refined
    relative sigma_min falls below det_rtol. Returns a list of
    (kappa, multiplicity, P) sorted by kappa.
    """
    config = config or DirectConfig()
    kmax = config.kappa_max if config.kappa_max is not None else _default_kappa_max(potential, bc)
    if kmax <= config.kappa_min:
        return []
    kappas = np.linspace(config.kappa_min, kmax, config.kappa_scan_points)
    J_scan = jost_matrix(potential, bc, 1j * kappas, config=config)
    svals = np.linalg.svd(J_scan, compute_uv=False)
    # normalize sigma_min against the largest singular value seen anywhere on
    # the scan: a per-k ratio would be identically 1 in the scalar case
    scale = float(svals[:, 0].max())
    ratio = svals[:, -1] / scale

    if ratio[-1] < config.dip_threshold and ratio[-1] < ratio[-2]:
        raise ScanInconclusive(
            f"sigma_min(J) still decreasing at scan ceiling kappa={kmax:.4g}"
        )

    candidates = []
    for i in range(1, len(kappas) - 1):
        if ratio[i] <= ratio[i - 1] and ratio[i] <= ratio[i + 1] and ratio[i] < config.dip_threshold:
            candidates.append(i)
    if ratio[0] < config.dip_threshold and ratio[0] < ratio[1]:
        candidates.insert(0, 0)

    roots = []
    for i in candidates:
        lo = kappas[max(i - 1, 0)]
        hi = kappas[min(i + 1, len(kappas) - 1)]
        res = minimize_scalar(
            lambda kap: _sigma_min_of_J(potential, bc, kap, config)[0],
            bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-9},
        )
        # sigma_min has a |.|-shaped minimum at a simple root, which stalls the
        # bounded search; polish with parabola vertices of sigma_min^2 instead
        kap = float(res.x)
        delta = max(1e-5 * (hi - lo), 1e-9)
        for _ in range(3):
            trip = np.array([kap - delta, kap, kap + delta])
            vals = np.array([
                _sigma_min_of_J(potential, bc, t, config)[0] ** 2 for t in trip
            ])
            denom = vals[0] - 2 * vals[1] + vals[2]
            if denom <= 0:
                break
            shift = 0.5 * delta * (vals[0] - vals[2]) / denom
            kap = kap + float(np.clip(shift, -delta, delta))
            delta *= 0.1
        smin, _, J = _sigma_min_of_J(potential, bc, kap, config)
        if smin < config.det_rtol * scale:
            roots.append((kap, J, scale))

    # merge refinements that converged to the same root
    roots.sort(key=lambda r: r[0])
    merged = []
    for kap, J, smax in roots:
        if merged and abs(kap - merged[-1][0]) < 1e-8 * max(1.0, kap):
            continue
        if merged and abs(kap - merged[-1][0]) < 1e-4 * max(1.0, kap):
            raise ClusterUnresolved(
                f"bound states at kappa={merged[-1][0]:.8g} and {kap:.8g} too close to separate"
            )
        merged.append((kap, J, smax))

    out = []
    for kap, J, sc in merged:
        U, s, _ = np.linalg.svd(J)
        mult = int(np.sum(s < config.det_rtol * sc))
        mult = max(mult, 1)
        U0 = U[:, len(s) - mult:]
        P = U0 @ U0.conj().T
        out.append((kap, mult, P))
    return out


def normalization_matrix(potential: Potential, kappa: float, P: np.ndarray,
                         config: DirectConfig | None = None):
    """M = B^{-1/2} P with B = (I - P) + P A P, A = int_0^inf f(i kappa)^H f(i kappa).

    The integral over [0, x_max] uses a dense profile of the phase-removed
    solution; past x_max the Jost solution is exactly e^{-kappa x} I, so the
    tail contributes e^{-2 kappa x_max} / (2 kappa) times the identity.
    """
    config = config or DirectConfig()
    n = P.shape[0]
    xs = np.arange(0.0, potential.x_max + config.profile_step / 2, config.profile_step)
    f, _ = jost_solution(potential, [1j * kappa], x_nodes=xs, config=config)
    prof = f[0]
    integrand = prof.conj().swapaxes(-2, -1) @ prof
    A = simpson(integrand, x=xs, axis=0)
    A = A + (np.exp(-2 * kappa * xs[-1]) / (2 * kappa)) * np.eye(n)
    A = 0.5 * (A + A.conj().T)
    B = (np.eye(n) - P) + P @ A @ P
    B = 0.5 * (B + B.conj().T)
    lam, Q = np.linalg.eigh(B)
    if lam.min() <= 1e-12:
        raise NotPositive(f"normalization operator has eigenvalue {lam.min():.3e}")
    Binvhalf = (Q / np.sqrt(lam)) @ Q.conj().T
    M = Binvhalf @ P
    return 0.5 * (M + M.conj().T)


def bound_state_profiles(potential: Potential, states, x_grid,
                         config: DirectConfig | None = None):
    """Normalized bound-state wavefunctions Psi_j(x) = f(i kappa_j, x) M_j."""
    config = config or DirectConfig()
    out = []
    for b in states:
        f, _ = jost_solution(potential, [1j * b.kappa], x_nodes=x_grid, config=config)
        out.append(f[0] @ b.M)
    return out


def solve_direct(potential: Potential, bc: BoundaryCondition,
                 config: DirectConfig | None = None,
                 keep_profiles: bool = False):
    """Full direct transform: (ScatteringData, JostBundle)."""
    config = config or DirectConfig()
    k_grid = symmetric_k_grid(config)
    x_nodes = np.array([0.0, potential.x_max])
    if keep_profiles:
        x_nodes = np.arange(0.0, potential.x_max + config.profile_step / 2, config.profile_step)
        if x_nodes[-1] < potential.x_max:
            x_nodes = np.concatenate([x_nodes, [potential.x_max]])
    f, fp = jost_solution(potential, k_grid, x_nodes=x_nodes, config=config)
    f0, fp0 = f[:, 0], fp[:, 0]
    # real grid symmetric about 0: values at -conj(k) = -k sit at the mirrored row
    J = jost_matrix_from_boundary(f0[::-1], fp0[::-1], bc)
    S = scattering_from_jost(J, k_grid)

    located = locate_bound_states(potential, bc, config=config)
    states = []
    for kap, mult, P in located:
        M = normalization_matrix(potential, kap, P, config=config)
        states.append(make_bound_state(kap, M))

    data = ScatteringData(
        k_grid=k_grid, S_values=S, bound_states=tuple(states), n=bc.n
    )
    bundle = JostBundle(
        k_grid=k_grid, f0=f0, fp0=fp0, J_values=J,
        profile_x=x_nodes if keep_profiles else None,
        profiles=f if keep_profiles else None,
    )
    return data, bundle


def with_overrides(config: DirectConfig | None = None, **kwargs) -> DirectConfig:
    """Copy of the config with selected fields replaced."""
    return replace(config or DirectConfig(), **kwargs)

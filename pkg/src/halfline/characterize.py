"""Admissibility checks for scattering data.

Verdicts come in three flavors: PASS, FAIL, and INCONCLUSIVE (the numerics
cannot separate the two). The full battery:

* symmetry/unitarity of S on the grid;
* integrability of (1 + y) |F_s'(y)|;
* the kernel count of the F_s convolution operator, which must equal the
  total bound-state multiplicity;
* trivial kernel of the full-F Marchenko operator at x = 0;
* consistency J(-k) + S(k) J(k) = 0 for a Jost matrix reconstructed from the
  Marchenko kernel (or supplied directly);
* annihilation of each normalization matrix by its Jost matrix value;
* the phase-counting identity linking the winding of arg det S to the number
  of bound states and the boundary invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PhaseUnwrapFailure, ScatteringError, TailNotSettled
from .inverse import (
    InverseConfig,
    assemble_F,
    estimate_limit,
    fourier_Fs,
    invert,
    reconstruct_jost,
    tail_fit,
)
from .types import ScatteringData

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    value: float
    threshold: float
    detail: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "status": self.status,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class CharacterizationReport:
    checks: tuple
    extras: dict = field(default_factory=dict)

    @property
    def status(self):
        if any(c.status == FAIL for c in self.checks):
            return FAIL
        if any(c.status == INCONCLUSIVE for c in self.checks):
            return INCONCLUSIVE
        return PASS

    def to_dict(self):
        return {
            "status": self.status,
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass(frozen=True)
class CharacterizeConfig:
    unitarity_tol: float = 1e-8
    kernel_h: float = 0.05
    kernel_y_max: float = 24.0
    null_rel_tol: float = 1e-4
    clear_rel_tol: float = 1e-2
    jost_tol: float = 2e-3
    levinson_tol: float = 0.05 * np.pi
    eig_snap_tol: float = 0.3
    zero_extrapolation_points: int = 3


def check_unitarity_symmetry(data: ScatteringData, config: CharacterizeConfig | None = None):
    """max deviation of S(-k) = S(k)^H and S(k) S(k)^H = I on the grid."""
    config = config or CharacterizeConfig()
    S = data.S_values
    Sm = data.S_at_minus_k()
    sym = np.abs(Sm - S.conj().swapaxes(-2, -1)).max()
    eye = np.eye(data.n)
    uni = np.abs(S @ S.conj().swapaxes(-2, -1) - eye).max()
    value = float(max(sym, uni))
    status = PASS if value <= config.unitarity_tol else FAIL
    return CheckResult(
        "symmetry_unitarity", status, value, config.unitarity_tol,
        f"symmetry {sym:.3e}, unitarity {uni:.3e}",
    )


def _marchenko_lattice(data, config, icfg):
    h = config.kernel_h
    count = int(round(config.kernel_y_max / h)) + 1
    if count % 2 == 0:
        count += 1
    ys = np.arange(count) * h
    S_inf = estimate_limit(data, icfg)
    C = tail_fit(data, S_inf, icfg)
    Fs = fourier_Fs(data, S_inf, C, ys, icfg)
    return ys, S_inf, C, Fs


def _convolution_operator(F_half, h, n):
    """I + the discretized operator X -> X + int_0^inf X(z) F(z + y) dz.

    F_half holds F on the lattice [0, y_max]; arguments beyond are zero.
    Simpson weights (trapezoid's O(h^2) error is visible against the
    1e-4 singular-value threshold).
    """
    count = len(F_half)
    idx = np.arange(count)
    F_ext = np.zeros((2 * count - 1, n, n), dtype=complex)
    F_ext[:count] = F_half
    w = np.full(count, h / 3.0)
    w[1:-1:2] = 4.0 * h / 3.0
    w[2:-1:2] = 2.0 * h / 3.0
    blocks = F_ext[idx[:, None] + idx[None, :]] * w[:, None, None, None]
    big = blocks.transpose(0, 2, 1, 3).reshape(count * n, count * n)
    big += np.eye(count * n)
    return big


def count_kernel_dimension(operator, null_rel_tol, clear_rel_tol):
    """(count, status, gap detail) from the singular spectrum of `operator`.

    Values below null_rel_tol (relative to the largest) count as kernel
    directions; the count is trustworthy only when the next singular value
    clears clear_rel_tol, otherwise INCONCLUSIVE.
    """
    s = np.linalg.svd(operator, compute_uv=False)
    rel = s / s[0]
    count = int(np.sum(rel < null_rel_tol))
    nxt = rel[::-1][count] if count < len(rel) else np.inf
    status = PASS if nxt > clear_rel_tol else INCONCLUSIVE
    return count, status, float(nxt)


def check_kernel_count(data: ScatteringData, config: CharacterizeConfig | None = None,
                       icfg: InverseConfig | None = None):
    """Kernel dimension of I + F_s convolution vs total bound multiplicity."""
    config = config or CharacterizeConfig()
    icfg = icfg or InverseConfig()
    ys, S_inf, C, Fs = _marchenko_lattice(data, config, icfg)
    big = _convolution_operator(Fs, config.kernel_h, data.n)
    count, gap_status, nxt = count_kernel_dimension(
        big, config.null_rel_tol, config.clear_rel_tol
    )
    want = data.total_multiplicity
    if gap_status == INCONCLUSIVE:
        status = INCONCLUSIVE
    else:
        status = PASS if count == want else FAIL
    return CheckResult(
        "kernel_count", status, float(count), float(want),
        f"found {count} kernel directions, expected {want}; next relative "
        f"singular value {nxt:.3e}",
    )


def check_marchenko_uniqueness(data: ScatteringData,
                               config: CharacterizeConfig | None = None,
                               icfg: InverseConfig | None = None):
    """The full-F operator at x = 0 must have trivial kernel."""
    config = config or CharacterizeConfig()
    icfg = icfg or InverseConfig()
    ys, S_inf, C, Fs = _marchenko_lattice(data, config, icfg)
    F = assemble_F(Fs, data.bound_states, ys)
    big = _convolution_operator(F, config.kernel_h, data.n)
    s = np.linalg.svd(big, compute_uv=False)
    rel = float(s[-1] / s[0])
    if rel >= config.clear_rel_tol:
        status = PASS
    elif rel < config.null_rel_tol:
        status = FAIL
    else:
        status = INCONCLUSIVE
    return CheckResult(
        "marchenko_uniqueness", status, rel, config.clear_rel_tol,
        f"smallest relative singular value {rel:.3e}",
    )


def check_Fs_regularity(data: ScatteringData, config: CharacterizeConfig | None = None,
                        icfg: InverseConfig | None = None):
    """(1 + y) |F_s'(y)| must be integrable: its tail on the lattice must be
    a small fraction of the whole."""
    config = config or CharacterizeConfig()
    icfg = icfg or InverseConfig()
    ys, S_inf, C, Fs = _marchenko_lattice(data, config, icfg)
    d = np.gradient(Fs, ys, axis=0)
    weight = (1.0 + ys) * np.linalg.norm(d, ord=2, axis=(1, 2))
    total = np.trapezoid(weight, ys)
    half = np.trapezoid(weight[ys >= ys[-1] / 2], ys[ys >= ys[-1] / 2])
    frac = float(half / total) if total > 0 else 0.0
    status = PASS if frac < 0.05 else INCONCLUSIVE
    return CheckResult(
        "Fs_regularity", status, float(total), 0.05,
        f"integral {total:.4e}; tail fraction {frac:.3e}",
    )


def check_jost_consistency(data: ScatteringData, J_values=None, J_at_minus=None,
                           config: CharacterizeConfig | None = None,
                           icfg: InverseConfig | None = None):
    """Residual of J(-k) + S(k) J(k) = 0 on the grid.

    If no Jost matrix is supplied, the scattering data is inverted and J is
    rebuilt from the Marchenko kernel and the recovered boundary.
    """
    config = config or CharacterizeConfig()
    if J_values is None:
        icfg = icfg or InverseConfig()
        res = invert(data, icfg)
        h = res.kernel.x_grid[1] - res.kernel.x_grid[0]
        ks = data.k_grid
        f0, fp0 = reconstruct_jost(res.kernel, -np.asarray(ks, dtype=complex).conj(), h)
        bc = res.boundary
        J_values = (f0.conj().swapaxes(-2, -1) @ bc.B
                    - fp0.conj().swapaxes(-2, -1) @ bc.A)
        J_at_minus = J_values[::-1]
    scale = max(np.abs(J_values).max(), 1.0)
    resid = np.abs(J_at_minus + data.S_values @ J_values).max() / scale
    status = PASS if resid <= config.jost_tol else FAIL
    return CheckResult(
        "jost_consistency", status, float(resid), config.jost_tol,
        "relative residual of J(-k) + S(k) J(k)",
    )


def check_bound_state_annihilation(data: ScatteringData, J_at_ikappa=None,
                                   config: CharacterizeConfig | None = None,
                                   icfg: InverseConfig | None = None):
    """J(i kappa_j)^H M_j = 0 for every bound state."""
    config = config or CharacterizeConfig()
    if not data.bound_states:
        return CheckResult("bound_state_annihilation", PASS, 0.0,
                           config.jost_tol, "no bound states")
    if J_at_ikappa is None:
        icfg = icfg or InverseConfig()
        res = invert(data, icfg)
        h = res.kernel.x_grid[1] - res.kernel.x_grid[0]
        kappas = np.array([b.kappa for b in data.bound_states])
        f0, fp0 = reconstruct_jost(res.kernel, 1j * kappas, h)
        bc = res.boundary
        J_at_ikappa = (f0.conj().swapaxes(-2, -1) @ bc.B
                       - fp0.conj().swapaxes(-2, -1) @ bc.A)
    worst = 0.0
    for J, b in zip(J_at_ikappa, data.bound_states):
        r = np.abs(J.conj().T @ b.M).max() / max(np.abs(J).max(), 1.0)
        worst = max(worst, float(r))
    status = PASS if worst <= config.jost_tol else FAIL
    return CheckResult(
        "bound_state_annihilation", status, worst, config.jost_tol,
        "max relative residual of J(i kappa)^H M",
    )


def levinson_check(data: ScatteringData, config: CharacterizeConfig | None = None,
                   icfg: InverseConfig | None = None):
    """Winding of arg det S against the spectral count.

    The drop of the unwrapped phase of det S from k = 0+ to the top of the
    grid must equal pi (2 N + mu + n_D - n), with N the total bound-state
    multiplicity, mu the multiplicity of eigenvalue +1 of S(0+), and n_D the
    multiplicity of eigenvalue -1 of the high-energy limit.
    """
    config = config or CharacterizeConfig()
    icfg = icfg or InverseConfig()
    k = data.k_grid
    pos = k > 0
    kp = k[pos]
    dets = np.linalg.det(data.S_values[pos])
    if np.abs(np.abs(dets) - 1.0).max() > 1e-3:
        return CheckResult(
            "levinson", INCONCLUSIVE, float(np.abs(np.abs(dets) - 1.0).max()), 1e-3,
            "det S leaves the unit circle; phase ill-defined",
        )
    ang = np.angle(dets)
    steps = np.diff(ang)
    wrapped = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.abs(wrapped).max() > 0.5 * np.pi:
        raise PhaseUnwrapFailure(
            f"phase step {np.abs(wrapped).max():.3f} rad between grid nodes; refine the k grid"
        )
    theta = np.concatenate([[ang[0]], ang[0] + np.cumsum(wrapped)])

    # quadratic extrapolation of both the phase and S itself to k = 0+
    m = config.zero_extrapolation_points
    c = np.polyfit(kp[:m], theta[:m], 2)
    theta0 = float(np.polyval(c, 0.0))
    S0 = np.zeros((data.n, data.n), dtype=complex)
    for a in range(data.n):
        for b in range(data.n):
            cc = np.polyfit(kp[:m], data.S_values[pos][:m, a, b], 2)
            S0[a, b] = np.polyval(cc, 0.0)
    S0 = 0.5 * (S0 + S0.conj().T)
    lam0 = np.linalg.eigvalsh(S0)
    if np.abs(np.abs(lam0) - 1.0).max() > config.eig_snap_tol:
        return CheckResult(
            "levinson", INCONCLUSIVE, float(np.abs(np.abs(lam0) - 1.0).max()),
            config.eig_snap_tol, "S(0+) eigenvalues not near +-1",
        )
    mu = int(np.sum(lam0 > 0))

    S_inf = estimate_limit(data, icfg)
    lam_inf = np.linalg.eigvalsh(S_inf)
    n_D = int(np.sum(lam_inf < 0))

    # the phase settles like theta_inf + a/k; fit the outer quarter of the
    # grid so the finite top of the grid does not bias the winding
    tail = kp >= 0.75 * kp[-1]
    basis = np.stack([np.ones(tail.sum()), 1.0 / kp[tail]], axis=1)
    sol, *_ = np.linalg.lstsq(basis, theta[tail], rcond=None)
    theta_inf = float(sol[0])

    lhs = theta0 - theta_inf
    rhs = np.pi * (2 * data.total_multiplicity + mu + n_D - data.n)
    dev = float(abs(lhs - rhs))
    status = PASS if dev <= config.levinson_tol else FAIL
    return CheckResult(
        "levinson", status, dev, config.levinson_tol,
        f"lhs {lhs:.6f}, rhs {rhs:.6f} (N={data.total_multiplicity}, mu={mu}, n_D={n_D})",
    )


def _guarded(name, fn, *args):
    """Degrade a single check to INCONCLUSIVE when the numerics give up.

    TailNotSettled propagates: it means the k grid itself is inadequate, which
    callers must surface rather than fold into a verdict.
    """
    try:
        return fn(*args)
    except TailNotSettled:
        raise
    except ScatteringError as exc:
        return CheckResult(name, INCONCLUSIVE, float("nan"), 0.0,
                           f"check aborted: {exc}")


def marchenko_class_report(data: ScatteringData,
                           config: CharacterizeConfig | None = None,
                           icfg: InverseConfig | None = None) -> CharacterizationReport:
    """Run the full battery on the supplied scattering data."""
    config = config or CharacterizeConfig()
    icfg = icfg or InverseConfig()
    checks = [check_unitarity_symmetry(data, config)]
    checks.append(_guarded("Fs_regularity", check_Fs_regularity, data, config, icfg))
    checks.append(_guarded("kernel_count", check_kernel_count, data, config, icfg))
    checks.append(_guarded("marchenko_uniqueness", check_marchenko_uniqueness,
                           data, config, icfg))

    inversion_failed = None
    try:
        res = invert(data, icfg)
    except TailNotSettled:
        raise
    except ScatteringError as exc:  # inversion itself can reject the data
        inversion_failed = exc
        res = None
    if res is None:
        checks.append(CheckResult(
            "jost_consistency", INCONCLUSIVE, np.nan, config.jost_tol,
            f"inversion failed: {inversion_failed}"))
        checks.append(CheckResult(
            "bound_state_annihilation", INCONCLUSIVE, np.nan, config.jost_tol,
            f"inversion failed: {inversion_failed}"))
    else:
        h = res.kernel.x_grid[1] - res.kernel.x_grid[0]
        ks = np.asarray(data.k_grid, dtype=complex)
        f0, fp0 = reconstruct_jost(res.kernel, -ks.conj(), h)
        bc = res.boundary
        J = (f0.conj().swapaxes(-2, -1) @ bc.B
             - fp0.conj().swapaxes(-2, -1) @ bc.A)
        checks.append(check_jost_consistency(data, J, J[::-1], config))
        if data.bound_states:
            kappas = np.array([b.kappa for b in data.bound_states])
            fb, fpb = reconstruct_jost(res.kernel, 1j * kappas, h)
            Jb = (fb.conj().swapaxes(-2, -1) @ bc.B
                  - fpb.conj().swapaxes(-2, -1) @ bc.A)
            checks.append(check_bound_state_annihilation(data, Jb, config))
        else:
            checks.append(check_bound_state_annihilation(data, None, config))
    checks.append(_guarded("levinson", levinson_check, data, config, icfg))
    return CharacterizationReport(checks=tuple(checks))

"""Domain types for half-line matrix Schrodinger scattering.

All types are immutable after validation and every operation here is pure,
so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AsymmetricGrid,
    BadBoundState,
    DimensionMismatch,
    NonFiniteSample,
    NotHermitian,
    RankDeficient,
    SelfadjointnessViolated,
)

# Relative singular-value cutoff used for every rank/kernel decision.
RANK_RTOL = 1e-9
# Max-entry tolerance for the selfadjointness relation -B^H A + A^H B = 0.
SELFADJOINT_TOL = 1e-12
HERMITIAN_TOL = 1e-12


def _as_complex_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def _rank(M, svals_of=None):
    """Rank via singular values above RANK_RTOL times the largest one.

    `svals_of` optionally supplies the matrix whose largest singular value
    sets the scale (the stacked [A; B] for boundary classification).
    """
    s = np.linalg.svd(M, compute_uv=False)
    ref = s
    if svals_of is not None:
        ref = np.linalg.svd(svals_of, compute_uv=False)
    top = ref.max(initial=0.0)
    if top == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * top))


@dataclass(frozen=True)
class BoundaryCondition:
    """Selfadjoint boundary pair (A, B), unique modulo right factor T."""

    A: np.ndarray
    B: np.ndarray
    n: int

    def stacked(self):
        return np.vstack([self.A, self.B])

    def scaled(self, c):
        """Equivalent pair (A c, B c) for an invertible scalar or matrix c."""
        if np.isscalar(c):
            return BoundaryCondition(self.A * c, self.B * c, self.n)
        c = np.asarray(c, dtype=complex)
        return BoundaryCondition(self.A @ c, self.B @ c, self.n)

    def to_dict(self):
        return {
            "A_re": self.A.real.tolist(),
            "A_im": self.A.imag.tolist(),
            "B_re": self.B.real.tolist(),
            "B_im": self.B.imag.tolist(),
        }

    @staticmethod
    def from_dict(d):
        A = np.array(d["A_re"], dtype=float) + 1j * np.array(d["A_im"], dtype=float)
        B = np.array(d["B_re"], dtype=float) + 1j * np.array(d["B_im"], dtype=float)
        return validate_boundary(A, B)


def validate_boundary(A, B) -> BoundaryCondition:
    """Check the selfadjointness and full-rank conditions on (A, B)."""
    A = _as_complex_matrix(A, "A")
    B = _as_complex_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"A {A.shape} and B {B.shape} differ in size")
    n = A.shape[0]
    sa = -B.conj().T @ A + A.conj().T @ B
    dev = np.abs(sa).max()
    # relative to the size of the pair: (cA, cB) must stay valid for any c
    scale = max(1.0, np.abs(A).max() * np.abs(B).max())
    if dev > SELFADJOINT_TOL * scale:
        raise SelfadjointnessViolated(
            f"-B^H A + A^H B has max entry {dev:.3e} > {SELFADJOINT_TOL * scale:.1e}"
        )
    gram = A.conj().T @ A + B.conj().T @ B
    lam_min = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T)).min()
    if lam_min <= 1e-12:
        raise RankDeficient(
            f"A^H A + B^H B smallest eigenvalue {lam_min:.3e} is not positive"
        )
    A = A.copy()
    B = B.copy()
    A.setflags(write=False)
    B.setflags(write=False)
    return BoundaryCondition(A, B, n)


def _column_space_projector(M):
    q, r = np.linalg.qr(M)
    # drop columns of q beyond the numerical rank of M
    s = np.linalg.svd(M, compute_uv=False)
    r_eff = int(np.sum(s > RANK_RTOL * s.max(initial=0.0)))
    q = q[:, :r_eff]
    return q @ q.conj().T


def boundary_equivalent(bc1: BoundaryCondition, bc2: BoundaryCondition, tol=1e-9) -> bool:
    """True iff [A1;B1] and [A2;B2] span the same column space."""
    if bc1.n != bc2.n:
        raise DimensionMismatch(f"sizes differ: {bc1.n} vs {bc2.n}")
    p1 = _column_space_projector(bc1.stacked())
    p2 = _column_space_projector(bc2.stacked())
    return bool(np.linalg.norm(p1 - p2) <= tol)


def classify_boundary(bc: BoundaryCondition):
    """Return (n_D, n_N, n_M) from rank counts of A and B."""
    stacked = bc.stacked()
    n_D = bc.n - _rank(bc.A, svals_of=stacked)
    n_N = bc.n - _rank(bc.B, svals_of=stacked)
    return n_D, n_N, bc.n - n_D - n_N


@dataclass(frozen=True)
class Potential:
    """Hermitian n x n potential on [0, x_max], sampled or closed form.

    Closed forms understood everywhere in the package:
      zero        {}
      step        {"boundaries": [x1 .. xm], "layers": [V1 .. Vm]}  (V=0 past xm)
      exponential {"amplitude": C, "rate": a}   V(x) = C exp(-a x)
    """

    n: int
    x_max: float
    xs: np.ndarray | None = None
    values: np.ndarray | None = None
    closed_form: dict | None = None
    first_moment: float = field(default=0.0, compare=False)

    def evaluate(self, x):
        """V at the points `x` (shape (..., n, n)); zero beyond support."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape + (self.n, self.n), dtype=complex)
        if self.closed_form is not None:
            name = self.closed_form["name"]
            p = self.closed_form.get("params", {})
            if name == "zero":
                pass
            elif name == "step":
                edges = [0.0] + list(p["boundaries"])
                layers = [np.asarray(v, dtype=complex) for v in p["layers"]]
                for i, V in enumerate(layers):
                    mask = (x >= edges[i]) & (x < edges[i + 1])
                    out[mask] = V
            elif name == "exponential":
                C = np.asarray(p["amplitude"], dtype=complex)
                a = float(p["rate"])
                out[:] = C * np.exp(-a * x)[..., None, None]
                out[x > self.x_max] = 0.0
            else:
                raise ValueError(f"unknown closed form {name!r}")
            return out
        idx = np.searchsorted(self.xs, x, side="right") - 1
        inside = (x >= self.xs[0]) & (x <= self.xs[-1])
        idx = np.clip(idx, 0, len(self.xs) - 2)
        x0 = self.xs[idx]
        x1 = self.xs[idx + 1]
        w = np.where(x1 > x0, (x - x0) / np.where(x1 > x0, x1 - x0, 1.0), 0.0)
        vals = (1 - w)[..., None, None] * self.values[idx] + w[..., None, None] * self.values[idx + 1]
        out[inside] = vals[inside]
        return out

    def as_layers(self):
        """(edges, layer values) when piecewise constant, else None."""
        if self.closed_form is None:
            return None
        name = self.closed_form["name"]
        if name == "zero":
            return np.array([0.0]), np.zeros((0, self.n, self.n), dtype=complex)
        if name == "step":
            p = self.closed_form["params"]
            edges = np.concatenate([[0.0], np.asarray(p["boundaries"], dtype=float)])
            layers = np.array([np.asarray(v, dtype=complex) for v in p["layers"]])
            return edges, layers
        return None

    def sampled_on(self, step=0.005):
        """Sampled (xs, values) representation for the ODE kernel."""
        if self.xs is not None:
            return self.xs, self.values
        xs = np.arange(0.0, self.x_max + step / 2, step)
        return xs, self.evaluate(xs)

    def to_dict(self):
        d = {"n": self.n, "x_max": self.x_max}
        if self.closed_form is not None:
            d["closed_form"] = {
                "name": self.closed_form["name"],
                "params": _jsonify(self.closed_form.get("params", {})),
            }
        else:
            d["samples"] = [
                {"x": float(x), "re": V.real.tolist(), "im": V.imag.tolist()}
                for x, V in zip(self.xs, self.values)
            ]
        return d

    @staticmethod
    def from_dict(d):
        n = int(d["n"])
        x_max = float(d["x_max"])
        if "closed_form" in d:
            cf = d["closed_form"]
            params = dict(cf.get("params", {}))
            for key in ("layers",):
                if key in params:
                    params[key] = [_matrix_from_reim(m) for m in params[key]]
            if "amplitude" in params:
                params["amplitude"] = _matrix_from_reim(params["amplitude"])
            return make_potential(n=n, x_max=x_max, closed_form={"name": cf["name"], "params": params})
        xs = np.array([s["x"] for s in d["samples"]], dtype=float)
        vals = np.array(
            [np.array(s["re"], dtype=float) + 1j * np.array(s["im"], dtype=float) for s in d["samples"]]
        )
        return validate_potential(xs, vals, x_max=x_max)


def _matrix_from_reim(m):
    if isinstance(m, dict):
        return np.array(m["re"], dtype=float) + 1j * np.array(m.get("im", np.zeros_like(m["re"])), dtype=float)
    return np.asarray(m, dtype=complex)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def validate_potential(xs, values, x_max=None) -> Potential:
    """Validate sampled potential data and report its discretized first moment."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=complex)
    if values.ndim == 1:
        values = values.reshape(-1, 1, 1)
    if xs.ndim != 1 or values.shape[0] != xs.shape[0]:
        raise DimensionMismatch("sample count mismatch between xs and values")
    if values.shape[1] != values.shape[2]:
        raise DimensionMismatch("potential samples must be square matrices")
    if np.any(np.diff(xs) <= 0):
        raise DimensionMismatch("x samples must be strictly ascending")
    if not np.all(np.isfinite(values)):
        raise NonFiniteSample("potential contains non-finite entries")
    herm_dev = np.abs(values - values.conj().transpose(0, 2, 1)).max()
    if herm_dev > HERMITIAN_TOL:
        raise NotHermitian(f"max hermiticity deviation {herm_dev:.3e}")
    sym = 0.5 * (values + values.conj().transpose(0, 2, 1))
    norms = np.linalg.norm(sym, ord=2, axis=(1, 2))
    moment = float(np.trapezoid((1.0 + xs) * norms, xs))
    if x_max is None:
        x_max = float(xs[-1])
    sym.setflags(write=False)
    xs = xs.copy()
    xs.setflags(write=False)
    n = values.shape[1]
    return Potential(n=n, x_max=float(x_max), xs=xs, values=sym, first_moment=moment)


def make_potential(n, x_max, closed_form) -> Potential:
    """Build a closed-form Potential, checking layer hermiticity."""
    params = closed_form.get("params", {})
    if closed_form["name"] == "step":
        for V in params["layers"]:
            V = np.asarray(V, dtype=complex)
            if np.abs(V - V.conj().T).max() > HERMITIAN_TOL:
                raise NotHermitian("step layer is not hermitian")
        if np.any(np.diff(np.concatenate([[0.0], params["boundaries"]])) <= 0):
            raise DimensionMismatch("layer boundaries must be ascending from 0")
    if closed_form["name"] == "exponential":
        C = np.asarray(params["amplitude"], dtype=complex)
        if np.abs(C - C.conj().T).max() > HERMITIAN_TOL:
            raise NotHermitian("exponential amplitude is not hermitian")
    pot = Potential(n=n, x_max=float(x_max), closed_form=closed_form)
    xs = np.linspace(0, x_max, 2001)
    norms = np.linalg.norm(pot.evaluate(xs), ord=2, axis=(1, 2))
    moment = float(np.trapezoid((1.0 + xs) * norms, xs))
    return Potential(n=n, x_max=float(x_max), closed_form=closed_form, first_moment=moment)


@dataclass(frozen=True)
class BoundState:
    """Bound state at k = i kappa with normalization matrix M of rank m."""

    kappa: float
    M: np.ndarray
    multiplicity: int

    def to_dict(self):
        return {"kappa": self.kappa, "M_re": self.M.real.tolist(), "M_im": self.M.imag.tolist()}

    @staticmethod
    def from_dict(d):
        M = np.array(d["M_re"], dtype=float) + 1j * np.array(d["M_im"], dtype=float)
        return make_bound_state(float(d["kappa"]), M)


def make_bound_state(kappa, M) -> BoundState:
    M = _as_complex_matrix(M, "M")
    if not kappa > 0:
        raise BadBoundState(f"kappa must be positive, got {kappa}")
    if np.abs(M - M.conj().T).max() > 1e-10 * max(1.0, np.abs(M).max()):
        raise BadBoundState("normalization matrix is not hermitian")
    lam = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    if lam.min() < -1e-12 * max(1.0, lam.max()):
        raise BadBoundState(f"normalization matrix has negative eigenvalue {lam.min():.3e}")
    mult = _rank(M)
    if mult < 1:
        raise BadBoundState("normalization matrix has rank zero")
    M = M.copy()
    M.setflags(write=False)
    return BoundState(kappa=float(kappa), M=M, multiplicity=mult)


@dataclass(frozen=True)
class ScatteringData:
    """Scattering matrix samples on a symmetric k-grid plus bound states."""

    k_grid: np.ndarray
    S_values: np.ndarray
    bound_states: tuple
    n: int

    @property
    def total_multiplicity(self):
        return sum(b.multiplicity for b in self.bound_states)

    def S_at_minus_k(self):
        """S reordered so entry j holds S(-k_j)."""
        return self.S_values[::-1]

    def to_dict(self):
        return {
            "k_grid": self.k_grid.tolist(),
            "S": [{"re": S.real.tolist(), "im": S.imag.tolist()} for S in self.S_values],
            "bound_states": [b.to_dict() for b in self.bound_states],
        }

    @staticmethod
    def from_dict(d):
        k = np.array(d["k_grid"], dtype=float)
        S = np.array(
            [np.array(s["re"], dtype=float) + 1j * np.array(s["im"], dtype=float) for s in d["S"]]
        )
        bs = [BoundState.from_dict(b) for b in d.get("bound_states", [])]
        return validate_scattering_data(k, S, bs)


def validate_scattering_data(k_grid, S_values, bound_states=()) -> ScatteringData:
    """Shape, grid-symmetry, and bound-state sanity; deep checks live in the
    characterizer."""
    k_grid = np.asarray(k_grid, dtype=float)
    S_values = np.asarray(S_values, dtype=complex)
    if S_values.ndim == 1:
        S_values = S_values.reshape(-1, 1, 1)
    if S_values.shape[0] != k_grid.shape[0]:
        raise DimensionMismatch("k grid and S sample counts differ")
    if S_values.shape[1] != S_values.shape[2]:
        raise DimensionMismatch("S samples must be square")
    if np.any(np.diff(k_grid) <= 0):
        raise AsymmetricGrid("k grid must be strictly ascending")
    if np.abs(k_grid + k_grid[::-1]).max() > 1e-9 * max(1.0, np.abs(k_grid).max()):
        raise AsymmetricGrid("k grid is not symmetric about 0")
    if np.any(k_grid == 0.0):
        raise AsymmetricGrid("k grid must exclude 0")
    states = []
    kappas = []
    for b in bound_states:
        if not isinstance(b, BoundState):
            b = make_bound_state(b[0], b[1])
        if b.M.shape[0] != S_values.shape[1]:
            raise DimensionMismatch("bound-state matrix size differs from S")
        if any(abs(b.kappa - k0) < 1e-12 for k0 in kappas):
            raise BadBoundState(f"duplicate bound-state kappa {b.kappa}")
        kappas.append(b.kappa)
        states.append(b)
    states.sort(key=lambda b: b.kappa)
    k_grid = k_grid.copy()
    k_grid.setflags(write=False)
    S_values = S_values.copy()
    S_values.setflags(write=False)
    return ScatteringData(
        k_grid=k_grid, S_values=S_values, bound_states=tuple(states), n=S_values.shape[1]
    )


@dataclass(frozen=True)
class JostBundle:
    """Jost boundary values and Jost matrix on a k-grid."""

    k_grid: np.ndarray
    f0: np.ndarray
    fp0: np.ndarray
    J_values: np.ndarray
    profile_x: np.ndarray | None = None
    profiles: np.ndarray | None = None

    def check_consistency(self, bc: BoundaryCondition, tol=1e-10):
        """Residual of J(k) = f(-k,0)^H B - f'(-k,0)^H A on the stored grid."""
        f0m = self.f0[::-1]
        fp0m = self.fp0[::-1]
        J = f0m.conj().transpose(0, 2, 1) @ bc.B - fp0m.conj().transpose(0, 2, 1) @ bc.A
        return float(np.abs(J - self.J_values).max())


@dataclass(frozen=True)
class MarchenkoKernel:
    """Marchenko kernels: F_s on [-y_max, y_max], F on [0, 2 y_max] lattice,
    and K(x, y) rows for x <= y (zero stored for y < x)."""

    x_grid: np.ndarray
    y_grid: np.ndarray
    Fs_values: np.ndarray
    Fs_y: np.ndarray
    F_values: np.ndarray
    F_y: np.ndarray
    K_values: np.ndarray

    def K_diagonal(self):
        idx = np.searchsorted(self.y_grid, self.x_grid)
        return np.array([self.K_values[i, j] for i, j in enumerate(idx)])

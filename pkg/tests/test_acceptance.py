"""Acceptance gate: end-to-end behavior of the direct and inverse transforms.

Each test states its tolerance inline; the shared session fixtures in
conftest.py hold the solved standard corpus.
"""

import re

import numpy as np
import pytest

from halfline.characterize import (
    FAIL,
    PASS,
    check_kernel_count,
    check_unitarity_symmetry,
    levinson_check,
)
from halfline.direct import DirectConfig, jost_matrix, jost_solution, solve_direct
from halfline.inverse import InverseConfig, invert
from halfline.oracles import (
    diagonal_boundary,
    robin_oracle,
    step_jost_oracle,
    zero_scattering_oracle,
)
from halfline.types import (
    BoundState,
    ScatteringData,
    boundary_equivalent,
    make_bound_state,
    make_potential,
    validate_boundary,
)

FIXTURE_NAMES = (
    "scalar_well_dirichlet",
    "scalar_barrier_neumann",
    "scalar_exponential_robin",
    "matrix_exponential_mixed",
    "matrix_step_dirichlet",
)


# --- 1. zero potential, Dirichlet and Neumann ---------------------------------

@pytest.mark.parametrize("A,B,sign", [([[0.0]], [[1.0]], -1.0),
                                      ([[-1.0]], [[0.0]], +1.0)])
def test_zero_potential_constant_scattering(A, B, sign):
    """V = 0 gives S = -I (Dirichlet) / +I (Neumann) to 1e-10."""
    pot = make_potential(1, 12.0, {"name": "zero", "params": {}})
    bc = validate_boundary(A, B)
    cfg = DirectConfig(k_count=256)
    data, _ = solve_direct(pot, bc, cfg)
    assert np.abs(data.S_values - sign).max() <= 1e-10
    assert not data.bound_states


def test_dirichlet_and_neumann_data_are_distinct():
    """The two constant-S data sets differ, so neither determines the other."""
    pot = make_potential(1, 12.0, {"name": "zero", "params": {}})
    cfg = DirectConfig(k_count=128)
    dir_data, _ = solve_direct(pot, validate_boundary([[0.0]], [[1.0]]), cfg)
    neu_data, _ = solve_direct(pot, validate_boundary([[-1.0]], [[0.0]]), cfg)
    assert np.abs(dir_data.S_values - neu_data.S_values).max() >= 1.0


# --- 2. Robin boundary with V = 0: closed-form scattering ---------------------

@pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 4, np.pi / 3])
def test_robin_closed_form(theta):
    """S matches the closed form to 1e-8 on |k| <= 60; the bound state sits at
    kappa = cot(theta) with M = sqrt(2 cot(theta)), both to 1e-8."""
    oracle = robin_oracle(theta)
    pot = make_potential(1, 12.0, {"name": "zero", "params": {}})
    cfg = DirectConfig(k_count=512)
    data, _ = solve_direct(pot, oracle["boundary"], cfg)
    assert np.abs(data.k_grid).max() <= 60.0
    S_ref = oracle["S"](data.k_grid)[:, None, None]
    assert np.abs(data.S_values - S_ref).max() <= 1e-8

    kappa_ref, M_ref = oracle["bound_state"]
    assert len(data.bound_states) == 1
    b = data.bound_states[0]
    assert abs(b.kappa - kappa_ref) <= 1e-8
    assert abs(b.M[0, 0] - M_ref) <= 1e-8


# --- 3. Robin inverse: exact cancellation -------------------------------------

def test_robin_inverse_is_trivial():
    """Feeding the closed-form Robin data through the inverse transform gives
    ||F||_inf <= 1e-6, ||V||_inf <= 1e-4, and the equivalent boundary pair."""
    theta = np.pi / 4
    oracle = robin_oracle(theta)
    half = 1024
    dk = 60.0 / half
    kp = (np.arange(half) + 0.5) * dk
    k = np.concatenate([-kp[::-1], kp])
    S = oracle["S"](k)[:, None, None].astype(complex)
    kappa, M = oracle["bound_state"]
    data = ScatteringData(n=1, k_grid=k, S_values=S,
                          bound_states=(make_bound_state(kappa, [[M]]),))
    res = invert(data, InverseConfig(x_max=12.0))
    assert np.abs(res.kernel.F_values).max() <= 1e-6
    assert np.abs(res.potential.values).max() <= 1e-4
    assert boundary_equivalent(res.boundary, oracle["boundary"], tol=1e-6)


# --- 4. round trip over the standard corpus -----------------------------------

@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_roundtrip_recovers_potential(name, corpus, solved, inverted):
    """Relative L1 error of the reconstructed V is <= 5e-2 on [0, 0.8 x_max]."""
    pot, _ = corpus[name]
    res = inverted[name]
    xs = res.potential.xs
    Vr = res.potential.values
    Vt = pot.evaluate(xs)
    m = xs <= 0.8 * pot.x_max
    num = np.trapezoid(np.linalg.norm((Vr - Vt)[m], ord=2, axis=(1, 2)), xs[m])
    den = np.trapezoid(np.linalg.norm(Vt[m], ord=2, axis=(1, 2)), xs[m])
    assert num / den <= 5e-2


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_roundtrip_recovers_boundary(name, corpus, inverted):
    """The recovered (A, B) spans the same boundary condition (tol 1e-3)."""
    _, bc = corpus[name]
    assert boundary_equivalent(inverted[name].boundary, bc, tol=1e-3)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_roundtrip_reproduces_scattering(name, solved, resolved):
    """Re-solving the reconstruction reproduces S to 1e-3 on |k| <= 30."""
    data, _ = solved[name]
    data2 = resolved[name]
    m = np.abs(data.k_grid) <= 30.0
    assert np.abs(data2.S_values[m] - data.S_values[m]).max() <= 1e-3


# --- 5. unitarity and symmetry ------------------------------------------------

@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_scattering_unitary_symmetric(name, solved):
    """S(-k) = S(k)^H = S(k)^{-1} to 1e-8 on every fixture."""
    data, _ = solved[name]
    result = check_unitarity_symmetry(data)
    assert result.status == PASS
    assert result.value <= 1e-8


# --- 6. Jost-matrix identities (direct-solver route) --------------------------

@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_jost_scattering_identity(name, solved):
    """J(-k) + S(k) J(k) = 0 to 1e-6 (relative) on every fixture."""
    data, bundle = solved[name]
    J = bundle.J_values
    resid = np.abs(J[::-1] + data.S_values @ J).max() / np.abs(J).max()
    assert resid <= 1e-6


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_bound_states_annihilated(name, corpus, solved, direct_config):
    """J(i kappa)^H M = 0 to 1e-6 for every bound state of every fixture."""
    pot, bc = corpus[name]
    data, bundle = solved[name]
    scale = np.abs(bundle.J_values).max()
    for b in data.bound_states:
        J = jost_matrix(pot, bc, [1j * b.kappa], config=direct_config)[0]
        assert np.abs(J.conj().T @ b.M).max() / scale <= 1e-6


# --- 7. phase-counting identity -----------------------------------------------

def _lhs_rhs(detail):
    m = re.search(r"lhs (-?[\d.]+), rhs (-?[\d.]+)", detail)
    return float(m.group(1)), float(m.group(2))


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_levinson(name, solved, inverse_config):
    """|phase drop - pi (2N + mu + n_D - n)| <= 0.05 pi on every fixture."""
    data, _ = solved[name]
    result = levinson_check(data, icfg=inverse_config)
    assert result.status == PASS
    assert result.value <= 0.05 * np.pi


def test_levinson_mixed_boundary_both_sides_pi(solved, inverse_config):
    """For the 2x2 diag(Dirichlet, Robin pi/4) fixture both sides equal pi."""
    data, _ = solved["matrix_exponential_mixed"]
    result = levinson_check(data, icfg=inverse_config)
    lhs, rhs = _lhs_rhs(result.detail)
    assert abs(rhs - np.pi) <= 5e-6  # detail string carries 6 decimals
    assert abs(lhs - np.pi) <= 0.05 * np.pi


# --- 8. kernel count of the convolution operator ------------------------------

@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_kernel_count_matches_multiplicity(name, solved, inverse_config):
    data, _ = solved[name]
    result = check_kernel_count(data, icfg=inverse_config)
    assert result.status == PASS
    assert int(result.value) == data.total_multiplicity


def test_kernel_count_rejects_spurious_bound_state(solved, inverse_config):
    """Injecting a bound state the data does not support flips the verdict."""
    data, _ = solved["scalar_well_dirichlet"]
    fake = BoundState(kappa=0.8, M=np.array([[1.2 + 0j]]), multiplicity=1)
    bad = ScatteringData(n=1, k_grid=data.k_grid, S_values=data.S_values,
                         bound_states=(fake,))
    result = check_kernel_count(bad, icfg=inverse_config)
    assert result.status == FAIL


# --- 9. integrator vs closed-form oracle; grid stability ----------------------

def test_step_oracle_three_decades(corpus, direct_config):
    """The ODE integrator matches the exact layer propagator to 1e-8 across
    three decades of k."""
    for name in ("scalar_well_dirichlet", "matrix_step_dirichlet"):
        pot, _ = corpus[name]
        edges, layers = pot.as_layers()
        ks = np.logspace(np.log10(0.06), np.log10(60.0), 25)
        f_ref, fp_ref = step_jost_oracle(edges, list(layers), ks)
        f, fp = jost_solution(pot, ks, config=direct_config)
        scale = max(np.abs(f_ref).max(), np.abs(fp_ref).max())
        dev = max(np.abs(f[:, 0] - f_ref).max(), np.abs(fp[:, 0] - fp_ref).max())
        assert dev / scale <= 1e-8


def test_grid_doubling_stable(corpus, solved, inverted):
    """Doubling the k grid and halving the reconstruction lattice changes the
    round-trip residuals by less than a factor of two."""
    pot, bc = corpus["scalar_well_dirichlet"]
    base_res = inverted["scalar_well_dirichlet"]
    base_data, _ = solved["scalar_well_dirichlet"]

    def v_error(res):
        xs = res.potential.xs
        m = xs <= 0.8 * pot.x_max
        Vt = pot.evaluate(xs)
        num = np.trapezoid(np.abs((res.potential.values - Vt)[m, 0, 0]), xs[m])
        den = np.trapezoid(np.abs(Vt[m, 0, 0]), xs[m])
        return num / den

    fine_data, _ = solve_direct(pot, bc, DirectConfig(k_count=4096))
    fine_res = invert(fine_data, InverseConfig(x_max=12.0, h=0.02))
    assert v_error(fine_res) <= 2.0 * v_error(base_res)

    data2, _ = solve_direct(fine_res.potential, fine_res.boundary,
                            DirectConfig(k_count=4096))
    m = np.abs(fine_data.k_grid) <= 30.0
    s_err_fine = np.abs(data2.S_values[m] - fine_data.S_values[m]).max()
    assert s_err_fine <= 2.0 * 1e-3

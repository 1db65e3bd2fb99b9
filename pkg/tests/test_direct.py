"""Direct transform: Jost solutions, scattering matrices, bound states."""

import numpy as np
import pytest

from halfline.direct import (
    DirectConfig,
    jost_matrix,
    jost_solution,
    locate_bound_states,
    normalization_matrix,
    regular_solution,
    scattering_matrix,
    solve_direct,
    symmetric_k_grid,
)
from halfline.oracles import (
    diagonal_boundary,
    exponential_jost_oracle,
    robin_oracle,
    zero_scattering_oracle,
)
from halfline.types import make_potential, validate_boundary


@pytest.fixture(scope="module")
def zero_pot():
    return make_potential(2, 12.0, {"name": "zero", "params": {}})


def test_symmetric_grid_properties():
    cfg = DirectConfig(k_max=30.0, k_count=128)
    k = symmetric_k_grid(cfg)
    assert len(k) == 128
    assert np.abs(k + k[::-1]).max() == 0.0
    assert np.all(k != 0.0)
    assert np.abs(k).max() <= 30.0


def test_zero_potential_scattering_matches_oracle(zero_pot):
    bc = diagonal_boundary([np.pi / 7, 2 * np.pi / 3])
    cfg = DirectConfig(k_count=128)
    k, S = scattering_matrix(zero_pot, bc, cfg)
    S_ref = zero_scattering_oracle(bc, k)
    assert np.abs(S - S_ref).max() <= 1e-10


def test_jost_solution_matches_exponential_oracle():
    C = np.array([[0.8, 0.3], [0.3, -0.5]])
    pot = make_potential(2, 12.0, {"name": "exponential", "params": {
        "amplitude": C, "rate": 1.2}})
    ks = np.array([0.4, 3.0, 25.0, 1.1j], dtype=complex)
    f, fp = jost_solution(pot, ks, config=DirectConfig())
    f_ref, fp_ref = exponential_jost_oracle(C, 1.2, ks)
    dev = max(np.abs(f[:, 0] - f_ref[:, 0]).max(),
              np.abs(fp[:, 0] - fp_ref[:, 0]).max())
    assert dev <= 5e-6  # limited by linear resampling of the profile


def test_robin_bound_state_located_precisely(zero_pot):
    """kappa = cot(theta) for the free Robin problem, to 1e-10."""
    theta = np.pi / 6
    pot = make_potential(1, 12.0, {"name": "zero", "params": {}})
    bc = diagonal_boundary([theta])
    located = locate_bound_states(pot, bc, config=DirectConfig())
    assert len(located) == 1
    kappa, mult, P = located[0]
    assert mult == 1
    assert abs(kappa - 1.0 / np.tan(theta)) <= 1e-10
    M = normalization_matrix(pot, kappa, P, config=DirectConfig())
    assert abs(M[0, 0] - np.sqrt(2.0 / np.tan(theta))) <= 1e-8


def test_no_bound_states_for_dirichlet_free_problem():
    pot = make_potential(1, 12.0, {"name": "zero", "params": {}})
    bc = validate_boundary([[0.0]], [[1.0]])
    assert locate_bound_states(pot, bc, config=DirectConfig()) == []


def test_jost_matrix_at_imaginary_argument(zero_pot):
    """J(i kappa) = B + kappa A for V = 0."""
    bc = diagonal_boundary([np.pi / 4, np.pi])
    kappa = 0.8
    J = jost_matrix(zero_pot, bc, [1j * kappa], config=DirectConfig())[0]
    assert np.abs(J - (bc.B + kappa * bc.A)).max() <= 1e-10


def test_regular_solution_initial_conditions():
    pot = make_potential(2, 12.0, {"name": "exponential", "params": {
        "amplitude": np.diag([0.5, -0.3]), "rate": 1.0}})
    bc = diagonal_boundary([np.pi / 3, np.pi])
    xs = np.linspace(0.0, 2.0, 21)
    phi, phip = regular_solution(pot, bc, [1.3], xs)
    assert np.abs(phi[0, 0] - bc.A).max() <= 1e-12
    assert np.abs(phip[0, 0] - bc.B).max() <= 1e-12


def test_bundle_self_consistency(zero_pot):
    bc = diagonal_boundary([np.pi / 5, np.pi / 2])
    data, bundle = solve_direct(zero_pot, bc, DirectConfig(k_count=128))
    assert bundle.check_consistency(bc) <= 1e-10


def test_solve_direct_full_robin_pipeline():
    """End to end on the free Robin problem: S, bound state, normalization."""
    theta = np.pi / 4
    oracle = robin_oracle(theta)
    pot = make_potential(1, 12.0, {"name": "zero", "params": {}})
    data, _ = solve_direct(pot, oracle["boundary"], DirectConfig(k_count=256))
    assert np.abs(data.S_values[:, 0, 0] - oracle["S"](data.k_grid)).max() <= 1e-9
    kappa, M = oracle["bound_state"]
    assert len(data.bound_states) == 1
    assert data.bound_states[0].kappa == pytest.approx(kappa, abs=1e-9)
    assert data.bound_states[0].M[0, 0] == pytest.approx(M, abs=1e-8)

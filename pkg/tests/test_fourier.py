"""Oscillatory quadrature and the rational tail basis."""

import numpy as np
import pytest
from scipy.integrate import quad

from halfline.errors import AsymmetricGrid
from halfline.fourier import (
    _moments,
    chi_fourier,
    fit_rational_tail,
    oscillatory_transform,
    rational_tail_fourier,
    rational_tail_values,
    spline_oscillatory_integral,
)


@pytest.mark.parametrize("w", [0.01, 0.3, 5.0, 200.0, 0.7j, 3.0 + 1.5j])
def test_moments_match_quadrature(w):
    """int_0^h t^p e^{iwt} dt for p = 0..3 against adaptive quadrature."""
    h = 0.04
    M = _moments(np.array([w]), h)
    for p in range(4):
        re = quad(lambda t: (t ** p * np.exp(1j * w * t)).real, 0.0, h)[0]
        im = quad(lambda t: (t ** p * np.exp(1j * w * t)).imag, 0.0, h)[0]
        assert abs(M[p, 0] - (re + 1j * im)) <= 1e-14


@pytest.mark.parametrize("w", [0.5, 12.0, 60.0, 1j * 0.8])
def test_spline_integral_of_exponential(w):
    """int_0^T e^{-t} e^{iwt} dt has a closed form; large |w| must not hurt."""
    T = 30.0
    t = np.linspace(0.0, T, 751)
    G = np.exp(-t).astype(complex)
    got = spline_oscillatory_integral(t, G, np.array([w]))[0]
    ref = (1.0 - np.exp((1j * w - 1.0) * T)) / (1.0 - 1j * w)
    assert abs(got - ref) <= 1e-8


def test_oscillatory_transform_of_gaussian():
    """(1/2pi) int e^{-k^2} e^{iky} dk = e^{-y^2/4} / (2 sqrt(pi))."""
    k = np.linspace(-12.0, 12.0, 2401)
    G = np.exp(-k ** 2).astype(complex)
    ys = np.array([0.0, 0.7, 2.3])
    got = oscillatory_transform(k, G, ys)
    ref = np.exp(-ys ** 2 / 4) / (2 * np.sqrt(np.pi))
    assert np.abs(got - ref).max() <= 1e-9  # spline interpolation error O(h^4)


def test_oscillatory_transform_requires_uniform_grid():
    k = np.array([0.0, 1.0, 3.0, 4.0])
    with pytest.raises(AsymmetricGrid):
        oscillatory_transform(k, np.ones_like(k, dtype=complex), [0.5])


def test_chi_fourier_vanishes_left_of_origin():
    out = chi_fourier(np.array([-1.0, -0.1, 0.0, 0.5]), gamma=2.0, p=3)
    assert np.all(out[:2] == 0)
    assert out[2, 0] == pytest.approx(1.0)  # right-limit of e^{-gamma y}


def test_rational_tail_fit_recovers_mismatched_pole():
    """G(k) = 1/(ik + 2) fit in the gamma = 1 basis still transforms to
    e^{-2y} once the fitted part and the Filon residual are combined."""
    half = 2000
    dk = 80.0 / half
    kp = (np.arange(half) + 0.5) * dk
    k = np.concatenate([-kp[::-1], kp])
    S = (1.0 / (1j * k + 2.0)).astype(complex)[:, None, None]

    class Data:
        k_grid = k
        S_values = S
        n = 1

    C = fit_rational_tail(k, S, S_inf=np.zeros((1, 1)), gamma=1.0, p=8,
                          window=0.4)
    ys = np.linspace(0.0, 6.0, 61)
    resid = S - rational_tail_values(k, C, 1.0)
    got = rational_tail_fourier(ys, C, 1.0) + oscillatory_transform(k, resid, ys)
    ref = np.exp(-2.0 * ys)
    assert np.abs(got[:, 0, 0] - ref).max() <= 1e-6

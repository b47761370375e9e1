from __future__ import annotations

import math

import numpy as np
import pytest

from triplewell.errors import BoxTooSmall
from triplewell.fluctuation import reduced_ratio, stability_problem
from triplewell.instanton import closed_form_profile, make_grid, zero_mode
from triplewell.potential import harmonic, triple_well
from triplewell.spectrum_oracle import (
    GridSpec,
    determinant_ratio_bruteforce,
    diagonalize_schrodinger,
    diagonalize_stability,
    exponential_fit,
    parities,
    schrodinger_states,
    stability_modes,
)


def test_harmonic_levels():
    e = diagonalize_schrodinger(harmonic(1.0), GridSpec(10.0, 4000), 3)
    np.testing.assert_allclose(e, [0.5, 1.5, 2.5], atol=1e-6)


def test_box_too_small():
    with pytest.raises(BoxTooSmall):
        diagonalize_schrodinger(harmonic(1.0), GridSpec(2.0, 1000), 3, auto_expand=False)
    # the default expands the box until the 1.2x check passes
    e = diagonalize_schrodinger(harmonic(1.0), GridSpec(2.0, 1000), 3)
    np.testing.assert_allclose(e, [0.5, 1.5, 2.5], atol=1e-5)


def test_richardson_beats_plain_second_order():
    grid = GridSpec(10.0, 1000)
    exact = np.array([0.5, 1.5, 2.5])
    coarse = diagonalize_schrodinger(harmonic(1.0), grid, 3, richardson=False)
    fine = diagonalize_schrodinger(harmonic(1.0), grid.refined(), 3, richardson=False)
    extrap = diagonalize_schrodinger(harmonic(1.0), grid, 3)
    err_c, err_f, err_x = (np.abs(v - exact) for v in (coarse, fine, extrap))
    # second order: halving h quarters the error; extrapolation removes the h^2 term
    np.testing.assert_array_less(3.5, err_c / err_f)
    np.testing.assert_array_less(4.0 * err_x, err_f)


def test_parity_alternates_for_triple_well():
    spec = triple_well(4.0)
    _, vecs, x = schrodinger_states(spec, GridSpec(3.0, 2000), 6)
    np.testing.assert_allclose(x, -x[::-1], atol=1e-12)
    assert parities(vecs) == [1, -1, 1, -1, 1, -1]


def test_eigenvectors_orthonormal():
    _, vecs, _ = schrodinger_states(triple_well(6.0), GridSpec(3.0, 2000), 6)
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(6), atol=1e-10)
    prof = closed_form_profile(1.0, grid=make_grid(8.0, 0.01))
    _, modes, _ = stability_modes(prof, 8.0, count=4)
    np.testing.assert_allclose(modes.T @ modes, np.eye(4), atol=1e-10)


def test_stability_lowest_mode_scaling(unit_profile):
    times = [12.0, 16.0, 20.0]
    eps0 = [diagonalize_stability(unit_profile, T / 2, count=1)[0] for T in times]
    assert all(e > 0 for e in eps0)
    slope, _ = exponential_fit(times, eps0)
    assert abs(slope + 1.0) < 0.02


def test_stability_lowest_mode_is_the_zero_mode(unit_profile):
    _, vecs, tau = stability_modes(unit_profile, 8.0, GridSpec(8.0, 1601), count=1)
    prof = unit_profile.restrict(8.0)
    x_o = zero_mode(prof)[1:-1]
    np.testing.assert_allclose(tau, prof.tau[1:-1], atol=1e-9)
    overlap = abs(vecs[:, 0] @ x_o) / np.linalg.norm(x_o)
    assert overlap > 0.999


@pytest.mark.parametrize("order", [2, 4])
def test_constant_curvature_box_spectrum(order):
    nu, half = 1.3, 3.0
    const = closed_form_profile(1.0, grid=make_grid(half, 0.01))
    # a profile frozen at x = 0 has curvature omega^2 = 1 everywhere
    frozen = type(const)(const.tau, np.zeros_like(const.tau), np.zeros_like(const.tau), 0.0, 0.25,
                         2.0, 2.0, triple_well(nu), 0.0, 1.0)
    eps = diagonalize_stability(frozen, half, count=5, order=order)
    j = np.arange(1, 6)
    np.testing.assert_allclose(eps, nu**2 + (j * math.pi / (2 * half)) ** 2, rtol=1e-4)


def test_identical_operators_give_unit_ratio():
    res = determinant_ratio_bruteforce(lambda t: np.full_like(t, 2.25), 1.5, 4.0, GridSpec(4.0, 1000))
    assert res.raw == 1.0


def test_harmonic_pair_ratio():
    res = determinant_ratio_bruteforce(lambda t: np.ones_like(t), 2.0, 2.0, GridSpec(2.0, 4000))
    expected = 2.0 * math.sinh(4.0) / (1.0 * math.sinh(8.0))
    assert res.raw == pytest.approx(expected, rel=0.005)


def test_triple_well_reduced_ratio_matches_gelfand_yaglom(unit_profile):
    brute = determinant_ratio_bruteforce(unit_profile.curvature, 1.5, 8.0, GridSpec(8.0, 4000))
    gy = reduced_ratio(unit_profile, stability_problem(unit_profile, 8.0)).reduced_ratio
    assert brute.reduced == pytest.approx(gy, rel=0.02)


def test_grid_must_cover_box(unit_profile):
    with pytest.raises(ValueError):
        diagonalize_stability(unit_profile, 25.0)
    with pytest.raises(ValueError):
        diagonalize_stability(unit_profile, 8.0, grid=GridSpec(7.0))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(-1.0)
    with pytest.raises(ValueError):
        GridSpec(1.0, 10)
    with pytest.raises(ValueError):
        GridSpec(1.0, 1000, "periodic")
    g = GridSpec(3.0, 1001)
    assert g.refined().step == pytest.approx(g.step / 2)
    assert g.widened(1.2).step == pytest.approx(g.step, rel=1e-3)

"""Bands, occupations and parameter validation."""

import numpy as np
import pytest

from soichain import (
    Band,
    DomainError,
    GapClosedError,
    ModelParams,
    continuum_chi0,
    dispersion,
    fermi,
    momentum_grid,
)
from soichain.model import band_gap, dispersion_all, fermi_derivative


def test_dispersion_zone_boundary():
    params = ModelParams(t_s=1.0, t_p=1.0, delta=0.0)
    assert dispersion(params, Band.PX, np.pi) == pytest.approx(4.0, rel=1e-15)


def test_dispersion_s_band_bottom():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0)
    assert dispersion(params, Band.S, 0.0) == pytest.approx(-0.5, rel=1e-15)


def test_direct_gap_values():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0)
    # k = 0 gap is delta itself, zone boundary adds 2(t_s + t_p) twice
    assert band_gap(params, 0.0) == pytest.approx(1.0, rel=1e-15)
    assert band_gap(params, np.pi) == pytest.approx(13.0, rel=1e-15)


def test_p_bands_degenerate():
    params = ModelParams(t_s=2.0, t_p=0.7, delta=0.3)
    k = np.linspace(-np.pi, np.pi, 41)
    np.testing.assert_array_equal(
        dispersion(params, Band.PX, k), dispersion(params, Band.PY, k)
    )


def test_dispersion_even_in_k():
    params = ModelParams(t_s=1.3, t_p=0.8, delta=0.2)
    k = np.linspace(0.0, np.pi, 17)
    for band in Band:
        np.testing.assert_allclose(
            dispersion(params, band, -k), dispersion(params, band, k), rtol=1e-15
        )


def test_dispersion_all_stacks_bands():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0)
    k = np.array([0.0, 1.0, np.pi])
    stacked = dispersion_all(params, k)
    assert stacked.shape == (3, 3)
    for band in Band:
        np.testing.assert_array_equal(stacked[band], dispersion(params, band, k))


def test_fermi_reference_value():
    # 1/(1 + e) at eps = 2T
    assert fermi(1.0, 1.0) == pytest.approx(0.26894142136999513, abs=1e-16)


def test_fermi_particle_hole_sum():
    rng = np.random.default_rng(7)
    eps = rng.normal(scale=3.0, size=50)
    np.testing.assert_allclose(fermi(eps, 0.4) + fermi(-eps, 0.4), 1.0, atol=1e-15)


def test_fermi_zero_temperature_step():
    np.testing.assert_array_equal(
        fermi(np.array([-2.0, 0.0, 3.0]), 0.0), [1.0, 0.5, 0.0]
    )


def test_fermi_no_overflow_at_large_argument():
    assert fermi(1e6, 0.01) == 0.0
    assert fermi(-1e6, 0.01) == 1.0


def test_fermi_derivative_matches_difference_quotient():
    eps, temperature, h = 0.7, 0.9, 1e-6
    expected = (fermi(eps + h, temperature) - fermi(eps - h, temperature)) / (2 * h)
    assert fermi_derivative(eps, temperature) == pytest.approx(expected, rel=1e-8)
    assert fermi_derivative(0.3, 0.0) == 0.0


@pytest.mark.parametrize(
    "t_s, t_p, delta, expected",
    [(2.0, 1.0, 3.0, 1.0), (2.0, 1.0, 0.03, 10.0)],
)
def test_continuum_chi0_values(t_s, t_p, delta, expected):
    params = ModelParams(t_s=t_s, t_p=t_p, delta=delta)
    assert continuum_chi0(params) == pytest.approx(expected, rel=1e-12)


def test_continuum_chi0_quarter_gap_doubles():
    a = continuum_chi0(ModelParams(t_s=2.0, t_p=1.0, delta=1.0))
    b = continuum_chi0(ModelParams(t_s=2.0, t_p=1.0, delta=0.25))
    assert b / a == pytest.approx(2.0, rel=1e-12)


def test_continuum_chi0_rejects_closed_gap():
    with pytest.raises(GapClosedError):
        continuum_chi0(ModelParams(t_s=1.0, t_p=1.0, delta=0.0))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"t_s": 0.0, "t_p": 1.0},
        {"t_s": 1.0, "t_p": -0.5},
        {"t_s": 1.0, "t_p": 1.0, "delta": -0.1},
        {"t_s": 1.0, "t_p": 1.0, "temperature": -1.0},
    ],
)
def test_params_validation(kwargs):
    with pytest.raises(DomainError):
        ModelParams(**kwargs)


def test_bandwidth_scale():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0)
    assert params.bandwidth_scale == pytest.approx(9.0)


def test_coupling_combinations():
    params = ModelParams(t_s=1.0, t_p=1.0, u=2.0, j=0.5, jp=-0.25)
    assert params.pair_coupling == pytest.approx(1.75)
    assert params.rpa_coupling == pytest.approx(1.5)


def test_momentum_grid_midpoints():
    k = momentum_grid(4)
    np.testing.assert_allclose(k, [-0.75 * np.pi, -0.25 * np.pi, 0.25 * np.pi, 0.75 * np.pi])
    # even grids never hit the removable singularities at 0 and +-pi
    assert not np.isin(0.0, momentum_grid(512))
    assert np.abs(momentum_grid(512)).max() < np.pi
    with pytest.raises(DomainError):
        momentum_grid(1)

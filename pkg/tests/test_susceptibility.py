"""Channel susceptibilities: free, ladder-summed and flowed."""

import numpy as np
import pytest

from soichain import (
    DIVERGED,
    DomainError,
    FlowSettings,
    ModelParams,
    NumericsError,
    channel_susceptibilities,
    chi_rpa,
    chi_spin_orbit,
    temperature_sweep,
)
from soichain.channels import CHANNELS, ChannelCombination, all_labels, effective_coupling
from soichain.flow import bubble_matrix, initial_vertex
from soichain.susceptibility import (
    channel_value,
    chi_free,
    flowed_coupling,
    free_tensor,
    ray_participation,
    susceptibility_tensor,
)

SETTINGS = FlowSettings(k_points=128)


def test_chi_free_interband_value():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0)
    assert chi_free(params) == pytest.approx(1.0 / np.sqrt(13.0), rel=1e-9)


def test_free_tensor_diagonal_non_negative():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=0.7, temperature=0.3)
    tensor = free_tensor(bubble_matrix(params, "ph"))
    for label in all_labels():
        combo = ChannelCombination(terms=((label, 1.0),))
        assert channel_value(tensor, combo) >= 0.0


def test_bare_vertex_susceptibility_closed_form():
    # chi = -Pi + g_eff Pi^2 for every s-p channel at the bare vertex
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0, u=1.1, j=0.4, jp=-0.3)
    pi3 = bubble_matrix(params, "ph")
    tensor = susceptibility_tensor(initial_vertex(params), pi3)
    pi = pi3[0, 1]
    for name in CHANNELS:
        g_eff = effective_coupling(name, params)
        assert channel_value(tensor, name) == pytest.approx(
            -pi + g_eff * pi * pi, rel=1e-12
        )
        assert flowed_coupling(initial_vertex(params), pi3, name) == pytest.approx(
            g_eff, rel=1e-12
        )


def test_channel_value_rejects_unknown_channel():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0)
    tensor = free_tensor(bubble_matrix(params, "ph"))
    with pytest.raises(DomainError):
        channel_value(tensor, "nematic")


def test_chi_rpa_reference_value():
    # chi0 = 1/sqrt(13), u - j = 2: chi0/(1 - 2 chi0) = (sqrt(13) + 2)/9
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0, u=2.0)
    assert chi_rpa(params) == pytest.approx((np.sqrt(13.0) + 2.0) / 9.0, rel=1e-9)


def test_chi_rpa_continuum():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=3.0)
    assert chi_rpa(params, continuum=True) == pytest.approx(1.0, rel=1e-12)
    dressed = ModelParams(t_s=2.0, t_p=1.0, delta=3.0, u=0.5)
    assert chi_rpa(dressed, continuum=True) == pytest.approx(2.0, rel=1e-12)


def test_chi_rpa_past_pole_is_diverged():
    # pole at (u - j) chi0 = 1, chi0 = 1/sqrt(13)
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0, u=3.7)
    assert chi_rpa(params) is DIVERGED
    assert repr(DIVERGED) == "diverged"


def test_diverged_point_reports_scale_and_participation():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=0.05, u=2.0, temperature=0.3)
    results, trajectory = channel_susceptibilities(params, settings=SETTINGS)
    assert trajectory.diverged
    for res in results:
        assert res.diverged
        assert res.value is None
        assert res.l_div == trajectory.l_div
        assert res.participation is not None
    by_name = {res.channel: res for res in results}
    # an ssss runaway: the singlet ladder coupling dominates the ray
    assert by_name["singlet_odd"].participation > by_name["triplet_even"].participation
    assert chi_spin_orbit(params, SETTINGS) is DIVERGED


def test_converged_point_reports_values():
    params = ModelParams(
        t_s=2.0, t_p=1.0, delta=1.0, u=0.5, j=0.1, jp=0.05, temperature=0.5
    )
    results, trajectory = channel_susceptibilities(params, settings=SETTINGS)
    assert not trajectory.diverged
    for res in results:
        assert not res.diverged
        assert res.l_div is None
        assert res.participation is None
        assert res.value > 0.0
    value = chi_spin_orbit(params, SETTINGS)
    assert value == pytest.approx(
        next(r.value for r in results if r.channel == "triplet_even"), rel=1e-12
    )


def test_participation_is_scale_free():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0, u=1.0, j=0.2, jp=0.1)
    pi3 = bubble_matrix(params, "ph")
    v = initial_vertex(params)
    a = ray_participation(v, pi3, "triplet_even")
    b = ray_participation(17.0 * v, pi3, "triplet_even")
    assert a == pytest.approx(b, rel=1e-12)
    assert ray_participation(np.zeros(8), pi3, "triplet_even") == 0.0


def test_sweep_serial_equals_threaded():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0, u=0.5, j=0.1, jp=0.05)
    temps = [0.4, 0.6, 0.9]
    serial = temperature_sweep(params, temps, deltas=[0.5, 1.0], settings=SETTINGS)
    threaded = temperature_sweep(
        params, temps, deltas=[0.5, 1.0], settings=SETTINGS, threads=3
    )
    assert serial.rows == threaded.rows
    assert serial.errors == [] and threaded.errors == []
    assert len(serial.rows) == 2 * 3 * 3


def test_sweep_rows_sorted_and_monotone_in_temperature():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=1.0, u=0.5, j=0.1, jp=0.05)
    sweep = temperature_sweep(params, [0.9, 0.4, 0.6], settings=SETTINGS)
    keys = [(r.channel, r.delta, r.temperature) for r in sweep.rows]
    assert keys == sorted(keys)
    te = [r.chi for r in sweep.rows if r.channel == "triplet_even"]
    # thermal smearing suppresses the static response
    assert te == sorted(te, reverse=True)


def test_sweep_records_divergences_as_rows():
    params = ModelParams(t_s=2.0, t_p=1.0, delta=0.05, u=2.0)
    sweep = temperature_sweep(params, [0.3, 0.9], settings=SETTINGS)
    flagged = [r for r in sweep.rows if r.diverged]
    assert flagged and all(r.chi is None and r.l_div > 0.0 for r in flagged)
    finite = [r for r in sweep.rows if not r.diverged]
    assert finite and all(r.l_div is None for r in finite)

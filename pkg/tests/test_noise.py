import math
from dataclasses import replace

import numpy as np
import pytest

from test_transduction import resolved_setup

from eomtrans import noise as noise_mod
from eomtrans import transduction as trans
from eomtrans.constants import TWOPI
from eomtrans.errors import DomainError
from eomtrans.noise import (
    BathOccupancies,
    added_noise_full,
    added_noise_simplified,
    added_noise_vacuum,
    amplifier_referred_noise,
    output_spectrum,
    resonator_broadband_occupancy,
)
from eomtrans.params import bose_occupancy, derive, optomechanical_damping


def test_bath_occupancy_validation():
    with pytest.raises(DomainError):
        BathOccupancies(n_m=-1.0)


def test_contributions_sum_exactly(heated, drive):
    baths = BathOccupancies(n_ext_e=0.1, n_int_e=0.2, n_ext_o=0.01, n_int_o=0.02, n_m=500.0)
    budget = added_noise_full(heated.params, drive, heated.params.omega_m, baths)
    for port, total in (("e", budget.n_add_e), ("o", budget.n_add_o)):
        parts = budget.contributions[port]
        assert len(parts) == 10
        assert sum(parts.values()) == pytest.approx(total, rel=1e-14)


def test_vacuum_equals_full_with_zero_baths(heated, drive):
    w = heated.params.omega_m
    budget = added_noise_full(heated.params, drive, w, BathOccupancies())
    vac_e, vac_o = added_noise_vacuum(heated.params, drive, w)
    assert vac_e == budget.n_add_e
    assert vac_o == budget.n_add_o


def test_vacuum_zero_without_coupling(device, drive):
    dark = replace(drive, p_e=0.0, p_o=0.0)
    assert added_noise_vacuum(device, dark, device.omega_m) == (0.0, 0.0)


def test_optical_output_silent_without_optical_pump(device, drive):
    dark_o = replace(drive, p_o=0.0)
    _, n_add_o = added_noise_vacuum(device, dark_o, device.omega_m)
    assert n_add_o == 0.0


def test_noise_monotone_in_each_bath(heated, drive):
    w = heated.params.omega_m
    base_occ = {"n_ext_e": 0.0, "n_int_e": 0.0, "n_ext_o": 0.0, "n_int_o": 0.0, "n_m": 10.0}
    base = added_noise_full(heated.params, drive, w, BathOccupancies(**base_occ))
    for field in base_occ:
        bumped = dict(base_occ)
        bumped[field] += 1.0
        budget = added_noise_full(heated.params, drive, w, BathOccupancies(**bumped))
        assert budget.n_add_e >= base.n_add_e - 1e-15
        assert budget.n_add_o >= base.n_add_o - 1e-15
        assert budget.n_add_e + budget.n_add_o > base.n_add_e + base.n_add_o


def test_vacuum_noise_vanishes_doubly_resolved():
    params, drive = resolved_setup(kappa_ratio=1e-3, coop=1.0)
    vac_e, vac_o = added_noise_vacuum(params, drive, params.omega_m)
    assert vac_e < 1e-4
    assert vac_o < 1e-4


def test_simplified_tracks_vacuum(heated, drive):
    w_peak = trans.shifted_mechanical_frequency(heated.params, drive)
    simp = added_noise_simplified(heated.params, drive)
    vac = added_noise_vacuum(heated.params, drive, w_peak)
    for s, v in zip(simp, vac):
        assert abs(s / v - 1.0) < 0.20


def test_simplified_phonon_floor_relation(heated, drive):
    # n_add_e * eta_o / theta equals the backaction floor by construction
    pt = trans.decompose(heated.params, drive)
    n_e, _ = added_noise_simplified(heated.params, drive)
    assert n_e * heated.params.eta_o / pt.theta == pytest.approx(pt.n_min, rel=1e-12)


def test_simplified_zero_floor():
    params, drive = resolved_setup(kappa_ratio=1e-3, coop=1.0)
    n_e, n_o = added_noise_simplified(params, drive)
    floor = trans.backaction_phonon_floor(params, drive)
    assert floor < 1e-6
    assert n_e < 1e-6 and n_o < 1e-6


def test_gain_form_identity_at_matched_cooperativity(heated, drive):
    # vacuum added noise equals the gain-form expressions essentially exactly
    # at omega_m; checked at the drive where both cooperativities match
    params = heated.params
    d = derive(params, drive)
    matched = replace(drive, p_e=drive.p_e * d.coop_o / d.coop_e)
    dm = derive(params, matched)
    assert abs(dm.coop_e / dm.coop_o - 1.0) < 1e-9
    w = params.omega_m
    vac_e, vac_o = added_noise_vacuum(params, matched, w)
    pt = trans.decompose(params, matched, w)
    gamma_e = optomechanical_damping(params, matched, "e", w)
    gamma_o = optomechanical_damping(params, matched, "o", w)
    rhs_e = pt.theta / params.eta_o * pt.gain_e * (
        (gamma_e / gamma_o) * (pt.gain_e - 1.0) + (pt.gain_o - 1.0)
    )
    rhs_o = pt.theta / params.eta_e * pt.gain_o * (
        (gamma_o / gamma_e) * (pt.gain_o - 1.0) + (pt.gain_e - 1.0)
    )
    assert vac_e == pytest.approx(rhs_e, rel=1e-6)
    assert vac_o == pytest.approx(rhs_o, rel=1e-6)


def test_amplifier_referred_anchors(heated, drive):
    n_amp_e, n_amp_o = amplifier_referred_noise(heated.params, drive)
    assert abs(n_amp_e - 109.4) < 1.0  # gain 110 referred to the input
    assert 0.0 < n_amp_o < 0.2

    onres = replace(drive, delta_o=heated.params.omega_m)
    n_amp_e_res, _ = amplifier_referred_noise(heated.params, onres)
    ratio = heated.params.kappa_o / (4.0 * heated.params.omega_m)
    assert n_amp_e_res == pytest.approx(ratio**2, rel=1e-12)
    assert abs(n_amp_e_res - 1141.0) < 10.0


def test_amplifier_referred_resolved():
    params, drive = resolved_setup(kappa_ratio=1e-3, coop=1.0)
    n_amp_e, n_amp_o = amplifier_referred_noise(params, drive)
    assert abs(n_amp_e) < 1e-6 and abs(n_amp_o) < 1e-6


def test_mechanical_bath_dominates(fitted_point):
    params, drive, t_m = fitted_point
    w = trans.shifted_mechanical_frequency(params, drive)
    baths = BathOccupancies(n_m=bose_occupancy(t_m, params.omega_m))
    budget = added_noise_full(params, drive, w, baths)
    vac_e, vac_o = added_noise_vacuum(params, drive, w)
    for port, total, vac in (("e", budget.n_add_e, vac_e), ("o", budget.n_add_o, vac_o)):
        mech = budget.contributions[port]["mech"] + budget.contributions[port]["mech_amp"]
        assert (mech - vac) / (total - vac) > 0.99 or mech / (total - vac) > 0.99


def test_flat_background_without_drive(device, drive):
    dark = replace(drive, p_e=0.0, p_o=0.0)
    grid = device.omega_m + TWOPI * np.linspace(-2e3, 2e3, 41)
    spec = output_spectrum(device, dark, grid, BathOccupancies(), setup_noise=(9.9, 8.8))
    np.testing.assert_allclose(spec.layers["e"]["total"], 10.9, rtol=1e-12)
    np.testing.assert_allclose(spec.layers["o"]["total"], 9.8, rtol=1e-12)


def test_layers_sum_to_total(fitted_point):
    params, drive, t_m = fitted_point
    grid = params.omega_m + TWOPI * np.linspace(-5e3, 5e3, 101)
    baths = BathOccupancies(n_m=bose_occupancy(t_m, params.omega_m))
    spec = output_spectrum(
        params, drive, grid, baths, setup_noise=(9.9, 8.8), include_resonator_noise=True
    )
    for port in ("e", "o"):
        layers = spec.layers[port]
        total = (
            layers["background"] + layers["resonator"] + layers["mechanical"] + layers["other"]
        )
        np.testing.assert_allclose(total, layers["total"], rtol=1e-14)


def test_mechanical_peak_width_matches_bandwidth(fitted_point):
    params, drive, t_m = fitted_point
    w_peak = trans.shifted_mechanical_frequency(params, drive)
    grid = w_peak + TWOPI * np.linspace(-3e3, 3e3, 4001)
    baths = BathOccupancies(n_m=bose_occupancy(t_m, params.omega_m))
    spec = output_spectrum(params, drive, grid, baths)
    mech = spec.layers["o"]["mechanical"]
    half = mech.max() / 2.0
    above = grid[mech >= half]
    fwhm = above[-1] - above[0]
    gamma_conv = trans.bandwidth(params, drive)
    assert abs(fwhm / gamma_conv - 1.0) < 0.10


def test_resonator_pedestal(fitted_point):
    params, drive, t_m = fitted_point
    w_peak = trans.shifted_mechanical_frequency(params, drive)
    # far outside the conversion line but inside kappa_e
    grid = w_peak + TWOPI * np.array([0.0, 50e3])
    baths = BathOccupancies(n_m=bose_occupancy(t_m, params.omega_m))
    on = output_spectrum(params, drive, grid, baths, include_resonator_noise=True)
    off = output_spectrum(params, drive, grid, baths, include_resonator_noise=False)
    res = on.layers["e"]["resonator"]
    assert res[0] > 0.0
    assert res[1] > 0.5 * res[0]  # kappa_e-wide pedestal, flat on this scale
    mech = on.layers["e"]["mechanical"]
    assert mech[1] < 1e-2 * mech[0]  # conversion line is narrow
    np.testing.assert_allclose(
        on.layers["e"]["total"] - off.layers["e"]["total"], res, rtol=1e-12
    )


def test_resonator_occupancy_scales_with_power(drive):
    n1 = resonator_broadband_occupancy(drive)
    n2 = resonator_broadband_occupancy(replace(drive, p_e=2 * drive.p_e))
    assert n2 == pytest.approx(2 * n1, rel=1e-14)
    assert n1 == pytest.approx(2.8e-3 * 601.0, rel=1e-12)

import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import assert_close, random_stable_config

from eomtrans import network as net
from eomtrans.constants import TWOPI
from eomtrans.errors import InstabilityError
from eomtrans.params import DriveConfig, derive


def quiet_drive(drive):
    return replace(drive, p_e=0.0, p_o=0.0)


def test_feedthrough_positions(device, drive):
    m = net.build_matrices(device, drive)
    expected = np.zeros((4, 10))
    expected[0, 0] = expected[1, 2] = expected[2, 5] = expected[3, 7] = 1.0
    np.testing.assert_array_equal(m.d_mat, expected)


def test_zero_coupling_block_diagonal(device, drive):
    m = net.build_matrices(device, quiet_drive(drive))
    a = m.a_mat
    coupling = a.copy()
    np.fill_diagonal(coupling, 0.0)
    assert np.max(np.abs(coupling)) == 0.0
    assert a[0, 0] == -(device.kappa_e / 2 + 1j * drive.delta_e)


def test_b_c_entry_pattern(device, drive):
    m = net.build_matrices(device, drive)
    assert m.b_mat[0, 0] == pytest.approx(math.sqrt(device.kappa_ex_e))
    assert m.b_mat[0, 1] == pytest.approx(math.sqrt(device.kappa_in_e))
    assert m.b_mat[2, 4] == pytest.approx(math.sqrt(device.gamma_m))
    assert m.c_mat[1, 1] == pytest.approx(math.sqrt(device.kappa_ex_o))
    assert np.count_nonzero(m.b_mat) == 10
    assert np.count_nonzero(m.c_mat) == 4


def test_reference_point_stable(heated, drive):
    m = net.build_matrices(heated.params, drive)
    assert m.is_stable()
    net.require_stable(m)


def test_blue_detuned_strong_drive_unstable(device, drive):
    # strong two-mode-squeezing drive on the microwave mode
    blue = replace(drive, delta_e=-device.omega_m, p_e=1e-4)
    m = net.build_matrices(device, blue)
    assert not m.is_stable()
    with pytest.raises(InstabilityError) as err:
        net.require_stable(m)
    assert err.value.eigenvalue.real >= 0.0


def test_critical_coupling_reflection_null(device, drive):
    kappa = device.kappa_e
    matched = replace(device, kappa_in_e=kappa / 2, kappa_ex_e=kappa / 2)
    m = net.build_matrices(matched, quiet_drive(drive))
    sm = net.scattering_at(m, drive.delta_e)
    assert abs(sm.upsilon[net.OUT_E, net.IN_EXT_E]) < 1e-12


def test_zero_coupling_no_conversion(device, drive):
    m = net.build_matrices(device, quiet_drive(drive))
    sm = net.scattering_at(m, device.omega_m)
    assert sm.upsilon[net.OUT_O, net.IN_EXT_E] == 0.0


def test_batch_matches_single(heated, drive):
    m = net.build_matrices(heated.params, drive)
    omegas = heated.params.omega_m + TWOPI * np.linspace(-500.0, 500.0, 11)
    batch = net.scattering_batch(m, omegas)
    for i, w in enumerate(omegas):
        single = net.scattering_at(m, w)
        np.testing.assert_allclose(batch[i], single.upsilon, rtol=1e-12, atol=1e-15)


def test_coefficients_match_matrix_randomized():
    rng = np.random.default_rng(42)
    for _ in range(30):
        params, drive = random_stable_config(rng)
        m = net.build_matrices(params, drive)
        assert m.is_stable()
        for _ in range(5):
            w = params.omega_m * rng.uniform(0.5, 2.0)
            sm = net.scattering_at(m, w)
            coeffs = net.analytic_coefficients(params, drive, w)
            for label, row, col, expect in net.coefficient_upsilon_pairs(params, coeffs):
                assert_close(sm.upsilon[row, col], expect, rel=1e-9, abs_floor=1e-12)


def test_commutator_residuals_randomized():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(30):
        params, drive = random_stable_config(rng)
        m = net.build_matrices(params, drive)
        for _ in range(5):
            w = params.omega_m * rng.uniform(0.5, 2.0)
            r_e, r_o = net.commutator_residuals(net.scattering_at(m, w), params, drive)
            worst = max(worst, abs(r_e), abs(r_o))
    assert worst < 1e-8


def test_commutator_residual_zero_coupling(device, drive):
    m = net.build_matrices(device, quiet_drive(drive))
    r_e, r_o = net.commutator_residuals(net.scattering_at(m, device.omega_m), device, drive)
    assert abs(r_e) < 1e-12 and abs(r_o) < 1e-12


def test_reciprocity(heated, drive):
    m = net.build_matrices(heated.params, drive)
    for w in heated.params.omega_m * np.array([0.8, 1.0, 1.2]):
        sm = net.scattering_at(m, w)
        assert_close(
            abs(sm.upsilon[net.OUT_O, net.IN_EXT_E]),
            abs(sm.upsilon[net.OUT_E, net.IN_EXT_O]),
            rel=1e-9,
        )


def test_cross_coefficients_symmetric(heated, drive):
    coeffs = net.analytic_coefficients(heated.params, drive, heated.params.omega_m)
    assert coeffs.alpha_eo == coeffs.alpha_oe


def test_optical_path_severed(device, drive):
    dark = replace(drive, p_o=0.0)
    coeffs = net.analytic_coefficients(device, dark, device.omega_m)
    assert coeffs.alpha_eo == 0.0
    assert coeffs.alpha_om == 0.0


def test_mech_coefficient_linewidth_scaling(device, drive):
    # with both dampings far below gamma_m, |alpha_em|^2 scales as 1/gamma_m
    weak = replace(drive, p_e=1e-15, p_o=1e-15)
    w = device.omega_m
    vals = []
    for gamma_hz in (50.0, 100.0):
        params = replace(device, gamma_m0=TWOPI * gamma_hz)
        c = net.analytic_coefficients(params, weak, w)
        vals.append(abs(c.alpha_em) ** 2)
    assert abs(vals[0] / vals[1] - 2.0) < 1e-3


def test_matrix_csv_dump(tmp_path, heated, drive):
    m = net.build_matrices(heated.params, drive)
    paths = net.dump_matrices_csv(m, tmp_path)
    assert len(paths) == 4
    text = (tmp_path / "a_mat.csv").read_text().splitlines()
    assert len(text) == 7  # header + 6 rows
    first = text[1].split(",")
    assert len(first) == 12
    assert float(first[0]) == pytest.approx(m.a_mat[0, 0].real, rel=1e-9)

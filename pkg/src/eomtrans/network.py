"""Linearized three-mode network: dynamical matrices and scattering map.

Mode basis for the internal state is ``[a_e, a_o, b, a_e^+, a_o^+, b^+]``.
Input channels (columns of the input-coupling matrix and of the scattering
map) are

    0 e waveguide   1 e internal bath   2 o waveguide   3 o internal bath
    4 mechanical bath, then the same five conjugated (indices 5..9).

Output channels (rows) are ``[e waveguide, o waveguide]`` plus their
conjugates (indices 2, 3).

The scattering map at frequency omega is

    Y(omega) = C (-i omega I - A)^{-1} B - D,

obtained by Fourier transforming the Langevin equations and applying the
input-output relation a_out = sqrt(kappa_ex) a - a_in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InstabilityError
from .params import DeviceParams, DriveConfig, DerivedDrive, derive, susceptibility

# row indices of Y
OUT_E, OUT_O, OUT_E_DAG, OUT_O_DAG = 0, 1, 2, 3
# column indices of Y
IN_EXT_E, IN_INT_E, IN_EXT_O, IN_INT_O, IN_M = 0, 1, 2, 3, 4
N_DAG = 5  # offset of the conjugated partner of each input channel

INPUT_LABELS = (
    "ext_e", "int_e", "ext_o", "int_o", "mech",
    "ext_e_amp", "int_e_amp", "ext_o_amp", "int_o_amp", "mech_amp",
)


@dataclass(frozen=True)
class SystemMatrices:
    """State-space matrices (A, B, C, D) of the linearized network."""

    a_mat: np.ndarray  # 6x6 complex, rad/s
    b_mat: np.ndarray  # 6x10, sqrt(rad/s)
    c_mat: np.ndarray  # 4x6, sqrt(rad/s)
    d_mat: np.ndarray  # 4x10, dimensionless

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.a_mat)

    def is_stable(self) -> bool:
        """True when every dynamical eigenvalue decays."""
        return bool(np.max(self.eigenvalues().real) < 0.0)


@dataclass(frozen=True)
class ScatteringMatrix:
    """Frequency-resolved 4x10 scattering map Y(omega)."""

    omega: float  # rad/s, rotating-frame evaluation frequency
    upsilon: np.ndarray  # 4x10 complex


@dataclass(frozen=True)
class OutputCoefficients:
    """Closed-form output-field coefficients at one frequency.

    ``alpha_xy`` couples input channel y to output x in the co-rotating
    sector; the ``alpha_t_*`` set is the counter-rotating (conjugate-input)
    sector responsible for gain. All are dimensionless after the sqrt(eta)
    port weights are split off (see :func:`coefficient_upsilon_pairs`).
    """

    alpha_ee: complex
    alpha_oo: complex
    alpha_eo: complex
    alpha_oe: complex
    alpha_em: complex
    alpha_om: complex
    alpha_t_ee: complex
    alpha_t_oo: complex
    alpha_t_eo: complex
    alpha_t_oe: complex
    alpha_t_em: complex
    alpha_t_om: complex


def build_matrices(
    params: DeviceParams,
    drive: DriveConfig,
    derived: DerivedDrive | None = None,
) -> SystemMatrices:
    """Assemble A, B, C, D from device constants and the drive point."""
    if derived is None:
        derived = derive(params, drive)
    ke, ko, gm = params.kappa_e, params.kappa_o, params.gamma_m
    de, do = drive.delta_e, drive.delta_o
    ge, go = derived.g_e, derived.g_o
    wm = params.omega_m

    a = np.zeros((6, 6), dtype=complex)
    a[0, 0] = -(ke / 2 + 1j * de)
    a[0, 2] = -1j * ge
    a[0, 5] = -1j * ge
    a[1, 1] = -(ko / 2 + 1j * do)
    a[1, 2] = -1j * go
    a[1, 5] = -1j * go
    a[2, 0] = -1j * ge
    a[2, 1] = -1j * go
    a[2, 2] = -(gm / 2 + 1j * wm)
    a[2, 3] = -1j * ge
    a[2, 4] = -1j * go
    a[3, 2] = 1j * ge
    a[3, 3] = -(ke / 2 - 1j * de)
    a[3, 5] = 1j * ge
    a[4, 2] = 1j * go
    a[4, 4] = -(ko / 2 - 1j * do)
    a[4, 5] = 1j * go
    a[5, 0] = 1j * ge
    a[5, 1] = 1j * go
    a[5, 3] = 1j * ge
    a[5, 4] = 1j * go
    a[5, 5] = -(gm / 2 - 1j * wm)

    root_ex_e = np.sqrt(params.kappa_ex_e)
    root_in_e = np.sqrt(params.kappa_in_e)
    root_ex_o = np.sqrt(params.kappa_ex_o)
    root_in_o = np.sqrt(params.kappa_in_o)
    root_gm = np.sqrt(gm)

    b = np.zeros((6, 10), dtype=complex)
    b[0, 0], b[0, 1] = root_ex_e, root_in_e
    b[1, 2], b[1, 3] = root_ex_o, root_in_o
    b[2, 4] = root_gm
    b[3, 5], b[3, 6] = root_ex_e, root_in_e
    b[4, 7], b[4, 8] = root_ex_o, root_in_o
    b[5, 9] = root_gm

    c = np.zeros((4, 6), dtype=complex)
    c[0, 0] = root_ex_e
    c[1, 1] = root_ex_o
    c[2, 3] = root_ex_e
    c[3, 4] = root_ex_o

    d = np.zeros((4, 10))
    d[0, 0] = 1.0
    d[1, 2] = 1.0
    d[2, 5] = 1.0
    d[3, 7] = 1.0

    return SystemMatrices(a_mat=a, b_mat=b, c_mat=c, d_mat=d)


def scattering_at(matrices: SystemMatrices, omega: float) -> ScatteringMatrix:
    """Evaluate Y(omega) by a linear solve (no explicit inverse)."""
    lhs = -1j * omega * np.eye(6) - matrices.a_mat
    try:
        x = np.linalg.solve(lhs, matrices.b_mat)
    except np.linalg.LinAlgError as exc:
        eig = matrices.eigenvalues()
        worst = eig[np.argmax(eig.real)]
        raise InstabilityError(worst, f"(-i omega I - A) singular at omega={omega}: {exc}") from exc
    upsilon = matrices.c_mat @ x - matrices.d_mat
    return ScatteringMatrix(omega=omega, upsilon=upsilon)


def scattering_batch(matrices: SystemMatrices, omegas: np.ndarray) -> np.ndarray:
    """Vectorized Y over a frequency grid; returns shape (n, 4, 10)."""
    omegas = np.asarray(omegas, dtype=float)
    lhs = -1j * omegas[:, None, None] * np.eye(6) - matrices.a_mat[None, :, :]
    x = np.linalg.solve(lhs, np.broadcast_to(matrices.b_mat, (omegas.size, 6, 10)))
    return matrices.c_mat[None, :, :] @ x - matrices.d_mat[None, :, :]


def response_denominator(params: DeviceParams, drive: DriveConfig, omega, derived=None):
    """Common denominator of all closed-form coefficients:

    1 + (chi_m - chi_m~)[G_e^2 (chi_e - chi_e~) + G_o^2 (chi_o - chi_o~)]
    """
    if derived is None:
        derived = derive(params, drive)
    chi_m = susceptibility(params, drive, "m", omega)
    chi_mt = susceptibility(params, drive, "m", omega, mirrored=True)
    total = 0.0
    for mode in ("e", "o"):
        chi = susceptibility(params, drive, mode, omega)
        chit = susceptibility(params, drive, mode, omega, mirrored=True)
        total = total + derived.coupling(mode) ** 2 * (chi - chit)
    return 1.0 + (chi_m - chi_mt) * total


def analytic_coefficients(
    params: DeviceParams,
    drive: DriveConfig,
    omega: float,
    derived: DerivedDrive | None = None,
) -> OutputCoefficients:
    """Closed-form output coefficients; independent oracle for Y(omega).

    The diagonal coefficients keep the mechanical response factor on the
    coupling-induced terms only,

        alpha_ee = kappa_e chi_e [1 + (chi_m - chi_m~)
                   (G_o^2(chi_o - chi_o~) - G_e^2 chi_e~)] / den,

    which is the form consistent with both output-commutator sum rules and
    the matrix solve (the bare-cavity reflection survives at G = 0).
    """
    if derived is None:
        derived = derive(params, drive)
    ge, go = derived.g_e, derived.g_o
    ke, ko, gm = params.kappa_e, params.kappa_o, params.gamma_m

    chi_e = susceptibility(params, drive, "e", omega)
    chi_o = susceptibility(params, drive, "o", omega)
    chi_m = susceptibility(params, drive, "m", omega)
    chi_et = susceptibility(params, drive, "e", omega, mirrored=True)
    chi_ot = susceptibility(params, drive, "o", omega, mirrored=True)
    chi_mt = susceptibility(params, drive, "m", omega, mirrored=True)

    mech = chi_m - chi_mt
    den = 1.0 + mech * (ge**2 * (chi_e - chi_et) + go**2 * (chi_o - chi_ot))

    alpha_ee = ke * chi_e * (1.0 + mech * (go**2 * (chi_o - chi_ot) - ge**2 * chi_et)) / den
    alpha_oo = ko * chi_o * (1.0 + mech * (ge**2 * (chi_e - chi_et) - go**2 * chi_ot)) / den
    cross = np.sqrt(ke * ko) * ge * go * (-mech) / den
    alpha_eo = cross * chi_e * chi_o
    alpha_t_eo = cross * chi_e * chi_ot
    alpha_t_oe = cross * chi_o * chi_et
    alpha_t_ee = ke * ge**2 * chi_e * chi_et * (-mech) / den
    alpha_t_oo = ko * go**2 * chi_o * chi_ot * (-mech) / den
    alpha_em = -1j * np.sqrt(ke * gm) * ge * chi_e * chi_m / den
    alpha_om = -1j * np.sqrt(ko * gm) * go * chi_o * chi_m / den
    alpha_t_em = -1j * np.sqrt(ke * gm) * ge * chi_e * chi_mt / den
    alpha_t_om = -1j * np.sqrt(ko * gm) * go * chi_o * chi_mt / den

    return OutputCoefficients(
        alpha_ee=alpha_ee,
        alpha_oo=alpha_oo,
        alpha_eo=alpha_eo,
        alpha_oe=alpha_eo,
        alpha_em=alpha_em,
        alpha_om=alpha_om,
        alpha_t_ee=alpha_t_ee,
        alpha_t_oo=alpha_t_oo,
        alpha_t_eo=alpha_t_eo,
        alpha_t_oe=alpha_t_oe,
        alpha_t_em=alpha_t_em,
        alpha_t_om=alpha_t_om,
    )


def coefficient_upsilon_pairs(params: DeviceParams, coeffs: OutputCoefficients):
    """Map each closed-form coefficient to the Y entry it must reproduce.

    Returns a list of (label, row, column, expected_value) where
    expected_value already includes the sqrt(eta) port weights.
    """
    eta_e, eta_o = params.eta_e, params.eta_o
    se, so = np.sqrt(eta_e), np.sqrt(eta_o)
    sie, sio = np.sqrt(1.0 - eta_e), np.sqrt(1.0 - eta_o)
    c = coeffs
    return [
        ("ee_ext", OUT_E, IN_EXT_E, eta_e * c.alpha_ee - 1.0),
        ("ee_int", OUT_E, IN_INT_E, se * sie * c.alpha_ee),
        ("eo_ext", OUT_E, IN_EXT_O, se * so * c.alpha_eo),
        ("eo_int", OUT_E, IN_INT_O, se * sio * c.alpha_eo),
        ("em", OUT_E, IN_M, se * c.alpha_em),
        ("ee_ext_amp", OUT_E, IN_EXT_E + N_DAG, eta_e * c.alpha_t_ee),
        ("ee_int_amp", OUT_E, IN_INT_E + N_DAG, se * sie * c.alpha_t_ee),
        ("eo_ext_amp", OUT_E, IN_EXT_O + N_DAG, se * so * c.alpha_t_eo),
        ("eo_int_amp", OUT_E, IN_INT_O + N_DAG, se * sio * c.alpha_t_eo),
        ("em_amp", OUT_E, IN_M + N_DAG, se * c.alpha_t_em),
        ("oe_ext", OUT_O, IN_EXT_E, so * se * c.alpha_oe),
        ("oe_int", OUT_O, IN_INT_E, so * sie * c.alpha_oe),
        ("oo_ext", OUT_O, IN_EXT_O, eta_o * c.alpha_oo - 1.0),
        ("oo_int", OUT_O, IN_INT_O, so * sio * c.alpha_oo),
        ("om", OUT_O, IN_M, so * c.alpha_om),
        ("oe_ext_amp", OUT_O, IN_EXT_E + N_DAG, so * se * c.alpha_t_oe),
        ("oe_int_amp", OUT_O, IN_INT_E + N_DAG, so * sie * c.alpha_t_oe),
        ("oo_ext_amp", OUT_O, IN_EXT_O + N_DAG, eta_o * c.alpha_t_oo),
        ("oo_int_amp", OUT_O, IN_INT_O + N_DAG, so * sio * c.alpha_t_oo),
        ("om_amp", OUT_O, IN_M + N_DAG, so * c.alpha_t_om),
    ]


def commutator_residuals(
    sm: ScatteringMatrix, params: DeviceParams, drive: DriveConfig
) -> tuple[float, float]:
    """Deviation of the two output-commutator sum rules from unity.

    For each waveguide output the co-rotating |Y|^2 weights minus the
    counter-rotating ones must sum to exactly 1; returns (sum - 1) for the
    microwave and optical rows.
    """
    del params, drive  # the sum rule needs only the scattering entries
    mags = np.abs(sm.upsilon) ** 2
    residuals = []
    for row in (OUT_E, OUT_O):
        residuals.append(float(mags[row, :N_DAG].sum() - mags[row, N_DAG:].sum() - 1.0))
    return residuals[0], residuals[1]


def dump_matrices_csv(matrices: SystemMatrices, directory) -> list[str]:
    """Write A/B/C/D as CSV (row-major, each entry as re,im field pair)."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, mat in (
        ("a_mat", matrices.a_mat),
        ("b_mat", matrices.b_mat),
        ("c_mat", matrices.c_mat),
        ("d_mat", matrices.d_mat),
    ):
        path = directory / f"{name}.csv"
        mat = np.asarray(mat, dtype=complex)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            header = []
            for j in range(mat.shape[1]):
                header += [f"c{j}_re", f"c{j}_im"]
            writer.writerow(header)
            for row in mat:
                cells = []
                for value in row:
                    cells += [f"{value.real:.12g}", f"{value.imag:.12g}"]
                writer.writerow(cells)
        written.append(str(path))
    return written


def require_stable(matrices: SystemMatrices) -> None:
    """Raise :class:`InstabilityError` when the network is not decaying."""
    eig = matrices.eigenvalues()
    worst = eig[np.argmax(eig.real)]
    if worst.real >= 0.0:
        raise InstabilityError(worst)

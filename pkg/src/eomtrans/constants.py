"""Physical constants (2019 SI exact values) and unit helpers.

All internal quantities are angular (rad/s). Config files, CLI flags and
CSV columns use cyclic frequency (Hz); conversion happens once at the
boundary via :func:`hz_to_rad` / :func:`rad_to_hz`.
"""

import math

PLANCK = 6.62607015e-34  # J s, exact
HBAR = PLANCK / (2.0 * math.pi)  # J s
KBOLTZ = 1.380649e-23  # J/K, exact

TWOPI = 2.0 * math.pi

PICOWATT = 1e-12  # W


def hz_to_rad(nu):
    """Cyclic frequency (Hz) to angular frequency (rad/s)."""
    return TWOPI * nu


def rad_to_hz(omega):
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return omega / TWOPI

"""Unit conversions between laboratory units and internal natural units.

Internally every energy is measured in units of the reference hopping t0 and
every time in units of 1/t0 (hbar = 1).  The laboratory anchor is
t0 = 2*pi x 4 MHz (angular), so plain frequencies in MHz divide by 4 and times
in ns multiply by 2*pi x 4e6 x 1e-9.
"""

from __future__ import annotations

import math

# reference hopping, plain (non-angular) frequency in MHz
T0_MHZ = 4.0

_T0_RAD_PER_NS = 2.0 * math.pi * T0_MHZ * 1e-3  # angular t0 in rad/ns


def energy_from_mhz(f_mhz: float) -> float:
    """Plain frequency in MHz -> energy in units of t0."""
    return f_mhz / T0_MHZ


def mhz_from_energy(e_t0: float) -> float:
    return e_t0 * T0_MHZ


def time_from_ns(t_ns: float) -> float:
    """Duration in ns -> duration in units of 1/t0."""
    return t_ns * _T0_RAD_PER_NS


def time_from_us(t_us: float) -> float:
    return time_from_ns(t_us * 1e3)


def ns_from_time(t: float) -> float:
    return t / _T0_RAD_PER_NS


def us_from_time(t: float) -> float:
    return ns_from_time(t) * 1e-3


def rate_from_khz(f_khz: float) -> float:
    """Plain rate in kHz -> rate in units of t0 (2*pi cancels)."""
    return f_khz * 1e-3 / T0_MHZ

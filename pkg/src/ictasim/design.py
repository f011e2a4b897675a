"""Canonical amplifier parameters, flux tuning, and band diagnostics.

The component values here are the hand-tuned production set for the
voltage-biased junction amplifier; the matching network was originally
synthesized from a low-pass prototype and then adjusted, so these numbers are
canonical rather than derivable.  Flux tuning uses the symmetric two-junction
interferometer model with negligible loop inductance: the effective critical
current is I_c,max |cos(pi Phi / Phi_0)|.  That mapping is a convenience
layer; the solver itself treats I_c as the control variable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import FrequencyGrid, IctaParams, Netlist, z_jj

# Zero-flux critical currents of the canonical device.
MAX_JUNCTION_CRITICAL_CURRENT = 600e-9
MAX_SQUID_CRITICAL_CURRENT = 1.2e-6


def canonical_icta() -> IctaParams:
    """The canonical component value set (immutable dataclass)."""
    return IctaParams()


@dataclass(frozen=True)
class DesignTargets:
    """Matching-network design goals the canonical values aim at."""

    gain_db: float = 20.0
    center_frequency: float = 6e9
    fractional_bandwidth: float = 0.25
    network_impedance: float = 81.7

    def __post_init__(self):
        values = (
            self.gain_db,
            self.center_frequency,
            self.fractional_bandwidth,
            self.network_impedance,
        )
        if any(not np.isfinite(v) or v <= 0 for v in values):
            raise ValueError("design targets must be positive and finite")
        if self.fractional_bandwidth >= 1.0:
            raise ValueError("fractional bandwidth must be below 1")


@dataclass(frozen=True)
class FluxBias:
    """External flux in units of the flux quantum, with the zero-flux scale."""

    flux: float
    i_c_max: float = MAX_SQUID_CRITICAL_CURRENT

    def __post_init__(self):
        if not np.isfinite(self.i_c_max) or self.i_c_max <= 0:
            raise ValueError("maximum critical current must be positive and finite")
        if not np.isfinite(self.flux):
            raise ValueError("flux must be finite")


def ic_of_flux(bias: FluxBias) -> float:
    """Effective critical current of a symmetric two-junction loop.

    I_c(Phi) = I_c,max |cos(pi Phi / Phi_0)|: even in the flux, periodic with
    one flux quantum, zero at half-integer frustration.
    """
    return bias.i_c_max * abs(np.cos(np.pi * bias.flux))


@dataclass(frozen=True)
class BandReport:
    """Where the junction sees more than the reference real impedance.

    `asymmetry` compares the 10-90% roll-off widths of Re Z at the two band
    edges (upper over lower); values above 1 mean the upper edge falls off
    more slowly.  All fields are NaN when the band is empty.
    """

    reference_impedance: float
    peak_impedance: float
    peak_frequency: float
    band_lo_hz: float
    band_hi_hz: float
    lower_rolloff_hz: float
    upper_rolloff_hz: float

    @property
    def empty(self) -> bool:
        return not np.isfinite(self.band_lo_hz)

    @property
    def bandwidth_hz(self) -> float:
        return self.band_hi_hz - self.band_lo_hz

    @property
    def asymmetry(self) -> float:
        return self.upper_rolloff_hz / self.lower_rolloff_hz


def _crossing(f: np.ndarray, r: np.ndarray, i: int, j: int, level: float) -> float:
    """Linear interpolation of the frequency where r crosses level on [i, j]."""
    if r[j] == r[i]:
        return float(f[j])
    frac = (r[i] - level) / (r[i] - r[j])
    return float(f[i] + frac * (f[j] - f[i]))


def _rolloff_width(f, r, start: int, step: int, hi_level: float, lo_level: float) -> float:
    """Frequency span over which r falls from hi_level to lo_level, walking
    from `start` in direction `step`.  NaN if the grid ends first."""
    f_hi = f_lo = float("nan")
    prev = start
    i = start + step
    while 0 <= i < len(r):
        if np.isnan(f_hi) and r[i] <= hi_level:
            f_hi = _crossing(f, r, prev, i, hi_level)
        if r[i] <= lo_level:
            f_lo = _crossing(f, r, prev, i, lo_level)
            break
        prev = i
        i += step
    return abs(f_lo - f_hi)


def band_check(net: Netlist, grid) -> BandReport:
    """Band edges where Re Z_JJ exceeds the wave-port impedance, plus the
    edge roll-off asymmetry.

    A flat probe network that never exceeds the reference yields an empty
    report.  Frequencies at or below zero are ignored.
    """
    f = grid.frequencies if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    positive = f > 0
    f = f[positive]
    r = z_jj(net, f).real
    reference = net.wave_port_impedance
    nan = float("nan")
    above = np.isfinite(r) & (r > reference)
    if not np.any(above):
        peak = int(np.nanargmax(np.where(np.isfinite(r), r, -np.inf)))
        return BandReport(reference, float(r[peak]), float(f[peak]), nan, nan, nan, nan)
    # Largest contiguous above-reference run holds the working band.
    runs = []
    start = None
    for i, flag in enumerate(list(above) + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    lo, hi = max(runs, key=lambda ab: ab[1] - ab[0])
    peak = lo + int(np.argmax(r[lo : hi + 1]))
    r_peak = float(r[peak])
    band_lo = _crossing(f, r, lo, lo - 1, reference) if lo > 0 else float(f[0])
    band_hi = _crossing(f, r, hi, hi + 1, reference) if hi + 1 < len(f) else float(f[-1])
    lower = _rolloff_width(f, r, peak, -1, 0.9 * r_peak, 0.1 * r_peak)
    upper = _rolloff_width(f, r, peak, +1, 0.9 * r_peak, 0.1 * r_peak)
    return BandReport(
        reference_impedance=reference,
        peak_impedance=r_peak,
        peak_frequency=float(f[peak]),
        band_lo_hz=band_lo,
        band_hi_hz=band_hi,
        lower_rolloff_hz=lower,
        upper_rolloff_hz=upper,
    )

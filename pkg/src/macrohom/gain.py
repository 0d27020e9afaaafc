"""Spectral-temporal parametric gain functions and derived quantities.

The amplifier maps vacuum inputs onto bright twin beams through the
Bogoliubov coefficients u, v at detuning omega and pump-envelope time t.
With

    x = walkoff_slope * omega * length / 2      (phase-mismatch half-angle)
    z = G(t)^2 - x^2

the coefficients are u = C(z) + i*x*S(z) and v = G(t)*S(z), where C and S
are the even entire functions C(z) = cosh(sqrt(z)) and
S(z) = sinh(sqrt(z))/sqrt(z), continued through z <= 0 as cos and sinc.
Evaluating C and S directly (never dividing by sqrt(z)) keeps the
removable singularity at z = 0 harmless; a short Taylor series covers
|z| < 1e-6.  Unitarity |u|^2 - |v|^2 = 1 then holds identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, curve_fit

from .errors import BracketingError, FitError, ValidationError
from .params import C_NM_PER_PS, CrystalParams, PumpParams, SpectralGrid

_SERIES_CUTOFF = 1e-6

# |v(omega_max, 0)|^2 must fall below this fraction of |v(0,0)|^2
TAIL_CUTOFF = 1e-6


def delta(omega, crystal: CrystalParams):
    """Phase mismatch (rad/mm) at detuning omega (rad/ps); odd in omega."""
    return crystal.walkoff_slope * np.asarray(omega, dtype=float)


def gain_at(t, pump: PumpParams):
    """Parametric gain G(t) following the Gaussian pump field envelope.

    G(t) = g_peak * exp(-t^2 / (2 sigma_a^2)) with sigma_a set by the
    intensity FWHM t_p, so G(t)^2 reaches half its peak at |t| = t_p/2.
    """
    t = np.asarray(t, dtype=float)
    sig = pump.sigma_a
    return pump.g_peak * np.exp(-(t * t) / (2.0 * sig * sig))


def _cosh_branch(z):
    """C(z) = cosh(sqrt(z)), continued as cos(sqrt(-z)) for z < 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= _SERIES_CUTOFF
    neg = z <= -_SERIES_CUTOFF
    mid = ~(pos | neg)
    out[pos] = np.cosh(np.sqrt(z[pos]))
    out[neg] = np.cos(np.sqrt(-z[neg]))
    zm = z[mid]
    out[mid] = 1.0 + zm / 2.0 + zm * zm / 24.0 + zm * zm * zm / 720.0
    return out


def _sinc_branch(z):
    """S(z) = sinh(sqrt(z))/sqrt(z), continued as sin(sqrt(-z))/sqrt(-z)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= _SERIES_CUTOFF
    neg = z <= -_SERIES_CUTOFF
    mid = ~(pos | neg)
    sp = np.sqrt(z[pos])
    out[pos] = np.sinh(sp) / sp
    sn = np.sqrt(-z[neg])
    out[neg] = np.sin(sn) / sn
    zm = z[mid]
    out[mid] = 1.0 + zm / 6.0 + zm * zm / 120.0 + zm * zm * zm / 5040.0
    return out


@dataclass(frozen=True)
class GainSample:
    """One evaluation of the Bogoliubov pair (u, v)."""

    u: complex
    v: float


def uv_arrays(omega, t: float, crystal: CrystalParams, pump: PumpParams):
    """Vectorized (u, v) at detunings ``omega`` and pump time ``t``.

    Returns complex u and real nonnegative v.  The sign that the analytic
    continuation of v would acquire beyond its first zero is dropped: v
    only ever enters observables through v^2 or products of two v's from
    mirrored detunings, so it is unobservable, and |v| keeps the
    twin-pair amplitude convention nonnegative everywhere.
    """
    g = float(gain_at(t, pump))
    x = 0.5 * delta(omega, crystal) * crystal.length_mm
    z = g * g - x * x
    c = _cosh_branch(z)
    s = _sinc_branch(z)
    u = c + 1j * x * s
    v = np.abs(g * s)
    return u, v


def uv(omega: float, t: float, crystal: CrystalParams, pump: PumpParams) -> GainSample:
    """Scalar convenience wrapper around :func:`uv_arrays`."""
    u, v = uv_arrays(np.atleast_1d(float(omega)), t, crystal, pump)
    return GainSample(u=complex(u[0]), v=float(v[0]))


def spectrum(grid: SpectralGrid, crystal: CrystalParams, pump: PumpParams):
    """Photon spectral density per mode |v(omega, 0)|^2 on the grid."""
    _, v = uv_arrays(grid.omega, 0.0, crystal, pump)
    return v * v


def omega_max_for(crystal: CrystalParams, pump: PumpParams, cutoff: float = TAIL_CUTOFF) -> float:
    """Detuning beyond which the spectrum is below ``cutoff`` of its peak.

    Uses the monotone envelope bound |v|^2 <= G^2/(x^2 - G^2) valid past
    the gain band, so the returned value is a rigorous tail cutoff.
    """
    g = pump.g_peak
    if g <= 0:
        raise ValidationError("peak gain must be > 0 to size a spectral grid")
    dl = crystal.walkoff_slope * crystal.length_mm
    if dl <= 0:
        raise ValidationError("walkoff_slope * length must be > 0 to size a grid")
    n_peak = math.sinh(g) ** 2
    x_max = g * math.sqrt(1.0 + 1.0 / (cutoff * n_peak))
    return 2.0 * x_max / dl


def spectral_fwhm_nm(crystal: CrystalParams, pump: PumpParams) -> float:
    """FWHM of the photon spectrum, converted to wavelength (nm).

    The full width in detuning (both wings, 2*omega_half) maps to
    wavelength through d(lambda) = lambda_deg^2 * d(omega) / (2 pi c).
    Fails if the half-maximum crossing cannot be bracketed.
    """
    if not (pump.g_peak > 0):
        raise ValidationError("spectral FWHM requires g_peak > 0")
    g = pump.g_peak
    dl = crystal.walkoff_slope * crystal.length_mm
    if dl <= 0:
        raise BracketingError("zero walkoff: spectrum has no finite width")
    peak = math.sinh(g) ** 2
    half = 0.5 * peak

    def excess(omega):
        x = 0.5 * dl * omega
        z = g * g - x * x
        s = _sinc_branch(np.atleast_1d(z))[0]
        return (g * s) ** 2 - half

    # The first half crossing lies inside the gain band (z from g^2 to 0
    # drives |v|^2 from sinh^2 g down to g^2 < half for g >~ 1), but walk
    # outward in small steps to bracket it robustly for any gain.
    omega_hi = 2.0 * math.sqrt(g * g + math.pi ** 2) / dl  # first zero of v
    n_scan = 4096
    scan = np.linspace(0.0, omega_hi, n_scan)
    vals = np.array([excess(o) for o in scan])
    below = np.nonzero(vals < 0)[0]
    if below.size == 0:
        raise BracketingError("half-maximum crossing not bracketed inside the grid")
    j = below[0]
    if j == 0:
        raise BracketingError("spectrum peak below half maximum: degenerate input")
    omega_half = brentq(excess, scan[j - 1], scan[j], xtol=1e-12, rtol=8.9e-16)
    domega = 2.0 * omega_half
    return pump.lambda_deg ** 2 * domega / (2.0 * math.pi * C_NM_PER_PS)


def calibrate_walkoff(
    target_fwhm_nm: float,
    pump: PumpParams,
    length_mm: float = 10.0,
) -> CrystalParams:
    """Find the walk-off slope that gives the target spectral FWHM.

    The FWHM scales exactly as 1/(walkoff*length), so the root in the
    slope is unique; it is found by bracketed root finding and refined
    until the achieved FWHM matches the target within 1e-3 nm.
    """
    if not (target_fwhm_nm > 0):
        raise ValidationError("target FWHM must be > 0")
    if not (pump.g_peak > 0):
        raise ValidationError("calibration requires g_peak > 0")

    def mismatch(d):
        return spectral_fwhm_nm(CrystalParams(length_mm, d), pump) - target_fwhm_nm

    lo, hi = 1e-3, 1.0
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    for _ in range(60):
        if f_lo > 0:
            break
        lo /= 4.0
        f_lo = mismatch(lo)
    for _ in range(60):
        if f_hi < 0:
            break
        hi *= 4.0
        f_hi = mismatch(hi)
    if not (f_lo > 0 > f_hi):
        raise BracketingError(
            f"no sign change bracketing the calibration target {target_fwhm_nm} nm"
        )
    d_star = brentq(mismatch, lo, hi, xtol=1e-14, rtol=8.9e-16)
    crystal = CrystalParams(length_mm, d_star)
    achieved = spectral_fwhm_nm(crystal, pump)
    if abs(achieved - target_fwhm_nm) > 1e-3:
        raise BracketingError(
            f"calibration failed to converge: achieved {achieved} nm"
        )
    return crystal


def _sinh2_model(p, c, scale):
    return scale * np.sinh(c * np.sqrt(p)) ** 2


def fit_gain_curve(powers, intensities):
    """Least-squares fit of intensity = scale * sinh^2(c * sqrt(power)).

    The gain is proportional to the pump field amplitude, hence to the
    square root of pump power.  Returns (c, scale).

    Initialization is deterministic: seed scale0 = 1, read c0 off the
    largest-power point via asinh, re-estimate scale0 from the
    smallest-power point, and refresh c0 once.
    """
    p = np.asarray(powers, dtype=float)
    y = np.asarray(intensities, dtype=float)
    if p.ndim != 1 or p.size < 3:
        raise ValidationError("need at least 3 (power, intensity) points")
    if p.shape != y.shape:
        raise ValidationError("powers and intensities must have equal length")
    if np.any(p <= 0):
        raise ValidationError("powers must be > 0")
    if np.all(y == 0):
        raise ValidationError("all intensities zero: gain fit is degenerate")
    if np.any(y < 0):
        raise ValidationError("intensities must be >= 0")

    i_max = int(np.argmax(p))
    i_min = int(np.argmin(p))
    scale0 = 1.0
    c0 = math.asinh(math.sqrt(max(y[i_max], 1e-300) / scale0)) / math.sqrt(p[i_max])
    denom = math.sinh(c0 * math.sqrt(p[i_min])) ** 2
    if y[i_min] > 0 and denom > 0:
        scale0 = y[i_min] / denom
        c0 = math.asinh(math.sqrt(y[i_max] / scale0)) / math.sqrt(p[i_max])

    try:
        popt, _ = curve_fit(
            _sinh2_model,
            p,
            y,
            p0=(c0, scale0),
            bounds=((0.0, 0.0), (np.inf, np.inf)),
            maxfev=20_000,
        )
    except RuntimeError as exc:
        resid = float(np.sum((_sinh2_model(p, c0, scale0) - y) ** 2))
        raise FitError(f"gain-curve fit did not converge: {exc}", residual=resid)
    c, scale = float(popt[0]), float(popt[1])
    return c, scale

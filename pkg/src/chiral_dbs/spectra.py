"""Analytic emitter spectra of the chiral (CEP) microring.

The cavity enters only through its response function

    chi(w) = 2 / (x + i k/2) - i k e^{i phi} / (x + i k/2)^2,    x = w - w_c

whose first term is the ordinary two-mode Lorentz response and whose second
(squared-Lorentzian) term comes from the mirror-induced chiral coupling.
Lamb shift and local coupling are ``Delta = g^2 Re chi`` and
``Gamma = -2 g^2 Im chi``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .errors import EmptyTrace, PhaseOutOfDomain
from .model import SystemParams, phase_distance

DEFAULT_GRID_POINTS = 4001
MIN_RESOLVED_POINTS = 8


class SpectrumKind(str, enum.Enum):
    RESPONSE = "response"
    SE_SPECTRUM = "se_spectrum"
    SPECTRAL_DENSITY = "spectral_density"
    LAMB_SHIFT = "lamb_shift"
    LOCAL_COUPLING = "local_coupling"


@dataclass(frozen=True)
class SpectrumTrace:
    omega: np.ndarray
    values: np.ndarray
    kind: SpectrumKind

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w.ndim != 1 or (w.size > 1 and np.any(np.diff(w) <= 0)):
            raise ValueError("omega grid must be strictly ascending")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", np.asarray(self.values))

    def integral(self) -> float:
        return float(np.trapezoid(np.real(self.values), self.omega))


@dataclass(frozen=True)
class PeakDescriptor:
    center: float
    height: float
    fwhm: float
    is_resolved: bool


def default_grid(params: SystemParams, count: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """[w_c - 5k - 2g, w_c + 5k + 2g] with ``count`` points."""
    half = 5.0 * params.kappa + 2.0 * params.g
    return np.linspace(params.omega_c - half, params.omega_c + half, count)


def response_chi(omega, params: SystemParams, *, cascade: bool = True):
    """Cavity response chi(omega); ``cascade=False`` keeps only the Lorentz term."""
    z = np.asarray(omega, dtype=float) - params.omega_c + 0.5j * params.kappa
    chi = 2.0 / z
    if cascade:
        chi = chi - 1j * params.kappa * params.chiral_factor / z**2
    return chi


def lamb_shift(omega, params: SystemParams):
    return params.g**2 * np.real(response_chi(omega, params))


def local_coupling(omega, params: SystemParams):
    return -2.0 * params.g**2 * np.imag(response_chi(omega, params))


def _closed_form_parts(omega, params: SystemParams):
    x = np.asarray(omega, dtype=float) - params.omega_c
    k = params.kappa
    u = x * x - 0.25 * k * k
    den = (x * x + 0.25 * k * k) ** 2
    s = math.sin(params.phi)
    one_minus_c = 2.0 * math.sin(0.5 * params.phi) ** 2
    return x, k, u, den, s, one_minus_c


def lamb_shift_closed(omega, params: SystemParams):
    """Real-arithmetic closed form of g^2 Re chi (no cancellation near w_c)."""
    x, k, u, den, s, omc = _closed_form_parts(omega, params)
    return params.g**2 * (u * (2.0 * x + k * s) + k * k * x * omc) / den


def local_coupling_closed(omega, params: SystemParams):
    """Real-arithmetic closed form of -2 g^2 Im chi."""
    x, k, u, den, s, omc = _closed_form_parts(omega, params)
    return -2.0 * params.g**2 * (u * k * omc - k * x * (2.0 * x + k * s)) / den


def _se_values(omega, params: SystemParams):
    w = np.asarray(omega, dtype=float)
    delta = lamb_shift_closed(w, params)
    width = local_coupling_closed(w, params) + params.gamma
    detuning = w - params.omega_0 - delta
    den = detuning**2 + 0.25 * width**2
    with np.errstate(divide="ignore", invalid="ignore"):
        s = width / (math.pi * den)
    return s, den


def se_spectrum(omega_grid, params: SystemParams) -> SpectrumTrace:
    """Emitter spontaneous-emission spectrum

        S(w) = (1/pi) Gamma_t / ([w - w_0 - Delta]^2 + [Gamma_t / 2]^2)

    with ``Gamma_t = Gamma(w) + gamma``.  This equals ``(2/pi) Re G(w)`` with
    ``G`` the Laplace transform of the emitter amplitude, so for a fully
    decaying emitter the line integrates to 2.

    Grid points where numerator and denominator vanish together (the energy
    of a bound state, e.g. w = w_0 = w_c at the vacancy point) are replaced by
    the symmetric two-sided limit.
    """
    w = np.asarray(omega_grid, dtype=float)
    s, den = _se_values(w, params)
    # both |detuning| and width/2 below 1e-8 kappa: treat as a removable 0/0 point
    bad = ~np.isfinite(s) | (den < (1e-8 * params.kappa) ** 2)
    if np.any(bad):
        step = np.min(np.diff(w)) if w.size > 1 else params.kappa
        h = 1e-3 * step
        plus, _ = _se_values(w[bad] + h, params)
        minus, _ = _se_values(w[bad] - h, params)
        s = s.copy()
        s[bad] = 0.5 * (plus + minus)
    return SpectrumTrace(w, s, SpectrumKind.SE_SPECTRUM)


def spectral_density(omega_grid, params: SystemParams) -> SpectrumTrace:
    """J(w) = (2 g^2 k / pi) [x / (x^2 + k^2/4)]^2, valid only at phi = 2 n pi."""
    if phase_distance(params.phi, 0.0) > 1e-12:
        raise PhaseOutOfDomain(f"spectral density closed form needs phi = 2 n pi, got phi={params.phi!r}")
    w = np.asarray(omega_grid, dtype=float)
    x = w - params.omega_c
    k = params.kappa
    j = (2.0 * params.g**2 * k / math.pi) * (x / (x * x + 0.25 * k * k)) ** 2
    return SpectrumTrace(w, j, SpectrumKind.SPECTRAL_DENSITY)


def response_trace(omega_grid, params: SystemParams) -> SpectrumTrace:
    w = np.asarray(omega_grid, dtype=float)
    return SpectrumTrace(w, response_chi(w, params), SpectrumKind.RESPONSE)


# ---------------------------------------------------------------------------
# peak extraction
# ---------------------------------------------------------------------------

def _half_crossing(w, y, i, half, direction):
    """Linear half-height crossing walking from index i; None if not found."""
    n = len(y)
    j = i
    while True:
        k = j + direction
        if k < 0 or k >= n:
            return None
        if y[k] <= half:
            # interpolate between j (above) and k (below)
            frac = (y[j] - half) / (y[j] - y[k])
            return w[j] + frac * (w[k] - w[j])
        if y[k] > y[j]:
            # climbing into a neighbouring peak before reaching half height
            return None
        j = k


def find_peaks(trace: SpectrumTrace, rel_prominence: float = 1e-3) -> list[PeakDescriptor]:
    """Local maxima with quadratic refinement and half-height FWHM.

    Peaks whose prominence is below ``rel_prominence`` times the trace maximum
    are ignored.  A peak is reported ``is_resolved=False`` when its half-height
    crossing runs into the grid boundary or a neighbouring peak, or when its
    width spans fewer than 8 grid points.
    """
    w = trace.omega
    y = np.real(np.asarray(trace.values))
    if w.size == 0:
        raise EmptyTrace("cannot search an empty trace")
    if w.size < 3:
        return []
    ymax = np.max(y)
    if not np.isfinite(ymax) or ymax <= 0 or np.ptp(y) <= rel_prominence * abs(ymax):
        return []
    idx, _ = _scipy_find_peaks(y, prominence=rel_prominence * ymax)
    step = np.min(np.diff(w))
    peaks = []
    for i in idx:
        # parabola through (i-1, i, i+1)
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        curv = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
        h_i = 0.5 * (w[i + 1] - w[i - 1])
        center = w[i] + shift * h_i
        height = y1 - 0.25 * (y0 - y2) * shift
        half = 0.5 * height
        left = _half_crossing(w, y, i, half, -1)
        right = _half_crossing(w, y, i, half, +1)
        if left is None or right is None:
            fwhm = float("nan")
            resolved = False
        else:
            fwhm = right - left
            resolved = fwhm >= MIN_RESOLVED_POINTS * step
        peaks.append(PeakDescriptor(float(center), float(height), float(fwhm), bool(resolved)))
    return peaks

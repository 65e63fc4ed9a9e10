"""Cavity-mediated entanglement of two emitters in the single-excitation sector.

Both emitters sit at the same ring and couple with equal strength g to the
CCW and CW modes.  Amplitudes are ordered (c_eg, c_ge, c_10, c_01), where
10 / 01 mean one photon in the CCW / CW mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhaseOutOfDomain
from .model import SystemParams, phase_distance
from .single_excitation import propagate

INITIAL_ONE_EXCITED = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)


@dataclass(frozen=True)
class TwoQubitAmplitudes:
    """Amplitude trajectory; each field is an array over ``times``."""

    times: np.ndarray
    c_eg: np.ndarray
    c_ge: np.ndarray
    c_10: np.ndarray
    c_01: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([self.c_eg, self.c_ge, self.c_10, self.c_01], axis=1)

    @property
    def concurrence(self) -> np.ndarray:
        return concurrence(self.c_eg, self.c_ge)


def effective_hamiltonian(params: SystemParams) -> np.ndarray:
    """Non-Hermitian 4x4 generator of the two-emitter single-excitation sector.

    The emitters are taken resonant with the cavity; ``params.omega_0`` is
    ignored in favour of ``omega_c``.
    """
    wc, g, k = params.omega_c, params.g, params.kappa
    lossy = wc - 0.5j * k
    return np.array(
        [
            [wc, 0, g, g],
            [0, wc, g, g],
            [g, g, lossy, 0],
            [g, g, -1j * k * params.chiral_factor, lossy],
        ],
        dtype=complex,
    )


def evolve_two_qubit(params: SystemParams, times, initial=INITIAL_ONE_EXCITED) -> TwoQubitAmplitudes:
    """Integrate i dc/dt = H_eff c from ``initial`` (default: first emitter excited)."""
    t = np.asarray(times, dtype=float)
    amps = propagate(effective_hamiltonian(params), np.asarray(initial, dtype=complex), t)
    return TwoQubitAmplitudes(t, amps[:, 0], amps[:, 1], amps[:, 2], amps[:, 3])


def analytic_coefficients(params: SystemParams, t):
    """Laplace-transform solution for (c_eg, c_ge) at phi = 2 n pi.

    Includes the free phase e^{-i w_c t}, so it is directly comparable with
    :func:`evolve_two_qubit`.
    """
    if phase_distance(params.phi, 0.0) > 1e-12:
        raise PhaseOutOfDomain(f"closed form needs phi = 2 n pi, got phi={params.phi!r}")
    g, k = params.g, params.kappa
    t = np.asarray(t, dtype=float)
    den = 16.0 * g * g + k * k
    decay = np.exp(-0.5 * k * t)
    transient = 2.0 * g * decay * (4.0 * g * np.cos(2.0 * g * t) + k * np.sin(2.0 * g * t))
    carrier = np.exp(-1j * params.omega_c * t)
    c_eg = (8.0 * g * g + k * k + transient) / den
    c_ge = (-8.0 * g * g + transient) / den
    return c_eg * carrier, c_ge * carrier


def steady_coefficients(params: SystemParams) -> tuple[float, float]:
    """Long-time limits (c_eg, c_ge) at phi = 2 n pi, without the carrier phase."""
    g2, k2 = params.g**2, params.kappa**2
    den = 16.0 * g2 + k2
    return (8.0 * g2 + k2) / den, -8.0 * g2 / den


def steady_concurrence(params: SystemParams) -> float:
    a, b = steady_coefficients(params)
    return 2.0 * abs(a * b)


def concurrence(c_eg, c_ge):
    """C = 2 |c_eg c_ge^*| for the single-excitation pure-state family."""
    out = 2.0 * np.abs(np.asarray(c_eg) * np.conj(np.asarray(c_ge)))
    return float(out) if out.ndim == 0 else out


def dark_amplitude(amps: TwoQubitAmplitudes) -> np.ndarray:
    """(c_eg - c_ge)/sqrt(2), the emitter combination that never couples to the ring."""
    return (amps.c_eg - amps.c_ge) / math.sqrt(2.0)

"""Weak-drive perturbation theory for photon blockade in the CW mode.

The emitter is driven at omega_L with strength Omega.  In the rotating frame
the amplitudes C^l_{nmp} of |n>_e |m>_ccw |p>_cw are expanded in powers of
Omega and truncated at two excitations.  Stationary amplitudes solve

    A C1 = -Omega (1, 0, 0)                       basis (100, 010, 001)
    B C2 = -Omega (0, C1_010, C1_001, 0, 0)       basis (011, 110, 101, 020, 002)

with complex detunings Delta_0 = w_0 - w_L - i gamma/2 and
Delta_c = w_c - w_L - i kappa/2.  The linear solves are the primary path; the
closed forms for C1_001, C2_002 and the determinants are kept as cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import SingularSystem
from .model import DriveParams, SystemParams

SINGULAR_RTOL = 1e-14
CROSS_CHECK_RTOL = 1e-10
SQRT2 = math.sqrt(2.0)

FIRST_ORDER_BASIS = ("100", "010", "001")
SECOND_ORDER_BASIS = ("011", "110", "101", "020", "002")


@dataclass(frozen=True)
class PerturbativeAmplitudes:
    delta_0: complex
    delta_c: complex
    c100_1: complex
    c010_1: complex
    c001_1: complex
    c011_2: Optional[complex] = None
    c110_2: Optional[complex] = None
    c101_2: Optional[complex] = None
    c020_2: Optional[complex] = None
    c002_2: Optional[complex] = None


def detunings(params: SystemParams, drive: DriveParams) -> tuple[complex, complex]:
    d0 = complex(params.omega_0 - drive.omega_L, -0.5 * params.gamma)
    dc = complex(params.omega_c - drive.omega_L, -0.5 * params.kappa)
    return d0, dc


def first_order_matrix(params: SystemParams, drive: DriveParams) -> np.ndarray:
    d0, dc = detunings(params, drive)
    g, e = params.g, params.chiral_factor
    return np.array(
        [[d0, g, g], [g, dc, 0.0], [g, -1j * params.kappa * e, dc]],
        dtype=complex,
    )


def second_order_matrix(params: SystemParams, drive: DriveParams) -> np.ndarray:
    d0, dc = detunings(params, drive)
    g, ke = params.g, params.kappa * params.chiral_factor
    s = SQRT2
    return np.array(
        [
            [2 * dc, g, g, -1j * s * ke, 0],
            [g, d0 + dc, 0, s * g, 0],
            [g, -1j * ke, d0 + dc, 0, s * g],
            [0, s * g, 0, 2 * dc, 0],
            [-1j * s * ke, 0, s * g, 0, 2 * dc],
        ],
        dtype=complex,
    )


def d1_closed(params: SystemParams, drive: DriveParams) -> complex:
    """det of the first-order matrix, expanded by hand."""
    d0, dc = detunings(params, drive)
    g, ke = params.g, params.kappa * params.chiral_factor
    return d0 * dc * dc - 2.0 * g * g * dc - 1j * ke * g * g


def d2_closed(params: SystemParams, drive: DriveParams) -> complex:
    """4 D1 [-2 g^2 + Dc (3 Dc + 2 D0)] + 4 Dc^4 (2 Dc + D0)."""
    d0, dc = detunings(params, drive)
    g2 = params.g**2
    return 4.0 * d1_closed(params, drive) * (-2.0 * g2 + dc * (3 * dc + 2 * d0)) + 4.0 * dc**4 * (2 * dc + d0)


def c001_closed(params: SystemParams, drive: DriveParams) -> complex:
    _, dc = detunings(params, drive)
    ke = params.kappa * params.chiral_factor
    return drive.Omega * params.g * (dc + 1j * ke) / d1_closed(params, drive)


def c002_closed(params: SystemParams, drive: DriveParams, c001: complex, c010: complex) -> complex:
    """Closed form of the second-order C_002 amplitude.

    The overall drive factor Omega is included here (the published expression
    lacks it, which is dimensionally inconsistent with C2 ~ Omega^2).
    """
    d0, dc = detunings(params, drive)
    g = params.g
    g2 = g * g
    ike = 1j * params.kappa * params.chiral_factor
    k2e2 = (params.kappa * params.chiral_factor) ** 2
    a = dc * (2 * dc * (dc + d0) - 3 * g2) + ike * (dc * (dc + d0) - 2 * g2)
    b = dc * g2 + ike * (dc * (3 * dc + d0) + g2) - k2e2 * (2 * dc + d0)
    return drive.Omega * 2 * SQRT2 * g / d2_closed(params, drive) * (c001 * a + c010 * b)


def _scale(params: SystemParams, drive: DriveParams) -> float:
    d0, dc = detunings(params, drive)
    return max(abs(d0), abs(dc), params.g, params.kappa)


def _check(label: str, value: complex, reference: complex, scale: float) -> None:
    if abs(value - reference) > CROSS_CHECK_RTOL * max(abs(reference), scale):
        raise ArithmeticError(f"{label}: linear solve {value!r} disagrees with closed form {reference!r}")


def first_order(params: SystemParams, drive: DriveParams) -> PerturbativeAmplitudes:
    """Single-excitation amplitudes (linear in Omega).

    Raises
    ------
    SingularSystem
        When |D1| < 1e-14 scale^3, i.e. the laser sits on a lossless bound
        state and the truncated theory diverges.
    """
    if not drive.Omega > 0.0:
        raise ValueError("first_order needs Omega > 0")
    a = first_order_matrix(params, drive)
    scale = _scale(params, drive)
    det = np.linalg.det(a)
    if abs(det) < SINGULAR_RTOL * scale**3:
        raise SingularSystem(f"|D1| = {abs(det):.3e} vanishes (drive on a lossless bound state)")
    c = np.linalg.solve(a, -drive.Omega * np.array([1.0, 0.0, 0.0], dtype=complex))
    _check("D1", det, d1_closed(params, drive), scale**3)
    _check("C1_001", c[2], c001_closed(params, drive), drive.Omega * params.g / scale)
    d0, dc = detunings(params, drive)
    return PerturbativeAmplitudes(d0, dc, complex(c[0]), complex(c[1]), complex(c[2]))


def second_order(params: SystemParams, drive: DriveParams, first: PerturbativeAmplitudes) -> PerturbativeAmplitudes:
    """Two-excitation amplitudes (quadratic in Omega), solved on top of ``first``."""
    b = second_order_matrix(params, drive)
    scale = _scale(params, drive)
    det = np.linalg.det(b)
    if abs(det) < SINGULAR_RTOL * scale**5:
        raise SingularSystem(f"|D2| = {abs(det):.3e} vanishes")
    rhs = -drive.Omega * np.array([0.0, first.c010_1, first.c001_1, 0.0, 0.0], dtype=complex)
    c = np.linalg.solve(b, rhs)
    _check("D2", det, d2_closed(params, drive), scale**5)
    ref = c002_closed(params, drive, first.c001_1, first.c010_1)
    _check("C2_002", c[4], ref, drive.Omega * abs(first.c001_1) * params.g / scale + abs(ref))
    return PerturbativeAmplitudes(
        first.delta_0,
        first.delta_c,
        first.c100_1,
        first.c010_1,
        first.c001_1,
        *(complex(x) for x in c),
    )


@dataclass(frozen=True)
class AnalyticObservables:
    I_c: float
    g2: float  # |C2_002|^2 / I_c^2, the published convention

    @property
    def g2_normal_ordered(self) -> float:
        """<c^+ c^+ c c> / I_c^2; |002> carries <c^+2 c^2> = 2."""
        return 2.0 * self.g2


def analytic_observables(params: SystemParams, drive: DriveParams) -> AnalyticObservables:
    """I_c ~ |C1_001|^2 and g2(0) ~ |C2_002|^2 / I_c^2."""
    amps = second_order(params, drive, first_order(params, drive))
    i_c = abs(amps.c001_1) ** 2
    return AnalyticObservables(i_c, abs(amps.c002_2) ** 2 / i_c**2)


@dataclass(frozen=True)
class ConventionReport:
    omega_L: np.ndarray
    analytic_g2: np.ndarray
    numeric_g2: np.ndarray
    ratio: np.ndarray  # numeric / analytic

    @property
    def factor(self) -> float:
        return float(np.median(self.ratio))

    @property
    def spread(self) -> float:
        """Relative spread of the ratio across the grid (0 for a pure constant)."""
        return float(np.ptp(self.ratio) / abs(self.factor))


def compare_g2_convention(params: SystemParams, drive: DriveParams, omega_L_grid: Sequence[float], *, n_max: int = 3):
    """Measure the constant factor between numeric and published-convention g2."""
    from .lindblad import HilbertSpace, blockade_scan

    grid = np.asarray(omega_L_grid, dtype=float)
    numeric = blockade_scan(params, drive, grid, HilbertSpace(1, n_max))
    ana = np.array([analytic_observables(params, DriveParams(drive.Omega, w)).g2 for w in grid])
    num = np.array([r.g2 for r in numeric])
    return ConventionReport(grid, ana, num, num / ana)

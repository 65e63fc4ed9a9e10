"""Physical parameter sets for the emitter + chiral microring model.

All rates and frequencies share one (arbitrary) unit; the CLI uses kappa = 1.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


def wrap_phase(phi: float) -> float:
    """Map a phase onto [0, 2 pi)."""
    r = math.fmod(float(phi), TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2 pi
    if r >= TWO_PI:
        r = 0.0
    return r + 0.0  # normalizes -0.0


def phase_distance(a: float, b: float) -> float:
    """Shortest distance between two phases on the circle."""
    d = wrap_phase(a - b)
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class SystemParams:
    """Rates and frequencies of the cavity-QED model.

    Attributes
    ----------
    omega_c : cavity resonance shared by the CCW and CW modes
    omega_0 : emitter transition frequency
    g : emitter-mode coupling (identical for both modes)
    kappa : cavity-waveguide decay rate
    phi : round-trip propagation phase to the mirror, wrapped to [0, 2 pi)
    gamma : emitter decay into non-cavity modes
    """

    omega_c: float = 0.0
    omega_0: float = 0.0
    g: float = 1.0
    kappa: float = 1.0
    phi: float = 0.0
    gamma: float = 0.0

    @property
    def chiral_factor(self) -> complex:
        """e^{i phi}; the only way phi enters any observable."""
        return complex(math.cos(self.phi), math.sin(self.phi))

    def with_(self, **changes) -> "SystemParams":
        return validate(replace(self, **changes))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DriveParams:
    """Coherent drive applied to the emitter."""

    Omega: float = 0.0
    omega_L: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def validate(params: SystemParams) -> SystemParams:
    """Check bounds and return a copy with ``phi`` wrapped to [0, 2 pi).

    Every violated bound is reported in a single :class:`ValidationError`.
    """
    violations, messages = [], []
    fields = asdict(params)
    for name, value in fields.items():
        if not math.isfinite(value):
            violations.append("NonFinite")
            messages.append(f"NonFinite: {name}={value!r}")
    if not params.kappa > 0.0:
        violations.append("NonPositiveKappa")
        messages.append(f"NonPositiveKappa: kappa={params.kappa!r} must be > 0")
    if not params.g >= 0.0:
        violations.append("NegativeCoupling")
        messages.append(f"NegativeCoupling: g={params.g!r} must be >= 0")
    if not params.gamma >= 0.0:
        violations.append("NegativeGamma")
        messages.append(f"NegativeGamma: gamma={params.gamma!r} must be >= 0")
    if violations:
        raise ValidationError(violations, messages)
    return replace(
        params,
        omega_c=float(params.omega_c),
        omega_0=float(params.omega_0),
        g=float(params.g),
        kappa=float(params.kappa),
        phi=wrap_phase(params.phi),
        gamma=float(params.gamma),
    )


def validate_drive(drive: DriveParams) -> DriveParams:
    if not (math.isfinite(drive.Omega) and drive.Omega >= 0.0):
        raise ValidationError(["NegativeDrive"], [f"NegativeDrive: Omega={drive.Omega!r} must be >= 0"])
    if not math.isfinite(drive.omega_L):
        raise ValidationError(["NonFinite"], [f"NonFinite: omega_L={drive.omega_L!r}"])
    return DriveParams(float(drive.Omega), float(drive.omega_L))


PARAM_FIELDS = ("omega_c", "omega_0", "g", "kappa", "phi", "gamma")
DRIVE_FIELDS = ("Omega", "omega_L")


def params_from_dict(data: dict) -> tuple[SystemParams, Optional[DriveParams]]:
    """Parse the flat JSON parameter schema.

    Unknown keys are ignored so the same dict may carry command sections.
    """
    kwargs = {k: data[k] for k in PARAM_FIELDS if k in data}
    for k, v in kwargs.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(["NotANumber"], [f"NotANumber: field {k!r} has value {v!r}"])
    params = validate(SystemParams(**kwargs))
    drive = None
    if any(k in data for k in DRIVE_FIELDS):
        dk = {k: data[k] for k in DRIVE_FIELDS if k in data}
        for k, v in dk.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(["NotANumber"], [f"NotANumber: field {k!r} has value {v!r}"])
        drive = validate_drive(DriveParams(**dk))
    return params, drive

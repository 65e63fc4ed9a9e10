import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiral_dbs.errors import ValidationError
from chiral_dbs.model import (
    DriveParams,
    SystemParams,
    params_from_dict,
    phase_distance,
    validate,
    validate_drive,
    wrap_phase,
)


def test_defaults_are_valid():
    p = validate(SystemParams())
    assert p.kappa == 1.0 and p.phi == 0.0


def test_all_violations_reported_together():
    with pytest.raises(ValidationError) as err:
        validate(SystemParams(kappa=0.0, g=-1.0, gamma=-0.1))
    assert set(err.value.violations) == {"NonPositiveKappa", "NegativeCoupling", "NegativeGamma"}


def test_non_finite_rejected():
    with pytest.raises(ValidationError) as err:
        validate(SystemParams(omega_c=math.nan))
    assert "NonFinite" in err.value.violations


def test_phi_wrapped():
    assert validate(SystemParams(phi=-math.pi / 2)).phi == pytest.approx(1.5 * math.pi)
    assert validate(SystemParams(phi=4 * math.pi)).phi == 0.0


def test_wrap_phase_never_negative_zero():
    assert math.copysign(1.0, wrap_phase(-0.0)) == 1.0
    assert wrap_phase(-1e-300) < 2 * math.pi


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_wrap_phase_range_and_chiral_factor(phi):
    w = wrap_phase(phi)
    assert 0.0 <= w < 2 * math.pi
    a = SystemParams(phi=phi).chiral_factor
    b = SystemParams(phi=w).chiral_factor
    assert abs(a - b) < 1e-9 * max(1.0, abs(phi))


def test_phase_distance_symmetric():
    assert phase_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
    assert phase_distance(1.0, 1.0) == 0.0


def test_with_revalidates():
    p = SystemParams().with_(phi=7.0)
    assert p.phi == pytest.approx(7.0 - 2 * math.pi)
    with pytest.raises(ValidationError):
        SystemParams().with_(kappa=-1.0)


def test_drive_validation():
    assert validate_drive(DriveParams(1, 2)) == DriveParams(1.0, 2.0)
    with pytest.raises(ValidationError):
        validate_drive(DriveParams(-1.0, 0.0))


def test_params_from_dict():
    p, d = params_from_dict({"g": 0.5, "phi": 1.0, "spectrum": {}})
    assert p.g == 0.5 and d is None
    p, d = params_from_dict({"Omega": 1e-3})
    assert d == DriveParams(1e-3, 0.0)


@pytest.mark.parametrize("bad", ["x", True, None, [1]])
def test_params_from_dict_rejects_non_numbers(bad):
    with pytest.raises(ValidationError) as err:
        params_from_dict({"g": bad})
    assert err.value.violations == ["NotANumber"]
    assert "'g'" in str(err.value)

import math

import numpy as np
import pytest

from chiral_dbs.entanglement import (
    analytic_coefficients,
    concurrence,
    dark_amplitude,
    effective_hamiltonian,
    evolve_two_qubit,
    steady_coefficients,
    steady_concurrence,
)
from chiral_dbs.errors import PhaseOutOfDomain
from chiral_dbs.model import SystemParams

from oracles import two_qubit_closed


def test_initial_state():
    a = evolve_two_qubit(SystemParams(g=1.0), [0.0])
    assert np.allclose(a.as_array()[0], [1, 0, 0, 0])
    assert a.concurrence[0] == 0.0


def test_effective_hamiltonian_structure():
    h = effective_hamiltonian(SystemParams(g=0.3, kappa=1.0, phi=0.7, omega_c=0.2))
    assert h[3, 2] == pytest.approx(-1j * np.exp(0.7j))
    assert h[2, 3] == 0
    assert np.allclose(h[0, 2:], 0.3) and np.allclose(h[1, 2:], 0.3)


@pytest.mark.parametrize("g", [0.25, 0.5, 1.0, 2.0])
def test_numeric_matches_closed_form(g):
    p = SystemParams(g=g, kappa=1.0, omega_c=0.4)
    t = np.linspace(0, 50, 2001)
    a = evolve_two_qubit(p, t)
    ce, cg = analytic_coefficients(p, t)
    assert np.abs(a.c_eg - ce).max() < 1e-8
    assert np.abs(a.c_ge - cg).max() < 1e-8
    # the oracle copy of the closed form (no carrier phase) agrees with the module's
    oe, og = two_qubit_closed(g, 1.0, t)
    carrier = np.exp(-0.4j * t)
    assert np.abs(ce - oe * carrier).max() < 1e-14 and np.abs(cg - og * carrier).max() < 1e-14


def test_closed_form_at_zero():
    ce, cg = analytic_coefficients(SystemParams(g=0.7), 0.0)
    assert ce == pytest.approx(1.0) and cg == pytest.approx(0.0, abs=1e-15)


def test_closed_form_needs_vacancy_phase():
    with pytest.raises(PhaseOutOfDomain):
        analytic_coefficients(SystemParams(phi=0.2), [0.0])


def test_long_time_limits():
    a = evolve_two_qubit(SystemParams(g=1.0), [300.0])
    assert a.c_eg[0] == pytest.approx(9 / 17, abs=1e-12)
    assert a.c_ge[0] == pytest.approx(-8 / 17, abs=1e-12)
    assert steady_coefficients(SystemParams(g=1.0)) == pytest.approx((9 / 17, -8 / 17))


def test_transient_frequency_is_2g():
    g = 1.5
    p = SystemParams(g=g, kappa=0.05)
    t = np.linspace(0, 200, 2**14, endpoint=False)
    ce, _ = analytic_coefficients(p, t)
    x = ce.real - ce.real.mean()
    freqs = np.fft.rfftfreq(t.size, t[1] - t[0]) * 2 * math.pi
    peak = freqs[np.argmax(np.abs(np.fft.rfft(x)))]
    assert peak == pytest.approx(2 * g, abs=2 * math.pi / 200)


def test_concurrence_examples():
    assert concurrence(1.0, 0.0) == 0.0
    assert steady_concurrence(SystemParams(g=1.0)) == pytest.approx(144 / 289, abs=1e-15)
    assert steady_concurrence(SystemParams(g=0.5)) == pytest.approx(0.48, abs=1e-15)


def test_steady_concurrence_monotone_and_bounded():
    vals = [steady_concurrence(SystemParams(g=g)) for g in np.linspace(0.01, 30, 300)]
    assert np.all(np.diff(vals) > 0)
    assert max(vals) < 0.5


def test_concurrence_in_unit_interval():
    a = evolve_two_qubit(SystemParams(g=0.8, phi=1.1), np.linspace(0, 40, 401))
    c = a.concurrence
    assert c.min() >= 0 and c.max() <= 1


def test_norm_non_increasing():
    a = evolve_two_qubit(SystemParams(g=0.8, phi=2.0), np.linspace(0, 40, 401))
    n = np.linalg.norm(a.as_array(), axis=1)
    assert np.all(np.diff(n) <= 1e-12)


def test_dark_component_constant_at_vacancy_phase():
    a = evolve_two_qubit(SystemParams(g=0.9, omega_c=0.3), np.linspace(0, 30, 61))
    d = dark_amplitude(a) * np.exp(0.3j * a.times)
    assert np.abs(d - 1 / math.sqrt(2)).max() < 1e-12

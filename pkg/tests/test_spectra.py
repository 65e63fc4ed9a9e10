import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiral_dbs.errors import EmptyTrace, PhaseOutOfDomain
from chiral_dbs.model import SystemParams
from chiral_dbs.single_excitation import fw_solve
from chiral_dbs.spectra import (
    SpectrumKind,
    SpectrumTrace,
    default_grid,
    find_peaks,
    lamb_shift,
    lamb_shift_closed,
    local_coupling,
    local_coupling_closed,
    response_chi,
    se_spectrum,
    spectral_density,
)

from oracles import mc_dense, resolvent_spectrum, spectrum_maxima


def test_chi_examples():
    assert response_chi(0.0, SystemParams(phi=0.0)) == 0
    assert response_chi(0.0, SystemParams(phi=math.pi)) == pytest.approx(-8j, abs=1e-14)
    assert response_chi(0.5, SystemParams(phi=0.0)) == pytest.approx(-2j, abs=1e-14)


def test_chi_lorentz_part():
    p = SystemParams(phi=1.2, kappa=0.7, omega_c=0.3)
    w = np.linspace(-3, 3, 11)
    lorentz = response_chi(w, p, cascade=False)
    assert np.allclose(lorentz, 2 / (w - 0.3 + 0.35j))
    extra = response_chi(w, p) - lorentz
    assert np.allclose(extra, -1j * 0.7 * np.exp(1.2j) / (w - 0.3 + 0.35j) ** 2)


def test_shift_and_coupling_examples():
    g = 0.7
    assert lamb_shift(0.0, SystemParams(g=g)) == 0 and local_coupling(0.0, SystemParams(g=g)) == 0
    assert local_coupling(0.0, SystemParams(g=g, phi=math.pi)) == pytest.approx(16 * g * g)
    assert local_coupling(0.5, SystemParams(g=g)) == pytest.approx(4 * g * g)
    assert lamb_shift(0.5, SystemParams(g=g)) == pytest.approx(0.0, abs=1e-15)


def test_closed_forms_random_samples():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = SystemParams(g=rng.uniform(0, 3), kappa=rng.uniform(0.1, 3), phi=rng.uniform(0, 2 * math.pi),
                         omega_c=rng.normal())
        w = rng.normal(scale=3)
        scale = p.g**2 / p.kappa
        assert abs(lamb_shift(w, p) - lamb_shift_closed(w, p)) <= 1e-12 * max(abs(lamb_shift(w, p)), scale)
        assert abs(local_coupling(w, p) - local_coupling_closed(w, p)) <= 1e-12 * max(abs(local_coupling(w, p)), scale)


@settings(max_examples=100, deadline=None)
@given(g=st.floats(0, 5), kappa=st.floats(0.05, 5), w=st.floats(-20, 20), n=st.integers(-3, 3))
def test_coupling_nonnegative_at_vacancy_phase(g, kappa, w, n):
    p = SystemParams(g=g, kappa=kappa, phi=2 * math.pi * n)
    assert local_coupling_closed(w, p) >= -1e-12 * (g * g / kappa)


def test_spectral_density_examples():
    g = 0.8
    j = spectral_density(np.array([-0.5, 0.0, 0.5]), SystemParams(g=g))
    assert j.values[1] == 0.0
    assert j.values[0] == pytest.approx(2 * g * g / math.pi)
    assert j.values[2] == pytest.approx(2 * g * g / math.pi)
    assert j.kind is SpectrumKind.SPECTRAL_DENSITY


def test_spectral_density_wrong_phase():
    with pytest.raises(PhaseOutOfDomain):
        spectral_density(np.linspace(-1, 1, 5), SystemParams(phi=0.1))


@pytest.mark.parametrize("phi", [0.0, 0.5 * math.pi, math.pi, 4.0])
@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_se_spectrum_matches_resolvent_oracle(phi, g):
    p = SystemParams(g=g, kappa=1.0, phi=phi, omega_0=0.2, gamma=0.03)
    w = np.linspace(-6, 6, 1201)
    ours = se_spectrum(w, p).values
    ref = resolvent_spectrum(w, mc_dense(0, 0.2, g, 1.0, phi, 0.03))
    assert np.abs(ours - ref).max() <= 1e-9 * ref.max()


def test_se_spectrum_nonnegative_and_finite_on_default_grid():
    for phi in (0.0, 1.0, math.pi):
        p = SystemParams(g=1.0, phi=phi)
        s = se_spectrum(default_grid(p), p)
        assert np.all(np.isfinite(s.values))
        assert s.values.min() >= -1e-12


def test_se_spectrum_removable_point_at_vacancy():
    p = SystemParams(g=1.0)
    w = np.linspace(-1, 1, 201)
    s = se_spectrum(w, p).values
    assert np.isfinite(s[100]) and s[100] == pytest.approx(0.5 * (s[99] + s[101]), rel=1e-3)


def test_se_spectrum_integral_is_two():
    # S = (2/pi) Re G integrates to 2 for a fully decaying emitter
    p = SystemParams(g=1.0, phi=0.5 * math.pi)
    w = np.linspace(-2000, 2000, 800001)
    assert se_spectrum(w, p).integral() == pytest.approx(2.0, rel=2e-3)


def test_default_grid():
    w = default_grid(SystemParams(g=1.0, omega_c=0.5))
    assert len(w) == 4001 and w[0] == pytest.approx(-6.5) and w[-1] == pytest.approx(7.5)


def test_trace_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        SpectrumTrace(np.array([0.0, 0.0, 1.0]), np.zeros(3), SpectrumKind.SE_SPECTRUM)


# --- peaks -----------------------------------------------------------------------

def test_lorentzian_peak_fwhm():
    w = np.arange(-2, 2 + 1e-12, 0.005)
    y = 0.05**2 / ((w - 0.123) ** 2 + 0.05**2)
    peaks = find_peaks(SpectrumTrace(w, y, SpectrumKind.SE_SPECTRUM))
    assert len(peaks) == 1
    assert peaks[0].center == pytest.approx(0.123, abs=0.005)
    assert peaks[0].fwhm == pytest.approx(0.1, rel=0.02)
    assert peaks[0].is_resolved


def test_flat_and_empty_traces():
    w = np.linspace(0, 1, 11)
    assert find_peaks(SpectrumTrace(w, np.ones(11), SpectrumKind.SE_SPECTRUM)) == []
    with pytest.raises(EmptyTrace):
        find_peaks(SpectrumTrace(np.array([]), np.array([]), SpectrumKind.SE_SPECTRUM))


def test_narrow_peak_unresolved():
    w = np.linspace(-1, 1, 401)
    y = 1e-4**2 / (w**2 + 1e-4**2) + 1e-3
    (peak,) = find_peaks(SpectrumTrace(w, y, SpectrumKind.SE_SPECTRUM))
    assert not peak.is_resolved


def test_edge_peak_unresolved():
    w = np.linspace(0, 1, 201)
    y = 0.1**2 / ((w - 0.02) ** 2 + 0.1**2)
    peaks = find_peaks(SpectrumTrace(w, y, SpectrumKind.SE_SPECTRUM))
    assert len(peaks) == 1 and not peaks[0].is_resolved


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_vacancy_peaks_match_oracle_maxima(g):
    p = SystemParams(g=g, kappa=1.0)
    w = default_grid(p)
    peaks = find_peaks(se_spectrum(w, p))
    ref = spectrum_maxima(mc_dense(0, 0, g, 1.0, 0.0), w[0], w[-1])
    assert len(peaks) == 2 == len(ref)
    step = w[1] - w[0]
    assert np.abs(np.sort([pk.center for pk in peaks]) - np.sort(ref)).max() < step
    # the maxima sit at +-sqrt(2 g^2 - kappa^2/4), inside the eigenvalue positions +-sqrt(2) g
    assert np.abs(np.abs(ref) - math.sqrt(2 * g * g - 0.25)).max() < 1e-6


def test_vacancy_eigenvalues_at_sqrt2_g():
    ev = np.linalg.eigvals(mc_dense(0, 0, 1.0, 1.0, 0.0))
    assert np.abs(np.sort(ev.real) - [-math.sqrt(2), 0, math.sqrt(2)]).max() < 1e-12


@pytest.mark.parametrize("g", [1.0, 2.0, 5.0])
def test_fw_spectrum_has_no_peak_at_bound_energy(g):
    sol = fw_solve(g, 1.0)
    p = SystemParams(g=g, kappa=1.0, phi=sol.phi_fw)
    w = default_grid(p)
    trace = se_spectrum(w, p)
    peaks = find_peaks(trace, rel_prominence=1e-6)
    step = w[1] - w[0]
    assert peaks
    assert all(abs(pk.center - sol.omega_fw) > 10 * step for pk in peaks)
    ref = spectrum_maxima(mc_dense(0, 0, g, 1.0, sol.phi_fw), w[0], w[-1])
    assert len(peaks) == len(ref)


def test_fw_visible_peak_count():
    # one maximum at g = kappa (the broad partner is only a shoulder); two from g = 2 kappa
    counts = {}
    for g in (1.0, 2.0):
        p = SystemParams(g=g, phi=fw_solve(g, 1.0).phi_fw)
        counts[g] = len(find_peaks(se_spectrum(default_grid(p), p), rel_prominence=1e-6))
    assert counts == {1.0: 1, 2.0: 2}


def test_se_spectrum_limit_at_on_grid_fw_energy():
    p = SystemParams(g=0.5, phi=0.5 * math.pi)  # bound state at w = -0.5
    w = np.linspace(-6, 6, 1201)
    s = se_spectrum(w, p).values
    i = np.argmin(np.abs(w + 0.5))
    assert s[i] == pytest.approx(0.5 * (s[i - 1] + s[i + 1]), rel=1e-3)

"""Single-excitation (amplitude) dynamics of the emitter + CCW/CW modes.

The amplitude vector is ``p = (<sigma_->, <c_ccw>, <c_cw>)`` and obeys
``dp/dt = -i M_c p``.  ``M_c`` is non-Hermitian; its real eigenvalues are the
dressed bound states (DBS).  Two kinds exist:

* vacancy-like: ``phi = 2 n pi``, energy ``omega_c`` for any ``g``;
* Friedrich-Wintgen (FW): ``phi = phi_FW(g/kappa)``, energy
  ``omega_c +- sqrt(8 g^2 - kappa^2) / 2``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import NoBoundState, WrongBasis
from .model import TWO_PI, SystemParams, phase_distance, validate, wrap_phase

SQRT2 = math.sqrt(2.0)

# p_traveling = STANDING_TO_TRAVELING @ s_standing, with
# c_ccw = (c1 - c2)/sqrt2 and c_cw = (c1 + c2)/sqrt2
STANDING_TO_TRAVELING = np.array(
    [[1.0, 0.0, 0.0],
     [0.0, 1.0 / SQRT2, -1.0 / SQRT2],
     [0.0, 1.0 / SQRT2, 1.0 / SQRT2]],
    dtype=complex,
)
TRAVELING_TO_STANDING = STANDING_TO_TRAVELING.T.copy()  # orthogonal and real

DEFECT_GAP_RTOL = 1e-8
DEFECT_NORM_TOL = 1e-10
VACANCY_PHASE_TOL = 1e-12


class Basis(str, enum.Enum):
    TRAVELING = "traveling"  # (sigma, c_ccw, c_cw)
    STANDING = "standing"    # (sigma, c_1, c_2)


@dataclass(frozen=True)
class SingleExcitationMatrix:
    entries: np.ndarray
    basis: Basis = Basis.TRAVELING

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def build_mc(params: SystemParams, *, cascade: bool = True) -> SingleExcitationMatrix:
    """Traveling-basis generator ``M_c``.

    The emitter diagonal is ``omega_0 - i gamma/2``.  ``cascade=False`` drops
    the mirror-induced ``-i kappa e^{i phi}`` CCW -> CW term, which gives the
    plain two-mode (Lorentz) cavity.
    """
    p = params
    dc = p.omega_c - 0.5j * p.kappa
    m = np.array(
        [[p.omega_0 - 0.5j * p.gamma, p.g, p.g],
         [p.g, dc, 0.0],
         [p.g, -1j * p.kappa * p.chiral_factor if cascade else 0.0, dc]],
        dtype=complex,
    )
    return SingleExcitationMatrix(m, Basis.TRAVELING)


def to_standing_basis(m: SingleExcitationMatrix) -> SingleExcitationMatrix:
    """Similarity transform into the standing-wave basis (sigma, c1, c2)."""
    if m.basis is not Basis.TRAVELING:
        raise WrongBasis(f"matrix is already in the {m.basis.value} basis")
    ms = TRAVELING_TO_STANDING @ m.entries @ STANDING_TO_TRAVELING
    return SingleExcitationMatrix(ms, Basis.STANDING)


def build_ms(params: SystemParams) -> SingleExcitationMatrix:
    return to_standing_basis(build_mc(params))


def coupling_row(params: SystemParams) -> np.ndarray:
    """D = (0, sqrt(kappa/2), sqrt(kappa/2) e^{-i phi}); Gamma = D^dagger D."""
    s = math.sqrt(params.kappa / 2.0)
    return np.array([0.0, s, s * np.conj(params.chiral_factor)], dtype=complex)


def dissipator_matrix(params: SystemParams) -> np.ndarray:
    d = coupling_row(params)
    return np.outer(d.conj(), d)


def hermitian_part(params: SystemParams) -> np.ndarray:
    """H_B such that M_c = H_B - i D^dagger D (for gamma = 0)."""
    p = params
    e = p.chiral_factor
    return np.array(
        [[p.omega_0, p.g, p.g],
         [p.g, p.omega_c, 0.5j * p.kappa * np.conj(e)],
         [p.g, -0.5j * p.kappa * e, p.omega_c]],
        dtype=complex,
    )


# ---------------------------------------------------------------------------
# spectral decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenSystem:
    """Right/left eigen-decomposition of a non-Hermitian matrix.

    ``right_vectors[:, k]`` and ``left_vectors[k, :]`` are unit-norm and
    satisfy ``M R_k = lambda_k R_k`` and ``L_k M = lambda_k L_k``.
    ``biorthogonal_norms[k] = L_k . R_k`` (no conjugation).
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    biorthogonal_norms: np.ndarray
    defective: bool

    def coefficients(self, p0) -> np.ndarray:
        """Expansion weights c_k with p0 = sum_k c_k R_k."""
        return (self.left_vectors @ np.asarray(p0, dtype=complex)) / self.biorthogonal_norms


def eigensystem(m) -> EigenSystem:
    """Eigenvalues sorted by real part, with paired left eigenvectors.

    The result is flagged ``defective`` (not an error) when two eigenvalues
    nearly coalesce or a biorthogonal norm underflows, e.g. at the chiral
    exceptional point itself (g = 0), where the cavity block is a Jordan block.
    """
    a = np.asarray(m, dtype=complex)
    w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    order = np.lexsort((w.imag, w.real))
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    vr = vr / np.linalg.norm(vr, axis=0)
    left = vl.conj().T
    left = left / np.linalg.norm(left, axis=1)[:, None]
    norms = np.einsum("ki,ik->k", left, vr)

    scale = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
    gaps = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(len(w), np.inf))
    defective = bool(gaps.min() < DEFECT_GAP_RTOL * scale or np.abs(norms).min() < DEFECT_NORM_TOL)
    return EigenSystem(w, vr, left, norms, defective)


def propagate(m, p0, times) -> np.ndarray:
    """Amplitudes p(t) = exp(-i M t) p0 on a time grid; shape (len(times), n).

    Uses the biorthogonal eigen-expansion, falling back to scaling-and-squaring
    matrix exponentials when the matrix is (nearly) defective.
    """
    a = np.asarray(m, dtype=complex)
    p0 = np.asarray(p0, dtype=complex)
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or (t.size and t[0] < 0) or np.any(np.diff(t) < 0):
        raise ValueError("times must be a 1-D ascending grid starting at t >= 0")
    es = eigensystem(a)
    if not es.defective:
        c = es.coefficients(p0)
        phases = np.exp(-1j * np.outer(t, es.eigenvalues))
        return (phases * c) @ es.right_vectors.T
    out = np.empty((t.size, a.shape[0]), dtype=complex)
    prev_t, state = 0.0, p0
    for i, ti in enumerate(t):
        dt = ti - prev_t
        if dt > 0:
            state = scipy.linalg.expm(-1j * dt * a) @ state
        out[i] = state
        prev_t = ti
    return out


def evolve(m: SingleExcitationMatrix, p0, times) -> np.ndarray:
    return propagate(m.entries, p0, times)


def long_time_amplitude(m, p0, tol: float = 1e-10) -> np.ndarray:
    """Component of p0 that never decays: projection onto real eigenvalues.

    Returned at t = 0; the physical amplitude keeps rotating with the bound
    energies but its modulus is time independent.
    """
    a = np.asarray(m, dtype=complex)
    es = eigensystem(a)
    if es.defective:
        raise ValueError("long-time projection needs a diagonalizable matrix")
    scale = max(1.0, np.linalg.norm(a, 2))
    bound = np.abs(es.eigenvalues.imag) < tol * scale
    c = es.coefficients(p0)
    return es.right_vectors[:, bound] @ c[bound]


def track_modes(matrices: Sequence) -> np.ndarray:
    """Eigenvalues along a parameter sweep, continuously matched.

    Row i holds the eigenvalues of ``matrices[i]``; column j follows the mode
    whose right eigenvector overlaps most with column j of the previous point.
    """
    result, prev_vecs = [], None
    for m in matrices:
        es = eigensystem(m)
        vals, vecs = es.eigenvalues, es.right_vectors
        if prev_vecs is not None:
            overlap = np.abs(prev_vecs.conj().T @ vecs)
            _, cols = linear_sum_assignment(-overlap)
            vals, vecs = vals[cols], vecs[:, cols]
        result.append(vals)
        prev_vecs = vecs
    return np.array(result)


# ---------------------------------------------------------------------------
# vacancy-like DBS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VacancyResult:
    is_vacancy: bool
    eigenstate: Optional[np.ndarray]  # standing basis (sigma, c1, c2)
    energy: Optional[float]
    qe_resonant: bool


def vacancy_state(g: float, kappa: float) -> np.ndarray:
    """Normalized standing-basis vacancy eigenvector (-i kappa, 0, 2 sqrt2 g)."""
    n = math.sqrt(8.0 * g * g + kappa * kappa)
    return np.array([-1j * kappa / n, 0.0, 2.0 * SQRT2 * g / n], dtype=complex)


def vacancy_condition(params: SystemParams) -> VacancyResult:
    """Vacancy-like DBS exists iff phi = 2 n pi, for any coupling g.

    The energy ``omega_c`` is that of the bare emitter, so the stated
    eigenstate is exact only when ``omega_0 = omega_c`` (``qe_resonant``).
    """
    p = validate(params)
    resonant = math.isclose(p.omega_0, p.omega_c, rel_tol=0.0, abs_tol=1e-12 * p.kappa)
    if phase_distance(p.phi, 0.0) > VACANCY_PHASE_TOL:
        return VacancyResult(False, None, None, resonant)
    return VacancyResult(True, vacancy_state(p.g, p.kappa), p.omega_c, resonant)


# ---------------------------------------------------------------------------
# Friedrich-Wintgen DBS
# ---------------------------------------------------------------------------

class Branch(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1


@dataclass(frozen=True)
class FWSolution:
    omega_fw: float
    phi_fw: float
    branch: Branch
    qe_amplitude_alpha: complex
    null_vector: np.ndarray = field(repr=False)
    coincides_with_vacancy: bool = False


def _fw_discriminant(g: float, kappa: float) -> float:
    disc = 8.0 * g * g - kappa * kappa
    if disc < -1e-14 * kappa * kappa:
        raise NoBoundState(f"8 g^2 < kappa^2 (g={g!r}, kappa={kappa!r}): no Friedrich-Wintgen DBS")
    return max(disc, 0.0)


def fw_phase(g: float, kappa: float, branch: Branch = Branch.PLUS) -> float:
    """phi_FW from the principal complex logarithm, wrapped to [0, 2 pi).

    The sign in the logarithm's argument matches the sign of the energy
    offset; the pairing is verified against the eigenvalues of M_c.
    """
    branch = Branch(branch)
    root = math.sqrt(_fw_discriminant(g, kappa))
    z = -complex(4 * g * g - kappa * kappa, branch.sign * kappa * root) / (4 * g * g)
    # |z| = 1, so -i ln z reduces to the principal argument
    return wrap_phase(cmath.phase(z))


def fw_energy(g: float, kappa: float, omega_c: float = 0.0, branch: Branch = Branch.PLUS) -> float:
    root = math.sqrt(_fw_discriminant(g, kappa))
    return omega_c + Branch(branch).sign * 0.5 * root


def fw_solve(g: float, kappa: float, omega_c: float = 0.0, branch: Branch = Branch.PLUS) -> FWSolution:
    """Energy, phase and null vector of the Friedrich-Wintgen bound state.

    Raises
    ------
    NoBoundState
        If 8 g^2 < kappa^2.
    """
    branch = Branch(branch)
    omega_fw = fw_energy(g, kappa, omega_c, branch)
    phi_fw = fw_phase(g, kappa, branch)
    params = validate(SystemParams(omega_c=omega_c, omega_0=omega_c, g=g, kappa=kappa, phi=phi_fw))

    # H_B (alpha, -e^{-i phi}, 1)^T = omega_fw (...): third row fixes alpha
    alpha = (omega_fw - omega_c - 0.5j * kappa) / g
    psi0 = np.array([alpha, -np.conj(params.chiral_factor), 1.0], dtype=complex)

    residual = np.abs(hermitian_part(params) @ psi0 - omega_fw * psi0).max()
    ev = np.linalg.eigvals(build_mc(params).entries)
    k = np.argmin(np.abs(ev - omega_fw))
    tol = 1e-10 * max(kappa, 1e-300) * max(1.0, abs(g) / kappa)
    if residual > tol * max(1.0, abs(alpha)) or abs(ev[k].imag) > tol or abs(ev[k].real - omega_fw) > tol:
        raise ArithmeticError(
            f"FW postcondition failed: residual={residual:.3e}, eigenvalue={ev[k]!r}, omega_fw={omega_fw!r}"
        )
    edge = 8.0 * g * g - kappa * kappa <= 1e-14 * kappa * kappa
    return FWSolution(omega_fw, phi_fw, branch, complex(alpha), psi0, bool(edge))


def fw_solutions(g: float, kappa: float, omega_c: float = 0.0) -> list[FWSolution]:
    """Both branches, or an empty list when no FW state exists."""
    try:
        return [fw_solve(g, kappa, omega_c, b) for b in Branch]
    except NoBoundState:
        return []


def fw_rabi_eigenvalue(g: float, kappa: float, omega_c: float = 0.0, branch: Branch = Branch.PLUS) -> complex:
    """Narrowest decaying eigenvalue of M_c at the FW condition.

    This is the remaining visible Rabi peak once its partner has turned into
    the bound state.
    """
    sol = fw_solve(g, kappa, omega_c, branch)
    params = SystemParams(omega_c=omega_c, omega_0=omega_c, g=g, kappa=kappa, phi=sol.phi_fw)
    ev = np.linalg.eigvals(build_mc(params).entries)
    decaying = ev[np.argsort(np.abs(ev - sol.omega_fw))[1:]]
    return complex(decaying[np.argmin(np.abs(decaying.imag))])

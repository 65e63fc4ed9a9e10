"""Truncated Fock-space master-equation engine.

State ordering is ``qubit_1 (x) ... (x) qubit_n (x) CCW (x) CW`` and density
matrices are vectorized by column stacking, ``vec(A rho B) = (B^T (x) A) vec(rho)``.

The generator implements the extended cascaded master equation

    d rho/dt = -i[H, rho] + k L[c_ccw] rho + k L[c_cw] rho
               + k (e^{i phi} [c_ccw rho, c_cw^+] + e^{-i phi} [c_cw, rho c_ccw^+])
               + gamma sum_j L[sigma_j] rho

where the second line is the mirror feeding the CCW output back into the CW
mode.  With a drive the Hamiltonian is taken in the frame rotating at omega_L.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateSteadyState, DimensionGuard, PositivityViolation, UniqueSteadyStateRequiresDrive
from .model import DriveParams, SystemParams
from .spectra import SpectrumKind, SpectrumTrace

MAX_DIM = 4096
DEFAULT_BLOCKADE_NMAX = 3


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HilbertSpace:
    n_qubits: int = 1
    n_max: int = 1

    def __post_init__(self):
        if self.n_qubits < 0 or self.n_max < 1:
            raise ValueError("need n_qubits >= 0 and n_max >= 1")
        if self.total_dim > MAX_DIM:
            raise DimensionGuard(f"total dimension {self.total_dim} exceeds {MAX_DIM}")

    @property
    def qubit_dims(self) -> list[int]:
        return [2] * self.n_qubits

    @property
    def dims(self) -> list[int]:
        return self.qubit_dims + [self.n_max + 1, self.n_max + 1]

    @property
    def total_dim(self) -> int:
        return 2**self.n_qubits * (self.n_max + 1) ** 2

    def index(self, qubits: Sequence[int] = (), ccw: int = 0, cw: int = 0) -> int:
        """Flat index of |q_1 ... q_n, ccw, cw> (q = 1 means excited)."""
        qubits = tuple(qubits) or (0,) * self.n_qubits
        if len(qubits) != self.n_qubits:
            raise ValueError(f"expected {self.n_qubits} qubit labels")
        idx = 0
        for q, d in zip(qubits + (ccw, cw), self.dims):
            if not 0 <= q < d:
                raise ValueError(f"label {q} out of range for dimension {d}")
            idx = idx * d + q
        return idx

    def ket(self, qubits: Sequence[int] = (), ccw: int = 0, cw: int = 0) -> np.ndarray:
        v = np.zeros(self.total_dim, dtype=complex)
        v[self.index(qubits, ccw, cw)] = 1.0
        return v


@dataclass(frozen=True)
class Operators:
    sigma_minus: list
    c_ccw: sp.csr_matrix
    c_cw: sp.csr_matrix
    space: HilbertSpace

    @property
    def identity(self):
        return sp.identity(self.space.total_dim, dtype=complex, format="csr")


def _embed(local, position: int, dims: list[int]):
    mats = [sp.identity(d, dtype=complex, format="csr") for d in dims]
    mats[position] = sp.csr_matrix(local, dtype=complex)
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def destroy(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def build_operators(space: HilbertSpace) -> Operators:
    dims = space.dims
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|, with |e> = index 1
    sigmas = [_embed(lower, j, dims) for j in range(space.n_qubits)]
    a = destroy(space.n_max + 1)
    return Operators(sigmas, _embed(a, space.n_qubits, dims), _embed(a, space.n_qubits + 1, dims), space)


# ---------------------------------------------------------------------------
# superoperators
# ---------------------------------------------------------------------------

def spre(a):
    n = a.shape[0]
    return sp.kron(sp.identity(n, dtype=complex), a, format="csr")


def spost(b):
    n = b.shape[0]
    return sp.kron(sp.csr_matrix(b).T, sp.identity(n, dtype=complex), format="csr")


def lindblad_dissipator(a):
    """L[a] rho = a rho a^+ - {a^+ a, rho}/2."""
    ad = a.conj().T
    ada = ad @ a
    return spre(a) @ spost(ad) - 0.5 * (spre(ada) + spost(ada))


def commutator_super(h):
    return -1j * (spre(h) - spost(h))


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(frozen=True)
class Superoperator:
    matrix: sp.csr_matrix
    space: HilbertSpace

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace_row(self) -> np.ndarray:
        return vec(np.eye(self.space.total_dim, dtype=complex))

    def __matmul__(self, v):
        return self.matrix @ v


def hamiltonian(params: SystemParams, ops: Operators, drive: Optional[DriveParams] = None):
    """H = H_0 + H_I (+ drive), in the frame rotating at omega_L if driven."""
    shift = drive.omega_L if drive is not None else 0.0
    cc, cw = ops.c_ccw, ops.c_cw
    h = (params.omega_c - shift) * (cc.conj().T @ cc + cw.conj().T @ cw)
    for s in ops.sigma_minus:
        sd = s.conj().T
        h = h + (params.omega_0 - shift) * (sd @ s)
        h = h + params.g * (cc.conj().T @ s + sd @ cc + cw.conj().T @ s + sd @ cw)
        if drive is not None and drive.Omega != 0.0:
            h = h + drive.Omega * (sd + s)
    return sp.csr_matrix(h)


def build_generator(
    params: SystemParams,
    drive: Optional[DriveParams] = None,
    space: Optional[HilbertSpace] = None,
    *,
    cascade: bool = True,
) -> Superoperator:
    """Master-equation generator with d vec(rho)/dt = L vec(rho).

    ``cascade=False`` removes the chiral mirror term, leaving two independent
    decaying modes (the Lorentz-cavity baseline).
    """
    space = space or HilbertSpace()
    ops = build_operators(space)
    cc, cw = ops.c_ccw, ops.c_cw
    k = params.kappa
    gen = commutator_super(hamiltonian(params, ops, drive))
    gen = gen + k * lindblad_dissipator(cc) + k * lindblad_dissipator(cw)
    if cascade:
        e = params.chiral_factor
        ccd, cwd = cc.conj().T, cw.conj().T
        # e^{i phi} [c_ccw rho, c_cw^+] + e^{-i phi} [c_cw, rho c_ccw^+]
        chiral = e * (spre(cc) @ spost(cwd) - spre(cwd @ cc))
        chiral = chiral + np.conj(e) * (spre(cw) @ spost(ccd) - spost(ccd @ cw))
        gen = gen + k * chiral
    if params.gamma > 0.0:
        for s in ops.sigma_minus:
            gen = gen + params.gamma * lindblad_dissipator(s)
    return Superoperator(sp.csr_matrix(gen), space)


# ---------------------------------------------------------------------------
# states and time evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    space: HilbertSpace

    @classmethod
    def pure(cls, space: HilbertSpace, qubits: Sequence[int] = (), ccw: int = 0, cw: int = 0):
        v = space.ket(qubits, ccw, cw)
        return cls(np.outer(v, v.conj()), space)

    @classmethod
    def from_ket(cls, space: HilbertSpace, ket):
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), space)

    def expect(self, op) -> complex:
        return complex((op @ self.matrix).trace() if sp.issparse(op) else np.trace(op @ self.matrix))

    def check(self, herm_tol=1e-10, trace_tol=1e-10, pos_tol=1e-8) -> None:
        m = self.matrix
        if np.abs(m - m.conj().T).max() > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > trace_tol:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -pos_tol:
            raise PositivityViolation("density matrix has a negative eigenvalue")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), d, d)
    space: HilbertSpace
    trace_error: np.ndarray = field(repr=False)  # |tr rho - 1| before renormalization
    hermiticity_error: np.ndarray = field(repr=False)

    def expect(self, op) -> np.ndarray:
        a = op.toarray() if sp.issparse(op) else np.asarray(op)
        return np.einsum("ij,tji->t", a, self.states)


def _propagate_vectors(gen, v0, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) < 0):
        raise ValueError("times must be a non-empty ascending grid with t >= 0")
    a = sp.csc_matrix(gen)
    v = np.asarray(v0, dtype=complex)
    if t[0] > 0:
        v = spla.expm_multiply(a * t[0], v)
    steps = np.diff(t)
    if t.size > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0.0) and steps[0] > 0:
        return spla.expm_multiply(a, v, start=t[0], stop=t[-1], num=t.size, endpoint=True)
    out = np.empty((t.size, v.size), dtype=complex)
    out[0] = v
    for i, dt in enumerate(steps, start=1):
        if dt > 0:
            v = spla.expm_multiply(a * dt, v)
        out[i] = v
    return out


def integrate(gen: Superoperator, rho0: DensityMatrix, times, *, positivity_tol: float = 1e-6) -> Trajectory:
    """Evolve rho0 (given at t = 0) and report it on ``times``.

    The propagator is applied with an adaptive truncated-Taylor matrix
    exponential, accurate to double precision.  Each output state has its raw
    trace and Hermiticity errors recorded, then is Hermitized and
    renormalized.

    Raises
    ------
    PositivityViolation
        If any state has an eigenvalue below ``-positivity_tol``.
    """
    d = gen.space.total_dim
    vs = _propagate_vectors(gen.matrix, vec(rho0.matrix), times)
    states = np.empty((len(vs), d, d), dtype=complex)
    tr_err = np.empty(len(vs))
    herm_err = np.empty(len(vs))
    for i, v in enumerate(vs):
        m = unvec(v, d)
        tr = np.trace(m)
        tr_err[i] = abs(tr - 1.0)
        herm_err[i] = np.abs(m - m.conj().T).max()
        m = 0.5 * (m + m.conj().T)
        m = m / tr.real
        lam = np.linalg.eigvalsh(m).min()
        if lam < -positivity_tol:
            raise PositivityViolation(f"min eigenvalue {lam:.3e} at t={times[i]!r}")
        states[i] = m
    return Trajectory(np.asarray(times, dtype=float), states, gen.space, tr_err, herm_err)


def steady_state(gen: Superoperator, *, method: str = "lu") -> DensityMatrix:
    """Unique stationary state of the generator.

    The default (``method="lu"``) is a sparse LU solve of the bordered system
    ``(L + b t^T) x = b``, with ``t`` the trace functional and ``b`` the
    vacuum population.  Since ``t^T L = 0`` the stationary state solves it,
    and the matrix is regular exactly when the null space is one-dimensional;
    a condition estimate above 1e13 is treated as non-uniqueness.  This keeps
    componentwise accuracy for tiny multi-photon populations (~1e-14 under
    weak drive), which the dense SVD route loses.

    ``method="svd"`` takes the smallest right singular vector and rejects the
    result when the two smallest singular values are within 1e-9.

    Raises
    ------
    DegenerateSteadyState
        The null space is not one-dimensional.  Bound states without any
        emitter loss (gamma = 0) produce this.
    """
    n = gen.dim
    d = gen.space.total_dim
    t = gen.trace_row()
    if method == "svd":
        dense = gen.matrix.toarray()
        _, s, vh = np.linalg.svd(dense)
        if s[-2] - s[-1] < 1e-9 * max(1.0, s[0]):
            raise DegenerateSteadyState(
                f"two smallest singular values {s[-2]:.3e}, {s[-1]:.3e} are not separated"
            )
        x = vh[-1].conj()
    elif method == "lu":
        b = np.zeros(n, dtype=complex)
        b[0] = 1.0  # |vac><vac| sits at vec index 0
        a = sp.csc_matrix(gen.matrix + sp.csr_matrix(np.outer(b, t)))
        try:
            lu = spla.splu(a)
        except RuntimeError as exc:
            raise DegenerateSteadyState(str(exc)) from exc
        inv = spla.LinearOperator(
            a.shape, matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="H"), dtype=complex
        )
        cond = spla.onenormest(inv) * spla.norm(a, 1)
        if not np.isfinite(cond) or cond > 1e13:
            raise DegenerateSteadyState(f"bordered generator is ill-conditioned (cond ~ {cond:.2e})")
        x = lu.solve(b)
        # one step of iterative refinement
        x = x + lu.solve(b - a @ x)
    else:
        raise ValueError(f"unknown method {method!r}")

    rho = unvec(x, d)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    resid = np.linalg.norm(gen.matrix @ vec(rho))
    if resid > 1e-9 * max(1.0, spla.norm(gen.matrix, 1)):
        raise DegenerateSteadyState(f"steady-state residual {resid:.3e} too large")
    return DensityMatrix(rho, gen.space)


# ---------------------------------------------------------------------------
# two-time correlations
# ---------------------------------------------------------------------------

def correlation(gen: Superoperator, rho_init: DensityMatrix, a_op, b_op, tau_grid) -> np.ndarray:
    """<A(tau) B(0)> from the quantum regression theorem.

    ``B rho_init`` is propagated with the same generator and traced against A.
    """
    d = gen.space.total_dim
    a = a_op.toarray() if sp.issparse(a_op) else np.asarray(a_op)
    b = b_op.toarray() if sp.issparse(b_op) else np.asarray(b_op)
    x0 = vec(b @ rho_init.matrix)
    vs = _propagate_vectors(gen.matrix, x0, tau_grid)
    # tr(A X) = vec(A^T) . vec(X)
    return vs @ vec(a.T)


def regression_spectrum(params: SystemParams, omega_grid, *, n_max: int = 1) -> SpectrumTrace:
    """Emitter spectrum from the full generator and the regression theorem.

    With ``c(tau) = <sigma_+(tau) sigma_-(0)>`` for an initially excited
    emitter, the spectrum is ``(2/pi) Re int_0^inf c(tau) e^{-i w tau} dtau``.
    The Laplace integral is done exactly through the resolvent
    ``(i w - L)^{-1}`` using a complex Schur form of L.  Grid points sitting on
    a purely oscillating eigenvalue (a bound state) are replaced by the average
    at w +- h, h = 1e-2 grid step; a smaller h amplifies the round-off in the
    eigenvalue's real part as eps / h^2.
    """
    space = HilbertSpace(1, n_max)
    ops = build_operators(space)
    gen = build_generator(params, None, space)
    rho0 = DensityMatrix.pure(space, (1,))
    sm = ops.sigma_minus[0].toarray()
    x0 = vec(sm @ rho0.matrix)
    a_row = vec(sm.conj().T.T)

    tmat, z = scipy.linalg.schur(gen.matrix.toarray(), output="complex")
    y = z.conj().T @ x0
    a_z = a_row @ z
    w = np.asarray(omega_grid, dtype=float)
    step = np.min(np.diff(w)) if w.size > 1 else params.kappa
    h = 1e-2 * step
    n = tmat.shape[0]
    eye = np.eye(n)
    lam = np.diag(tmat)
    poles = lam.imag[np.abs(lam.real) < 1e-8 * max(params.kappa, params.gamma, 1e-300)]

    def resolvent(om):
        sol = scipy.linalg.solve_triangular(1j * om * eye - tmat, y, lower=False, check_finite=False)
        return a_z @ sol

    def value(om):
        if poles.size and np.min(np.abs(poles - om)) < h:
            return 0.5 * (resolvent(om + h) + resolvent(om - h))
        return resolvent(om)

    vals = np.array([value(om) for om in w])
    return SpectrumTrace(w, (2.0 / math.pi) * vals.real, SpectrumKind.SE_SPECTRUM)


def spectrum_from_correlation(tau, corr, omega_grid) -> np.ndarray:
    """(2/pi) Re int c(tau) e^{-i w tau} dtau by trapezoid quadrature."""
    tau = np.asarray(tau, dtype=float)
    w = np.asarray(omega_grid, dtype=float)
    kernel = np.exp(-1j * np.outer(w, tau)) * np.asarray(corr)[None, :]
    return (2.0 / math.pi) * np.trapezoid(kernel, tau, axis=1).real


# ---------------------------------------------------------------------------
# photon blockade
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockadeResult:
    I_c: float
    g2: float
    n_max: int
    converged: Optional[bool] = None
    rel_change: Optional[float] = None


def _cw_moments(params, drive, space, cascade):
    gen = build_generator(params, drive, space, cascade=cascade)
    rho = steady_state(gen)
    ops = build_operators(space)
    cw = ops.c_cw
    n_op = cw.conj().T @ cw
    nn_op = cw.conj().T @ cw.conj().T @ cw @ cw
    i_c = rho.expect(n_op).real
    g2num = rho.expect(nn_op).real
    return i_c, g2num / i_c**2


def blockade_observables(
    params: SystemParams,
    drive: DriveParams,
    space: Optional[HilbertSpace] = None,
    *,
    cascade: bool = True,
    check_convergence: bool = True,
    rtol: float = 1e-6,
) -> BlockadeResult:
    """Steady-state CW photon number and g2(0) of the CW mode.

    ``g2 = <c^+ c^+ c c> / <c^+ c>^2`` on the numerically exact steady state.
    With ``check_convergence`` the computation is repeated at n_max + 1 and a
    :class:`TruncationWarning` is issued if either value moves by more than
    ``rtol`` (relative).
    """
    if drive is None or drive.Omega <= 0.0:
        raise UniqueSteadyStateRequiresDrive("blockade observables need a drive with Omega > 0")
    space = space or HilbertSpace(1, DEFAULT_BLOCKADE_NMAX)
    i_c, g2 = _cw_moments(params, drive, space, cascade)
    if not check_convergence:
        return BlockadeResult(i_c, g2, space.n_max)
    bigger = HilbertSpace(space.n_qubits, space.n_max + 1)
    i2, g22 = _cw_moments(params, drive, bigger, cascade)
    change = max(abs(i2 - i_c) / abs(i2), abs(g22 - g2) / abs(g22))
    ok = change < rtol
    if not ok:
        warnings.warn(
            f"n_max={space.n_max} not converged: relative change {change:.2e} at n_max={bigger.n_max}",
            TruncationWarning,
            stacklevel=2,
        )
    return BlockadeResult(i_c, g2, space.n_max, ok, change)


def blockade_scan(
    params: SystemParams,
    drive: DriveParams,
    omega_L_grid,
    space: Optional[HilbertSpace] = None,
    *,
    cascade: bool = True,
    check_convergence: bool = False,
    threads: int = 1,
) -> list[BlockadeResult]:
    """blockade_observables over a laser-frequency grid, in grid order."""
    grid = [float(w) for w in omega_L_grid]

    def one(w):
        return blockade_observables(
            params, DriveParams(drive.Omega, w), space, cascade=cascade, check_convergence=check_convergence
        )

    if threads <= 1:
        return [one(w) for w in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, grid))

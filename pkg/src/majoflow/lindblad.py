"""Lindblad generators: assembly from a GKS coefficient matrix and a
Hamiltonian schedule, the unitality test L(I)=0, and master-equation
integration.

The dissipator is
    L(rho) = sum_ab A[a,b] (F_a rho F_b^dag - 1/2 {F_b^dag F_a, rho})
over a Hermitian traceless orthonormal basis {F_a}; A is the (Hermitian,
PSD) coefficient matrix in that basis.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (DimensionError, IntegrationDivergedError,
                     InvariantViolation)
from .operator_core import (DEFAULT_TOL, DensityMatrix, OperatorBasis,
                            Tolerances, as_complex_matrix, gell_mann_basis,
                            herm_defect, require_hermitian)

TOL_PSD_TRAJ = 1e-7    # positivity budget along integrated trajectories
GKS_PSD_SOFT = 1e-6    # simulate anyway below this PSD defect, with warning


@dataclass(frozen=True)
class GksMatrix:
    """Dissipator coefficient matrix; Hermitian PSD, units of rate."""

    matrix: np.ndarray
    psd_defect: float = 0.0  # most negative eigenvalue clipped at 0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def gks_matrix(A, tol: Tolerances = DEFAULT_TOL) -> GksMatrix:
    A = as_complex_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"GKS matrix must be square, got {A.shape}")
    require_hermitian(A, tol.herm, "GKS matrix")
    lam_min = float(np.min(np.linalg.eigvalsh(A)))
    defect = max(0.0, -lam_min)
    if defect > tol.psd:
        if defect > GKS_PSD_SOFT:
            raise InvariantViolation(
                f"GKS matrix not PSD: min eigenvalue {lam_min:.3e}")
        import warnings
        warnings.warn(f"GKS matrix marginally non-PSD (defect {defect:.3e}); "
                      "simulation proceeds", stacklevel=2)
    return GksMatrix(A, defect)


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Piecewise-constant Hamiltonian.  A constant schedule has a single
    segment with duration None (valid for all t >= 0)."""

    segments: tuple  # of (duration or None, H)

    @classmethod
    def constant(cls, H) -> "HamiltonianSchedule":
        H = as_complex_matrix(H)
        require_hermitian(H, what="Hamiltonian")
        return cls(((None, H),))

    @classmethod
    def piecewise(cls, segments) -> "HamiltonianSchedule":
        segs = []
        for dur, H in segments:
            if dur is None or dur <= 0:
                raise InvariantViolation("segment durations must be positive")
            H = as_complex_matrix(H)
            require_hermitian(H, what="Hamiltonian segment")
            segs.append((float(dur), H))
        if not segs:
            raise InvariantViolation("schedule needs at least one segment")
        return cls(tuple(segs))

    @property
    def is_constant(self) -> bool:
        return self.segments[0][0] is None

    @property
    def total_duration(self) -> float:
        if self.is_constant:
            return np.inf
        return sum(d for d, _ in self.segments)

    def pieces(self, t0: float, t1: float):
        """Yield (segment_index, dt) chunks covering [t0, t1]."""
        if t1 < t0:
            raise DimensionError("interval must have t1 >= t0")
        if self.is_constant:
            if t1 > t0:
                yield 0, t1 - t0
            return
        eps = 1e-12 * max(1.0, abs(t1))
        if t1 > self.total_duration + eps:
            raise DimensionError(
                f"t={t1} beyond schedule horizon {self.total_duration}")
        start = 0.0
        for idx, (dur, _) in enumerate(self.segments):
            end = start + dur
            lo = max(t0, start)
            # absorb sub-eps horizon overshoot into the final segment
            hi = t1 if idx == len(self.segments) - 1 else min(t1, end)
            if hi > lo + eps:
                yield idx, hi - lo
            start = end
            if start >= t1 - eps:
                break


@dataclass(frozen=True)
class LindbladGenerator:
    """rho-dot = -i[H(t), rho] + L(rho) with constant GKS matrix."""

    basis: OperatorBasis
    gks: GksMatrix
    hamiltonian: HamiltonianSchedule

    @property
    def dim(self) -> int:
        return self.basis.dim

    def __post_init__(self):
        N = self.basis.dim
        if self.gks.dim != N * N - 1:
            raise DimensionError(
                f"GKS dim {self.gks.dim} does not match basis ({N * N - 1})")
        for _, H in self.hamiltonian.segments:
            if H.shape != (N, N):
                raise DimensionError("Hamiltonian dimension mismatch")


def make_generator(N: int, gks, hamiltonian=None, basis: OperatorBasis | None = None,
                   tol: Tolerances = DEFAULT_TOL) -> LindbladGenerator:
    """Convenience assembly with the default Gell-Mann basis."""
    basis = basis if basis is not None else gell_mann_basis(N)
    A = gks.matrix if isinstance(gks, GksMatrix) else gks
    if hamiltonian is None:
        hamiltonian = HamiltonianSchedule.constant(np.zeros((N, N)))
    elif not isinstance(hamiltonian, HamiltonianSchedule):
        hamiltonian = HamiltonianSchedule.constant(hamiltonian)
    return LindbladGenerator(basis, gks_matrix(A, tol), hamiltonian)


def apply_dissipator(gen: LindbladGenerator, rho) -> np.ndarray:
    """L(rho) for the generator's GKS matrix and basis; traceless output."""
    rho = as_complex_matrix(rho)
    N = gen.dim
    if rho.shape != (N, N):
        raise DimensionError(f"state shape {rho.shape} vs generator dim {N}")
    A = gen.gks.matrix
    F = gen.basis.operators
    out = np.zeros((N, N), dtype=complex)
    for a in range(len(F)):
        Fa_rho = F[a] @ rho
        for b in range(len(F)):
            c = A[a, b]
            if c == 0:
                continue
            Fb_dag = F[b].conj().T
            anti = Fb_dag @ Fa_rho + rho @ (Fb_dag @ F[a])
            out += c * (Fa_rho @ Fb_dag - 0.5 * anti)
    return out


@dataclass(frozen=True)
class UnitalityReport:
    unital: bool
    residual: float            # max-norm of sum_ab A[a,b] [F_a, F_b^dag]
    residual_identity: float   # max-norm of L(I), must agree with residual

    def __bool__(self):
        return self.unital


def check_unital(gen: LindbladGenerator, tol: float = 1e-10) -> UnitalityReport:
    """Unitality test: the identity is a fixed point iff
    sum_ab A[a,b] [F_a, F_b^dag] = 0, equivalently L(I) = 0.

    Both quantities are computed; their norms agree to machine precision
    by linearity.
    """
    N = gen.dim
    A = gen.gks.matrix
    F = gen.basis.operators
    R = np.zeros((N, N), dtype=complex)
    for a in range(len(F)):
        for b in range(len(F)):
            c = A[a, b]
            if c == 0:
                continue
            Fb_dag = F[b].conj().T
            R += c * (F[a] @ Fb_dag - Fb_dag @ F[a])
    r1 = float(np.max(np.abs(R)))
    r2 = float(np.max(np.abs(apply_dissipator(gen, np.eye(N)))))
    return UnitalityReport(unital=r1 <= tol, residual=r1, residual_identity=r2)


def _vec(M: np.ndarray) -> np.ndarray:
    """Column-stacking vec: vec(AXB) = (B^T kron A) vec(X)."""
    return M.reshape(-1, order="F")


def _unvec(v: np.ndarray, N: int) -> np.ndarray:
    return v.reshape((N, N), order="F")


def liouville_matrix(gen: LindbladGenerator, segment_index: int = 0) -> np.ndarray:
    """N^2 x N^2 superoperator of the full generator on segment
    `segment_index`, column-stacking convention."""
    N = gen.dim
    if segment_index >= len(gen.hamiltonian.segments):
        raise DimensionError(f"no segment {segment_index}")
    H = gen.hamiltonian.segments[segment_index][1]
    I = np.eye(N)
    Lmat = -1j * (np.kron(I, H) - np.kron(H.T, I))
    A = gen.gks.matrix
    F = gen.basis.operators
    for a in range(len(F)):
        for b in range(len(F)):
            c = A[a, b]
            if c == 0:
                continue
            Fb_dag = F[b].conj().T
            G = Fb_dag @ F[a]
            Lmat += c * (np.kron(F[b].conj(), F[a])
                         - 0.5 * np.kron(I, G) - 0.5 * np.kron(G.T, I))
    return Lmat


def generator_fingerprint(gen: LindbladGenerator) -> str:
    """Short content hash of the generator (GKS matrix, basis and
    Hamiltonian schedule) for trajectory provenance."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(gen.gks.matrix).tobytes())
    for F in gen.basis.operators:
        h.update(np.ascontiguousarray(F).tobytes())
    for dur, H in gen.hamiltonian.segments:
        h.update(repr(dur).encode())
        h.update(np.ascontiguousarray(H).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the master equation."""

    times: np.ndarray
    states: tuple  # of N x N complex ndarrays
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> np.ndarray:
        return self.states[i]


class _PropagatorCache:
    """Memoized per-segment exponentials exp(L_k * dt)."""

    def __init__(self, gen: LindbladGenerator):
        self.liouvillians = [liouville_matrix(gen, k)
                             for k in range(len(gen.hamiltonian.segments))]
        self._cache: dict = {}

    def segment_propagator(self, k: int, dt: float) -> np.ndarray:
        key = (k, dt)
        if key not in self._cache:
            self._cache[key] = expm(self.liouvillians[k] * dt)
        return self._cache[key]

    def interval(self, schedule: HamiltonianSchedule, t0: float, t1: float) -> np.ndarray:
        n2 = self.liouvillians[0].shape[0]
        P = np.eye(n2, dtype=complex)
        for k, dt in schedule.pieces(t0, t1):
            P = self.segment_propagator(k, dt) @ P
        return P


def _validate_traj_state(rho: np.ndarray, t: float, tol: Tolerances):
    if herm_defect(rho) > 1e-9:
        raise IntegrationDivergedError(
            f"state lost Hermiticity at t={t}", time=t)
    if abs(rho.trace() - 1.0) > 1e-9:
        raise IntegrationDivergedError(
            f"state trace drifted at t={t}: {rho.trace()!r}", time=t)
    lam_min = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if lam_min < -TOL_PSD_TRAJ:
        raise IntegrationDivergedError(
            f"state lost positivity at t={t}: min eig {lam_min:.3e}", time=t)
    return max(0.0, -lam_min)


def evolve(gen: LindbladGenerator, rho0: DensityMatrix, t_grid,
           method: str = "exact-expm", rk4_step: float | None = None,
           tol: Tolerances = DEFAULT_TOL,
           _cache: _PropagatorCache | None = None) -> Trajectory:
    """Integrate the master equation, sampling at t_grid.

    methods:
      exact-expm -- matrix exponential of the superoperator per segment
                    (exact for piecewise-constant H); default.
      rk4        -- classical fixed-step Runge-Kutta on the vectorized
                    equation; independent cross-check.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise DimensionError("t_grid must be a 1-d array of times")
    if abs(t_grid[0]) > 1e-12:
        raise DimensionError("t_grid must start at 0")
    if np.any(np.diff(t_grid) <= 0):
        raise DimensionError("t_grid must be strictly increasing")
    N = gen.dim
    if rho0.dim != N:
        raise DimensionError("initial state dimension mismatch")

    cache = _cache if _cache is not None else _PropagatorCache(gen)
    states = [rho0.matrix.copy()]
    clamp = 0.0
    if method == "exact-expm":
        v = _vec(rho0.matrix)
        for i in range(1, len(t_grid)):
            P = cache.interval(gen.hamiltonian, t_grid[i - 1], t_grid[i])
            v = P @ v
            rho = _unvec(v, N)
            clamp = max(clamp, _validate_traj_state(rho, t_grid[i], tol))
            states.append(rho)
    elif method == "rk4":
        if rk4_step is None:
            norms = [np.linalg.norm(L) for L in cache.liouvillians]
            durs = [d for d, _ in gen.hamiltonian.segments if d is not None]
            h = (min(durs) / 1000.0) if durs else np.inf
            h = min(h, 0.1 / max(max(norms), 1e-12), float(t_grid[-1]) / 100.0)
        else:
            h = float(rk4_step)
        v = _vec(rho0.matrix)
        for i in range(1, len(t_grid)):
            # step each schedule piece separately so L is constant per step
            for k, dt in gen.hamiltonian.pieces(t_grid[i - 1], t_grid[i]):
                L = cache.liouvillians[k]
                nsteps = max(1, int(np.ceil(dt / h)))
                hh = dt / nsteps
                for _ in range(nsteps):
                    k1 = L @ v
                    k2 = L @ (v + 0.5 * hh * k1)
                    k3 = L @ (v + 0.5 * hh * k2)
                    k4 = L @ (v + hh * k3)
                    v = v + (hh / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = _unvec(v, N)
            clamp = max(clamp, _validate_traj_state(rho, t_grid[i], tol))
            states.append(rho)
    else:
        raise DimensionError(f"unknown method {method!r}")

    meta = {"integrator": method, "clamp_magnitude": clamp,
            "generator_fingerprint": generator_fingerprint(gen)}
    if method == "rk4":
        meta["step"] = h
    return Trajectory(times=t_grid.copy(), states=tuple(states), metadata=meta)


def eigenvalue_flow(traj: Trajectory):
    """(time, descending eigenvalue vector) at every trajectory sample.

    Eigenvalues in [-TOL_PSD_TRAJ, 0) are clamped to 0 so downstream
    majorization and entropy post-processing see proper spectra.
    """
    out = []
    for t, rho in zip(traj.times, traj.states):
        lam = np.sort(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))[::-1]
        lam = np.where((lam < 0) & (lam >= -TOL_PSD_TRAJ), 0.0, lam)
        out.append((float(t), lam))
    return out

"""Single-qubit specialization: eigenvalue dynamics under a real
symmetric (unital) GKS matrix, the mixing-rate bounds from its spectrum,
the reachable interval under fast coherent control, and the transverse
relaxation (pure dephasing) steady-state family.

State eigenvalues are parameterized as diag(1/2 + lam, 1/2 - lam) with
lam in [0, 1/2]; the eigenvalue gap is 2*lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvariantViolation
from .lindblad import HamiltonianSchedule, Trajectory, evolve, make_generator
from .operator_core import DensityMatrix, gell_mann_basis, is_unitary

_PAULI_BASIS = gell_mann_basis(2)  # sigma_x, sigma_y, sigma_z over sqrt(2)
_SIGMA = tuple(np.sqrt(2.0) * F for F in _PAULI_BASIS.operators)


@dataclass(frozen=True)
class SpinGks:
    """3x3 real symmetric PSD coefficient matrix in the Pauli (x, y, z)
    basis, with its eigenvalues mu1 >= mu2 >= mu3."""

    matrix: np.ndarray
    mu: np.ndarray

    @property
    def rates(self):
        return tuple(self.mu)


def spin_gks(A, tol: float = 1e-10) -> SpinGks:
    A = np.asarray(A, dtype=float if np.isrealobj(A) else complex)
    if A.shape != (3, 3):
        raise DimensionError(f"spin GKS matrix must be 3x3, got {A.shape}")
    if np.max(np.abs(np.imag(A))) > tol or np.max(np.abs(A - A.T)) > tol:
        raise InvariantViolation("unital spin GKS matrix must be real symmetric")
    A = np.real(A)
    A = 0.5 * (A + A.T)
    mu = np.sort(np.linalg.eigvalsh(A))[::-1]
    if mu[-1] < -1e-9:
        raise InvariantViolation(f"GKS matrix not PSD: min eigenvalue {mu[-1]:.3e}")
    return SpinGks(A, mu)


def adjoint_so3(U, tol: float = 1e-10) -> np.ndarray:
    """SO(3) adjoint representation C of a 2x2 unitary:
    U^dag F_a U = sum_g C[a, g] F_g over the normalized Pauli basis."""
    U = np.asarray(U, dtype=complex)
    if not is_unitary(U, tol * 10):
        raise InvariantViolation("input is not unitary")
    C = np.empty((3, 3))
    F = _PAULI_BASIS.operators
    for a in range(3):
        rot = U.conj().T @ F[a] @ U
        for g in range(3):
            c = np.trace(F[g] @ rot)
            if abs(np.imag(c)) > 1e-9:
                raise InvariantViolation("adjoint coefficients came out complex")
            C[a, g] = np.real(c)
    return C


def lambda_rate(A: SpinGks, U) -> float:
    """Instantaneous decay rate of lam in the frame U: the xx+yy part of
    the rotated GKS matrix C^T A C.  Always within [mu2+mu3, mu1+mu2]."""
    C = adjoint_so3(U)
    Ar = C.T @ A.matrix @ C
    return float(Ar[0, 0] + Ar[1, 1])


def reachable_interval(A: SpinGks, T: float, lambda0: float):
    """Interval of eigenvalue parameters reachable at time T under fast
    coherent control: [exp(-(mu1+mu2) T) lam0, exp(-(mu2+mu3) T) lam0]."""
    if not 0.0 <= lambda0 <= 0.5:
        raise InvariantViolation(f"lambda0 must lie in [0, 1/2], got {lambda0}")
    if T < 0:
        raise DimensionError("horizon must be nonnegative")
    mu1, mu2, mu3 = A.mu
    lo = float(np.exp(-(mu1 + mu2) * T) * lambda0)
    hi = float(np.exp(-(mu2 + mu3) * T) * lambda0)
    return lo, hi


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant control frames: (duration, unitary) segments.
    The idealized fast control holds the state's eigenbasis at U for the
    segment's duration."""

    segments: tuple

    @classmethod
    def of(cls, segments) -> "ControlSchedule":
        segs = []
        for dur, U in segments:
            if dur <= 0:
                raise InvariantViolation("segment durations must be positive")
            U = np.asarray(U, dtype=complex)
            if not is_unitary(U, 1e-9):
                raise InvariantViolation("control frame is not unitary")
            segs.append((float(dur), U))
        if not segs:
            raise InvariantViolation("schedule needs at least one segment")
        return cls(tuple(segs))

    @property
    def total_duration(self) -> float:
        return sum(d for d, _ in self.segments)


def haar_unitaries(num: int, rng) -> list:
    """Haar-uniform SU(2) samples via normalized quaternions."""
    out = []
    for _ in range(num):
        q = rng.standard_normal(4)
        q /= np.linalg.norm(q)
        U = (q[0] * np.eye(2)
             + 1j * (q[1] * _SIGMA[0] + q[2] * _SIGMA[1] + q[3] * _SIGMA[2]))
        out.append(U)
    return out


def random_schedule(T: float, num_segments: int, rng) -> ControlSchedule:
    cuts = np.sort(rng.uniform(0.0, T, size=num_segments - 1))
    bounds = np.concatenate([[0.0], cuts, [T]])
    durs = np.diff(bounds)
    keep = durs > 1e-12
    frames = haar_unitaries(int(np.sum(keep)), rng)
    return ControlSchedule.of(list(zip(durs[keep], frames)))


@dataclass(frozen=True)
class ControlledRun:
    final_lambda: float
    times: np.ndarray
    lambdas: np.ndarray
    full_state_error: float  # worst gap mismatch against the 2x2 master equation


def _frame_generator(A: SpinGks, U):
    """Generator reproducing the frame-held lambda dynamics as a genuine
    2x2 master equation: rotated GKS matrix plus the compensating
    Hamiltonian that keeps the state diagonal."""
    C = adjoint_so3(U)
    Ar = C.T @ A.matrix @ C
    gen_probe = make_generator(2, Ar)
    from .lindblad import apply_dissipator
    g = apply_dissipator(gen_probe, _SIGMA[2])[0, 1]
    h = np.array([[0.0, 1j * g / 2.0], [(1j * g / 2.0).conjugate(), 0.0]])
    return make_generator(2, Ar, hamiltonian=h)


def simulate_controlled(A: SpinGks, schedule: ControlSchedule, lambda0: float,
                        T: float, full_check: bool = True,
                        samples_per_segment: int = 8) -> ControlledRun:
    """Integrate the scalar lambda dynamics along a control schedule.

    Per segment the rate is constant, so lam multiplies
    exp(-rate * duration) exactly.  When full_check is set, each segment
    is also run through the full 2x2 master equation in the rotated
    frame and the eigenvalue gaps compared.
    """
    if not 0.0 <= lambda0 <= 0.5:
        raise InvariantViolation(f"lambda0 must lie in [0, 1/2], got {lambda0}")
    if abs(schedule.total_duration - T) > 1e-9 * max(1.0, T):
        raise InvariantViolation(
            f"schedule covers {schedule.total_duration}, horizon is {T}")
    lam = float(lambda0)
    times = [0.0]
    lambdas = [lam]
    t = 0.0
    worst = 0.0
    for dur, U in schedule.segments:
        rate = lambda_rate(A, U)
        local = np.linspace(0.0, dur, samples_per_segment + 1)[1:]
        seg_vals = lam * np.exp(-rate * local)
        if full_check:
            gen = _frame_generator(A, U)
            rho0 = DensityMatrix(np.diag([0.5 + lam, 0.5 - lam]).astype(complex))
            traj = evolve(gen, rho0, np.concatenate([[0.0], local]))
            for rho, expect in zip(traj.states[1:], seg_vals):
                w = np.linalg.eigvalsh(rho)
                worst = max(worst, abs((w[1] - w[0]) / 2.0 - expect))
        times.extend(t + local)
        lambdas.extend(seg_vals)
        lam = float(seg_vals[-1])
        t += dur
    return ControlledRun(final_lambda=lam, times=np.array(times),
                         lambdas=np.array(lambdas), full_state_error=worst)


def simulate_hamiltonian_controls(A: SpinGks, segments, rho0: DensityMatrix,
                                  t_grid) -> Trajectory:
    """Finite-strength control cross-check: feed explicit (duration,
    control Hamiltonian) segments to the full master equation.  Makes no
    reachability claims."""
    sched = HamiltonianSchedule.piecewise(segments)
    gen = make_generator(2, A.matrix, hamiltonian=sched)
    return evolve(gen, rho0, t_grid)


@dataclass(frozen=True)
class SteadyStateReport:
    alpha: float               # z-component of the limiting state
    offdiag_residual: float    # remaining coherence at the horizon
    converged: bool


def transverse_relaxation_demo(gamma: float, rho0: DensityMatrix, T: float,
                               samples: int = 201):
    """Pure dephasing rho-dot = -i[sigma_z, rho] + gamma (sigma_z rho
    sigma_z - rho): coherences decay at rate 2*gamma, diagonals are
    conserved, so the trajectory converges to 1/2 I + alpha sigma_z with
    alpha fixed by the initial diagonal.
    """
    if gamma <= 0:
        raise InvariantViolation("gamma must be positive")
    A = np.diag([0.0, 0.0, 2.0 * gamma])
    gen = make_generator(2, A, hamiltonian=_SIGMA[2])
    traj = evolve(gen, rho0, np.linspace(0.0, T, samples))
    final = traj.states[-1]
    alpha = float(np.real(rho0.matrix[0, 0]) - 0.5)
    off = float(abs(final[0, 1]))
    expected_off = abs(rho0.matrix[0, 1]) * np.exp(-2.0 * gamma * T)
    converged = bool(off <= max(10.0 * expected_off, 1e-8))
    return traj, SteadyStateReport(alpha=alpha, offdiag_residual=off,
                                   converged=converged)

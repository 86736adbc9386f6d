"""Finite-time channels extracted from Lindblad generators: Choi/Kraus
representations, trace-preservation and unitality checks on the Kraus
side, the doubly stochastic matrix linking the spectra of input and
output states, and end-to-end majorization-monotonicity certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionError, InvariantViolation,
                     NotCompletelyPositiveError)
from .lindblad import (LindbladGenerator, Trajectory, _PropagatorCache,
                       _unvec, _vec, eigenvalue_flow, evolve)
from .majorization import majorizes
from .operator_core import (DensityMatrix, eig_hermitian, herm_defect,
                            purity, von_neumann_entropy)

VERDICT_MONOTONE = "monotone"
VERDICT_VIOLATED = "violated"
VERDICT_INCONCLUSIVE = "inconclusive"

# slack >= -SLACK_CLEAN is numerically clean monotone; slack below
# -SLACK_VIOLATION is a real violation; the band between is inconclusive
SLACK_CLEAN = 1e-12
SLACK_VIOLATION = 1e-9


@dataclass(frozen=True)
class SuperOperator:
    """N^2 x N^2 matrix acting on column-stacked density matrices."""

    dim: int
    matrix: np.ndarray

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return _unvec(self.matrix @ _vec(rho), self.dim)


@dataclass(frozen=True)
class KrausSet:
    """Operator-sum representation; sum_i K_i^dag K_i = I within tolerance."""

    operators: tuple
    discarded_mass: float = 0.0  # Choi weight dropped below the rank cutoff

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        for K in self.operators:
            out += K @ rho @ K.conj().T
        return out


def channel_from_generator(gen: LindbladGenerator, t1: float, t2: float,
                           _cache: _PropagatorCache | None = None) -> SuperOperator:
    """Propagator of the master equation over [t1, t2] as a superoperator."""
    if not t2 > t1 or t1 < 0:
        raise DimensionError(f"need t2 > t1 >= 0, got ({t1}, {t2})")
    cache = _cache if _cache is not None else _PropagatorCache(gen)
    return SuperOperator(gen.dim, cache.interval(gen.hamiltonian, t1, t2))


def choi_matrix(Psi: SuperOperator) -> np.ndarray:
    """Choi matrix C = sum_jk Psi(|j><k|) kron |j><k| (unnormalized
    maximally entangled reference); Hermitian, trace N for
    trace-preserving Psi."""
    N = Psi.dim
    C = np.zeros((N * N, N * N), dtype=complex)
    for j in range(N):
        for k in range(N):
            E = np.zeros((N, N), dtype=complex)
            E[j, k] = 1.0
            C += np.kron(Psi.apply(E), E)
    return C


def kraus_from_choi(C, tol_rank: float | None = None,
                    tol_psd: float = 1e-7) -> KrausSet:
    """Kraus operators from the Choi eigendecomposition.

    Each eigenpair with weight above tol_rank contributes
    K_i = sqrt(mu_i) * unvec(v_i); weights in [-tol_psd, tol_rank] are
    discarded with their mass recorded.  A weight below -tol_psd means
    the map is not completely positive.
    """
    C = np.asarray(C, dtype=complex)
    n2 = C.shape[0]
    N = int(round(np.sqrt(n2)))
    if N * N != n2:
        raise DimensionError(f"Choi matrix side {n2} is not a perfect square")
    if herm_defect(C) > 1e-8:
        raise InvariantViolation("Choi matrix is not Hermitian")
    if tol_rank is None:
        tol_rank = 1e-10 * N
    w, V = np.linalg.eigh(0.5 * (C + C.conj().T))
    if w[0] < -tol_psd:
        raise NotCompletelyPositiveError(
            f"Choi matrix has eigenvalue {w[0]:.3e} < -{tol_psd:.1e}")
    ops, discarded = [], 0.0
    for mu, v in zip(w[::-1], V[:, ::-1].T):
        if mu > tol_rank:
            # eigenvectors are indexed (output, input) row-major per the
            # kron ordering in choi_matrix
            ops.append(np.sqrt(mu) * v.reshape(N, N))
        else:
            discarded += abs(mu)
    if not ops:
        raise NotCompletelyPositiveError("Choi matrix has no significant eigenvalues")
    return KrausSet(tuple(ops), discarded)


def kraus_from_generator(gen: LindbladGenerator, t1: float, t2: float,
                         _cache: _PropagatorCache | None = None) -> KrausSet:
    return kraus_from_choi(choi_matrix(channel_from_generator(gen, t1, t2, _cache)))


@dataclass(frozen=True)
class KrausCheck:
    passed: bool
    residual: float

    def __bool__(self):
        return self.passed


def check_trace_preserving(ks: KrausSet, tol: float = 1e-8) -> KrausCheck:
    """max-norm of sum_i K_i^dag K_i - I."""
    N = ks.dim
    S = sum(K.conj().T @ K for K in ks.operators)
    r = float(np.max(np.abs(S - np.eye(N))))
    return KrausCheck(r <= tol, r)


def check_unital_kraus(ks: KrausSet, tol: float = 1e-8) -> KrausCheck:
    """max-norm of sum_i K_i K_i^dag - I."""
    N = ks.dim
    S = sum(K @ K.conj().T for K in ks.operators)
    r = float(np.max(np.abs(S - np.eye(N))))
    return KrausCheck(r <= tol, r)


def stochastic_matrix(ks: KrausSet, rho1: DensityMatrix, rho2: DensityMatrix,
                      tol: float = 1e-7) -> np.ndarray:
    """Matrix D with lambda(rho2) = D lambda(rho1), built from the Kraus
    operators rotated into the eigenbases: D_ab = sum_i |(U2^dag K_i U1)_ab|^2.

    Column sums of D equal 1 whenever the set is trace preserving; row
    sums additionally equal 1 when it is unital.  Spectra are sorted
    descending in both decompositions.
    """
    N = ks.dim
    if rho1.dim != N or rho2.dim != N:
        raise DimensionError("state dimension does not match Kraus operators")
    mapped = ks.apply(rho1.matrix)
    err = float(np.max(np.abs(mapped - rho2.matrix)))
    if err > tol:
        raise InvariantViolation(
            f"Kraus set does not map rho1 to rho2 (error {err:.3e})")
    d1 = eig_hermitian(rho1.matrix)
    d2 = eig_hermitian(rho2.matrix)
    D = np.zeros((N, N))
    for K in ks.operators:
        V = d2.unitary.conj().T @ K @ d1.unitary
        D += np.abs(V) ** 2
    resid = float(np.max(np.abs(D @ d1.eigenvalues - d2.eigenvalues)))
    if resid > tol:
        raise InvariantViolation(
            f"spectral relation lambda2 = D lambda1 fails by {resid:.3e}")
    return D


@dataclass(frozen=True)
class MonotoneCertificate:
    """Checkable record for one time pair along a trajectory."""

    t1: float
    t2: float
    spectrum_before: np.ndarray
    spectrum_after: np.ndarray
    D: np.ndarray
    slack: np.ndarray
    entropy_delta: float
    purity_delta: float
    verdict: str


def _classify(slacks, entropy_delta, purity_delta,
              tol_clean=SLACK_CLEAN, tol_violation=SLACK_VIOLATION) -> str:
    m = float(np.min(slacks))
    if m < -tol_violation:
        return VERDICT_VIOLATED
    if m < -tol_clean:
        return VERDICT_INCONCLUSIVE
    # majorization holds; the functional monotones must agree
    if entropy_delta < -1e-8 or purity_delta > 1e-8:
        return VERDICT_INCONCLUSIVE
    return VERDICT_MONOTONE


def certificate_for_pair(ks: KrausSet, t1: float, t2: float,
                         rho1: DensityMatrix, rho2: DensityMatrix) -> MonotoneCertificate:
    D = stochastic_matrix(ks, rho1, rho2)
    lam1 = rho1.eigenvalues()
    lam2 = rho2.eigenvalues()
    maj = majorizes(lam1, lam2, tol=SLACK_VIOLATION)
    dS = von_neumann_entropy(rho2) - von_neumann_entropy(rho1)
    dP = purity(rho2) - purity(rho1)
    return MonotoneCertificate(
        t1=float(t1), t2=float(t2),
        spectrum_before=lam1, spectrum_after=lam2,
        D=D, slack=maj.slacks,
        entropy_delta=dS, purity_delta=dP,
        verdict=_classify(maj.slacks, dS, dP))


def verify_monotone(gen: LindbladGenerator, rho0: DensityMatrix, t_grid,
                    pairs: str = "adjacent", method: str = "exact-expm",
                    kraus_cache: dict | None = None):
    """Certificates for every adjacent (or all) time pair of a trajectory.

    Each certificate carries the interval channel's doubly stochastic
    matrix, the majorization slacks and the entropy/purity deltas.
    kraus_cache, if supplied, memoizes interval Kraus sets keyed on
    (t1, t2) and is safe to share between calls with the same generator
    and grid.
    """
    if pairs not in ("adjacent", "all"):
        raise DimensionError(f"pairs must be 'adjacent' or 'all', got {pairs!r}")
    prop_cache = _PropagatorCache(gen)
    traj = evolve(gen, rho0, t_grid, method=method, _cache=prop_cache)
    clean = [DensityMatrix(0.5 * (s + s.conj().T)) for s in traj.states]
    n = len(traj)
    if pairs == "adjacent":
        index_pairs = [(i, i + 1) for i in range(n - 1)]
    else:
        index_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cache = kraus_cache if kraus_cache is not None else {}
    certs = []
    for i, j in index_pairs:
        key = (float(traj.times[i]), float(traj.times[j]))
        ks = cache.get(key)
        if ks is None:
            ks = kraus_from_generator(gen, key[0], key[1], _cache=prop_cache)
            cache[key] = ks
        certs.append(certificate_for_pair(ks, key[0], key[1], clean[i], clean[j]))
    return certs

"""Hermitian linear algebra, traceless operator bases and density-matrix
functionals.

Everything downstream (generators, channels, certificates) is built on the
types and helpers here.  Matrices are plain complex numpy arrays; the
dataclasses below only add validated structure on top.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvariantViolation

# Default tolerances.  Double-precision eigendecompositions at desk scale
# (N <= 32) land around 1e-13; these leave a 10-100x margin.
TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-9
TOL_RECON = 1e-9


@dataclass(frozen=True)
class Tolerances:
    herm: float = TOL_HERM
    trace: float = TOL_TRACE
    psd: float = TOL_PSD
    recon: float = TOL_RECON

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.herm * factor, self.trace * factor,
                          self.psd * factor, self.recon * factor)


DEFAULT_TOL = Tolerances()


def as_complex_matrix(M) -> np.ndarray:
    """Coerce to a 2-d complex ndarray and reject non-finite entries."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise InvariantViolation("matrix has non-finite entries")
    return A


def herm_defect(M: np.ndarray) -> float:
    """Max-norm distance from M to its Hermitian conjugate."""
    return float(np.max(np.abs(M - M.conj().T)))


def is_hermitian(M: np.ndarray, tol: float = TOL_HERM) -> bool:
    return herm_defect(M) <= tol


def require_hermitian(M: np.ndarray, tol: float = TOL_HERM, what: str = "matrix") -> np.ndarray:
    d = herm_defect(M)
    if d > tol:
        raise InvariantViolation(f"{what} is not Hermitian (defect {d:.3e} > {tol:.1e})")
    return M


def is_unitary(U: np.ndarray, tol: float = TOL_HERM) -> bool:
    U = np.asarray(U, dtype=complex)
    if U.shape[0] != U.shape[1]:
        return False
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))) <= tol


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state: Hermitian, PSD, unit trace."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Spectrum sorted descending."""
        return np.sort(np.linalg.eigvalsh(self.matrix))[::-1]


@dataclass(frozen=True)
class DensityDiagnostic:
    """Names the first violated density-matrix invariant and its size."""

    invariant: str  # "hermitian" | "trace" | "psd"
    magnitude: float

    def __str__(self):
        return f"density-matrix invariant '{self.invariant}' violated by {self.magnitude:.3e}"


def validate_density(M, tol: Tolerances = DEFAULT_TOL):
    """Return a DensityMatrix if M passes all invariants, else a
    DensityDiagnostic describing the worst failure.

    Non-square input raises DimensionError.
    """
    A = as_complex_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"density matrix must be square, got {A.shape}")
    d = herm_defect(A)
    if d > tol.herm:
        return DensityDiagnostic("hermitian", d)
    tr = abs(A.trace() - 1.0)
    if tr > tol.trace:
        return DensityDiagnostic("trace", float(tr))
    lam_min = float(np.min(np.linalg.eigvalsh(0.5 * (A + A.conj().T))))
    if lam_min < -tol.psd:
        return DensityDiagnostic("psd", -lam_min)
    return DensityMatrix(A)


def density(M, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Like validate_density but raises on any violation."""
    out = validate_density(M, tol)
    if isinstance(out, DensityDiagnostic):
        raise InvariantViolation(str(out))
    return out


@dataclass(frozen=True)
class OperatorBasis:
    """Hermitian, traceless, Hilbert-Schmidt-orthonormal basis of the
    N*N-1 dimensional space of traceless N x N matrices."""

    dim: int
    operators: tuple = field(repr=False)

    def __len__(self):
        return len(self.operators)


def gell_mann_basis(N: int) -> OperatorBasis:
    """Generalized Gell-Mann matrices, normalized to Tr(Fa Fb) = delta_ab.

    Order: all symmetric pair operators (j<k, lexicographic), then all
    antisymmetric pair operators, then the diagonal ladder.  For N=2 this
    is sigma_x/sqrt2, sigma_y/sqrt2, sigma_z/sqrt2.
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise DimensionError(f"basis dimension must be an integer >= 2, got {N!r}")
    ops = []
    s = 1.0 / np.sqrt(2.0)
    for j in range(N):
        for k in range(j + 1, N):
            F = np.zeros((N, N), dtype=complex)
            F[j, k] = s
            F[k, j] = s
            ops.append(F)
    for j in range(N):
        for k in range(j + 1, N):
            F = np.zeros((N, N), dtype=complex)
            F[j, k] = -1j * s
            F[k, j] = 1j * s
            ops.append(F)
    for l in range(1, N):
        F = np.zeros((N, N), dtype=complex)
        norm = 1.0 / np.sqrt(l * (l + 1))
        for j in range(l):
            F[j, j] = norm
        F[l, l] = -l * norm
        ops.append(F)
    return OperatorBasis(dim=N, operators=tuple(ops))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted descending with a matching unitary of
    eigenvectors (columns)."""

    eigenvalues: np.ndarray
    unitary: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.unitary
        return (U * self.eigenvalues) @ U.conj().T


def eig_hermitian(M, tol_herm: float = TOL_HERM) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending."""
    A = as_complex_matrix(M)
    require_hermitian(A, tol_herm)
    w, U = np.linalg.eigh(0.5 * (A + A.conj().T))
    # eigh sorts ascending; flip to descending, keeping eigenvector pairing
    return SpectralDecomposition(eigenvalues=w[::-1].copy(), unitary=U[:, ::-1].copy())


def _spectrum(rho) -> np.ndarray:
    A = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    return np.sort(np.linalg.eigvalsh(A))[::-1]


def von_neumann_entropy(rho, tol_psd: float = TOL_PSD) -> float:
    """S(rho) = -Tr(rho log rho), natural log; eigenvalues <= tol_psd
    contribute zero."""
    lam = _spectrum(rho)
    lam = lam[lam > tol_psd]
    return float(-np.sum(lam * np.log(lam)))


def purity(rho) -> float:
    """Tr(rho^2)."""
    A = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    return float(np.real(np.trace(A @ A)))

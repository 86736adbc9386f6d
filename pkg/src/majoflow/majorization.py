"""Majorization order on real vectors and the classical matrix machinery
around it: doubly stochastic matrices, Birkhoff decomposition and the
Schur-Horn construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DecompositionError, DimensionError, InvariantViolation,
                     NotComparableError, NotMajorizedError)
from .operator_core import DensityMatrix, density, is_unitary

SLACK_TOL = 1e-9       # partial-sum slack >= -SLACK_TOL counts as satisfied
ENTRY_TOL = 1e-12      # Birkhoff support threshold


@dataclass(frozen=True)
class MajorizationResult:
    holds: bool
    slacks: np.ndarray  # sum_d(y desc) - sum_d(x desc), d = 1..n

    def __bool__(self):
        return self.holds


def majorizes(y, x, tol: float = SLACK_TOL) -> MajorizationResult:
    """Does y majorize x (x more mixed than y)?

    Returns the decision together with the partial-sum slack vector.
    Totals must agree within tol, otherwise the vectors are not
    comparable.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"majorization needs equal-length vectors, got {x.shape} vs {y.shape}")
    if abs(x.sum() - y.sum()) > max(tol, 1e-9) * max(1.0, abs(y.sum())):
        raise NotComparableError(
            f"totals differ: {x.sum()!r} vs {y.sum()!r}")
    xs = np.sort(x)[::-1]
    ys = np.sort(y)[::-1]
    slacks = np.cumsum(ys) - np.cumsum(xs)
    holds = bool(np.all(slacks >= -tol))
    return MajorizationResult(holds, slacks)


def is_doubly_stochastic(D, tol: float = SLACK_TOL) -> bool:
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n):
        return False
    return (np.min(D) >= -tol
            and np.max(np.abs(D.sum(axis=0) - 1.0)) <= tol
            and np.max(np.abs(D.sum(axis=1) - 1.0)) <= tol)


def apply_doubly_stochastic(D, y) -> np.ndarray:
    """x = D y; the output is majorized by y when D is doubly stochastic."""
    D = np.asarray(D, dtype=float)
    y = np.asarray(y, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[1] != y.shape[0]:
        raise DimensionError(f"shape mismatch: D {D.shape}, y {y.shape}")
    return D @ y


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Convex combination of permutation matrices reconstructing a doubly
    stochastic matrix.  Permutations stored as index arrays p with
    P[i, p[i]] = 1."""

    weights: tuple
    permutations: tuple

    def __len__(self):
        return len(self.weights)

    def reconstruct(self, n: int | None = None) -> np.ndarray:
        n = len(self.permutations[0]) if n is None else n
        D = np.zeros((n, n))
        for w, p in zip(self.weights, self.permutations):
            D[np.arange(n), p] += w
        return D


def _perfect_matching(support: np.ndarray):
    """Perfect matching on a boolean bipartite adjacency matrix via
    augmenting paths; returns column-for-row assignment or None."""
    n = support.shape[0]
    match_col = [-1] * n  # column -> row

    def augment(row, seen):
        for col in range(n):
            if support[row, col] and not seen[col]:
                seen[col] = True
                if match_col[col] < 0 or augment(match_col[col], seen):
                    match_col[col] = row
                    return True
        return False

    for row in range(n):
        if not augment(row, [False] * n):
            return None
    assign = np.empty(n, dtype=int)
    for col, row in enumerate(match_col):
        assign[row] = col
    return assign


def birkhoff_decompose(D, tol: float = SLACK_TOL,
                       entry_tol: float = ENTRY_TOL) -> BirkhoffDecomposition:
    """Decompose a doubly stochastic matrix into at most (n-1)^2 + 1
    weighted permutations.

    Repeatedly finds a permutation supported on strictly positive
    entries and peels off the minimal entry along it.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if not is_doubly_stochastic(D, tol):
        raise InvariantViolation("input is not doubly stochastic within tolerance")
    R = D.copy()
    weights, perms = [], []
    max_terms = (n - 1) ** 2 + 1
    for _ in range(max_terms + 1):
        residual = float(np.max(np.abs(R)))
        if residual <= max(tol, entry_tol * n):
            break
        p = _perfect_matching(R > entry_tol)
        if p is None:
            raise DecompositionError(
                f"no perfect matching on positive support, residual mass {residual:.3e}")
        w = float(np.min(R[np.arange(n), p]))
        weights.append(w)
        perms.append(p)
        R[np.arange(n), p] -= w
    else:
        raise DecompositionError(
            f"term bound {max_terms} exceeded, residual {np.max(np.abs(R)):.3e}")
    total = sum(weights)
    # renormalize the rounding dust so weights sum to exactly 1
    weights = [w / total for w in weights]
    return BirkhoffDecomposition(tuple(weights), tuple(perms))


def _require_special_orthogonal(K, tol):
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n):
        raise DimensionError(f"expected square matrix, got {K.shape}")
    if np.max(np.abs(K.T @ K - np.eye(n))) > tol:
        raise InvariantViolation("K is not orthogonal within tolerance")
    if abs(np.linalg.det(K) - 1.0) > max(tol * n * 10, 1e-8):
        raise InvariantViolation("K has determinant != +1")
    return K


def schur_horn_diagonal(lam, K, tol: float = 1e-8) -> np.ndarray:
    """Diagonal of K^T diag(lam) K for special orthogonal K; majorized by lam."""
    lam = np.asarray(lam, dtype=float)
    K = _require_special_orthogonal(K, tol)
    return np.einsum("ij,i,ik->jk", K, lam, K).diagonal().copy()


def schur_horn_construct(a, lam, tol: float = SLACK_TOL) -> np.ndarray:
    """Special orthogonal K with diag(K^T diag(lam) K) = a, given a
    majorized by lam.

    Horn's chain of at most n-1 planar rotations, applied recursively on
    descending-sorted copies; sorting permutations are folded into K so
    the contract holds for unsorted inputs too.
    """
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    res = majorizes(lam, a, tol)
    if not res.holds:
        raise NotMajorizedError(
            f"a is not majorized by lam (min slack {np.min(res.slacks):.3e})")
    n = a.shape[0]
    order_a = np.argsort(-a, kind="stable")
    order_l = np.argsort(-lam, kind="stable")
    Ks = _horn_sorted(a[order_a], lam[order_l])
    # lam = Q (sorted lam), a = R (sorted a): K = Q Ks R^T
    Q = np.zeros((n, n))
    Q[order_l, np.arange(n)] = 1.0
    R = np.zeros((n, n))
    R[order_a, np.arange(n)] = 1.0
    K = Q @ Ks @ R.T
    if np.linalg.det(K) < 0:
        K[0, :] *= -1.0  # row sign flip leaves K^T diag(lam) K unchanged
    return K


def _horn_sorted(a, lam):
    """Horn construction for descending-sorted a majorized by lam."""
    n = len(a)
    if n == 1:
        return np.eye(1)
    target = a[0]
    # largest k with lam[k] >= target; pair (k, k+1) brackets the target
    ge = np.nonzero(lam >= target - 1e-14)[0]
    k = int(ge[-1]) if len(ge) else 0
    k = min(k, n - 2)
    hi, lo = lam[k], lam[k + 1]
    if hi - lo > 1e-15:
        c2 = float(np.clip((target - lo) / (hi - lo), 0.0, 1.0))
    else:
        c2 = 1.0
    c = np.sqrt(c2)
    s = np.sqrt(1.0 - c2)
    G = np.eye(n)
    G[k, k] = c
    G[k + 1, k] = s
    G[k, k + 1] = -s
    G[k + 1, k + 1] = c
    # after the rotation the (k,k) entry is exactly target and the spare
    # eigenvalue hi + lo - target replaces the pair
    lam_rest = np.concatenate([lam[:k], [hi + lo - target], lam[k + 2:]])
    # permutation bringing index k to the front: [k, 0, .., k-1, k+1, .., n-1]
    order = [k] + [i for i in range(n) if i != k]
    P = np.zeros((n, n))
    for col, row in enumerate(order):
        P[row, col] = 1.0
    K_rest = _horn_sorted(a[1:], lam_rest)
    B = np.eye(n)
    B[1:, 1:] = K_rest
    return G @ P @ B


def convex_sum_compare(f, x, y, tol: float = SLACK_TOL):
    """For x majorized by y and convex f: sum f(x_i) <= sum f(y_i).

    Convexity of f is the caller's responsibility.  Returns
    (sum_f_x, sum_f_y) after asserting the inequality within tol.
    """
    res = majorizes(y, x, tol)
    if not res.holds:
        raise NotMajorizedError("x is not majorized by y")
    fx = float(sum(f(t) for t in np.asarray(x, dtype=float)))
    fy = float(sum(f(t) for t in np.asarray(y, dtype=float)))
    if fx > fy + tol:
        raise InvariantViolation(
            f"convex-sum inequality violated: {fx!r} > {fy!r} (is f convex?)")
    return fx, fy


def mix_unitary_conjugations(rho: DensityMatrix, mixture, tol: float = SLACK_TOL) -> DensityMatrix:
    """Mix unitary conjugations: sum_i p_i U_i rho U_i^dag.

    The result's spectrum is majorized by rho's.
    """
    weights = [w for w, _ in mixture]
    if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > tol:
        raise InvariantViolation("mixture weights must be positive and sum to 1")
    N = rho.dim
    out = np.zeros((N, N), dtype=complex)
    for w, U in mixture:
        U = np.asarray(U, dtype=complex)
        if not is_unitary(U, 1e-9):
            raise InvariantViolation("mixture contains a non-unitary matrix")
        out += w * (U @ rho.matrix @ U.conj().T)
    return density(out)

import numpy as np
import pytest

from majoflow.errors import DimensionError, InvariantViolation
from majoflow.operator_core import (DensityDiagnostic, DensityMatrix, density,
                                    eig_hermitian, gell_mann_basis, purity,
                                    validate_density, von_neumann_entropy)

from conftest import random_density, random_unitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class TestGellMannBasis:

    def test_qubit_basis_is_normalized_paulis(self):
        ops = gell_mann_basis(2).operators
        for F, sigma in zip(ops, (SX, SY, SZ)):
            assert np.allclose(F, sigma / np.sqrt(2), atol=1e-14)

    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    def test_orthonormal_traceless_hermitian(self, N):
        ops = gell_mann_basis(N).operators
        assert len(ops) == N * N - 1
        for a, Fa in enumerate(ops):
            assert abs(np.trace(Fa)) < 1e-14
            assert np.allclose(Fa, Fa.conj().T)
            for b, Fb in enumerate(ops):
                g = np.trace(Fa @ Fb)
                assert abs(g - (1.0 if a == b else 0.0)) < 1e-13

    def test_qutrit_matches_standard_construction(self):
        # standard Gell-Mann matrices carry Tr(l_a l_b) = 2 delta_ab;
        # ours are the same matrices over sqrt(2), in (sym, antisym, diag) order
        ops = gell_mann_basis(3).operators
        l1 = np.zeros((3, 3)); l1[0, 1] = l1[1, 0] = 1
        l4 = np.zeros((3, 3)); l4[0, 2] = l4[2, 0] = 1
        l6 = np.zeros((3, 3)); l6[1, 2] = l6[2, 1] = 1
        l2 = np.zeros((3, 3), dtype=complex); l2[0, 1] = -1j; l2[1, 0] = 1j
        l5 = np.zeros((3, 3), dtype=complex); l5[0, 2] = -1j; l5[2, 0] = 1j
        l7 = np.zeros((3, 3), dtype=complex); l7[1, 2] = -1j; l7[2, 1] = 1j
        l3 = np.diag([1.0, -1.0, 0.0])
        l8 = np.diag([1.0, 1.0, -2.0]) / np.sqrt(3)
        expected = [l1, l4, l6, l2, l5, l7, l3, l8]
        for F, l in zip(ops, expected):
            assert np.allclose(F, l / np.sqrt(2), atol=1e-14)

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_casimir_identity(self, N):
        ops = gell_mann_basis(N).operators
        total = sum(F @ F for F in ops)
        assert np.max(np.abs(total - (N * N - 1) / N * np.eye(N))) < 1e-10

    @pytest.mark.parametrize("bad", [1, 0, -3])
    def test_invalid_dimension(self, bad):
        with pytest.raises(DimensionError):
            gell_mann_basis(bad)


class TestEigHermitian:

    def test_identity(self):
        dec = eig_hermitian(np.eye(2))
        assert np.allclose(dec.eigenvalues, [1, 1])

    def test_sigma_z(self):
        dec = eig_hermitian(SZ)
        assert np.allclose(dec.eigenvalues, [1, -1])

    def test_reconstruction_from_known_spectrum(self, rng):
        lam = np.array([2.0, 0.5, -0.3, -1.7])
        U = random_unitary(4, rng)
        M = (U * lam) @ U.conj().T
        dec = eig_hermitian(M)
        assert np.allclose(dec.eigenvalues, lam, atol=1e-12)
        assert np.max(np.abs(dec.reconstruct() - M)) < 1e-10
        assert np.max(np.abs(dec.unitary.conj().T @ dec.unitary - np.eye(4))) < 1e-12

    def test_sorted_descending(self, rng):
        for _ in range(10):
            X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            dec = eig_hermitian((X + X.conj().T) / 2)
            assert np.all(np.diff(dec.eigenvalues) <= 0)

    def test_roundtrip_spectrum(self, rng):
        lam = np.sort(rng.standard_normal(6))[::-1]
        U = random_unitary(6, rng)
        dec = eig_hermitian((U * lam) @ U.conj().T)
        assert np.max(np.abs(dec.eigenvalues - lam)) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvariantViolation):
            eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


class TestValidateDensity:

    def test_maximally_mixed_valid(self):
        out = validate_density(np.eye(2) / 2)
        assert isinstance(out, DensityMatrix)

    def test_psd_violation(self):
        out = validate_density(np.diag([1.5, -0.5]).astype(complex))
        assert isinstance(out, DensityDiagnostic)
        assert out.invariant == "psd"
        assert abs(out.magnitude - 0.5) < 1e-12

    def test_trace_violation(self):
        out = validate_density(np.diag([0.6, 0.3]).astype(complex))
        assert isinstance(out, DensityDiagnostic)
        assert out.invariant == "trace"
        assert abs(out.magnitude - 0.1) < 1e-12

    def test_hermiticity_violation(self):
        out = validate_density(np.array([[0.5, 0.5], [0.0, 0.5]]))
        assert isinstance(out, DensityDiagnostic)
        assert out.invariant == "hermitian"

    def test_non_square_raises(self):
        with pytest.raises(DimensionError):
            validate_density(np.zeros((2, 3)))


class TestFunctionals:

    def test_entropy_pure_state(self):
        assert von_neumann_entropy(density(np.diag([1.0, 0.0]))) == 0.0

    def test_entropy_maximally_mixed(self):
        assert abs(von_neumann_entropy(density(np.eye(2) / 2)) - np.log(2)) < 1e-12

    def test_entropy_scalar_oracle(self):
        # -0.75 log 0.75 - 0.25 log 0.25
        expected = -(0.75 * np.log(0.75) + 0.25 * np.log(0.25))
        got = von_neumann_entropy(density(np.diag([0.75, 0.25])))
        assert abs(got - expected) < 1e-12

    def test_purity_pure_and_mixed(self):
        assert abs(purity(density(np.diag([1.0, 0.0]))) - 1.0) < 1e-12
        assert abs(purity(density(np.eye(4) / 4)) - 0.25) < 1e-12
        assert abs(purity(density(np.diag([0.75, 0.25]))) - 0.625) < 1e-12

    def test_unitary_invariance(self, rng):
        for _ in range(5):
            rho = random_density(3, rng)
            U = random_unitary(3, rng)
            rot = density(U @ rho.matrix @ U.conj().T)
            assert abs(von_neumann_entropy(rot) - von_neumann_entropy(rho)) < 1e-10
            assert abs(purity(rot) - purity(rho)) < 1e-10

    def test_entropy_range(self, rng):
        for N in (2, 3, 4):
            rho = random_density(N, rng)
            s = von_neumann_entropy(rho)
            assert -1e-12 <= s <= np.log(N) + 1e-12

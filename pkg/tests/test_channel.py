import numpy as np
import pytest

from majoflow.channel import (SuperOperator, VERDICT_MONOTONE,
                              VERDICT_VIOLATED, channel_from_generator,
                              check_trace_preserving, check_unital_kraus,
                              choi_matrix, kraus_from_choi,
                              kraus_from_generator, stochastic_matrix,
                              verify_monotone)
from majoflow.errors import (DimensionError, InvariantViolation,
                             NotCompletelyPositiveError)
from majoflow.lindblad import check_unital, evolve, make_generator
from majoflow.majorization import is_doubly_stochastic, majorizes
from majoflow.channel import KrausSet
from majoflow.operator_core import density, purity

from conftest import (random_density, random_nonunital_generator,
                      random_unital_generator, random_unitary)


def identity_channel(N):
    return SuperOperator(N, np.eye(N * N, dtype=complex))


def depolarizing_channel(N):
    # rho -> Tr(rho) I/N
    vec_I = np.eye(N, dtype=complex).reshape(-1, order="F")
    return SuperOperator(N, np.outer(vec_I / N, vec_I.conj()))


class TestChannelFromGenerator:

    def test_trivial_generator_gives_identity(self):
        gen = make_generator(2, np.zeros((3, 3)))
        Psi = channel_from_generator(gen, 0.0, 1.3)
        assert np.max(np.abs(Psi.matrix - np.eye(4))) < 1e-12

    def test_short_interval_near_identity(self, rng):
        gen = random_unital_generator(2, rng)
        Psi = channel_from_generator(gen, 0.4, 0.4 + 1e-9)
        assert np.max(np.abs(Psi.matrix - np.eye(4))) < 1e-6

    @pytest.mark.parametrize("N", [2, 3])
    def test_matches_evolve_endpoint(self, N, rng):
        gen = random_nonunital_generator(N, rng)
        rho0 = random_density(N, rng)
        traj = evolve(gen, rho0, np.array([0.0, 0.8]))
        Psi = channel_from_generator(gen, 0.0, 0.8)
        assert np.max(np.abs(Psi.apply(rho0.matrix) - traj.states[-1])) < 1e-9

    def test_interval_error(self):
        gen = make_generator(2, np.zeros((3, 3)))
        with pytest.raises(DimensionError):
            channel_from_generator(gen, 1.0, 0.5)


class TestChoiMatrix:

    @pytest.mark.parametrize("N", [2, 3])
    def test_identity_channel(self, N):
        C = choi_matrix(identity_channel(N))
        w = np.linalg.eigvalsh(C)
        assert abs(np.trace(C) - N) < 1e-12
        assert np.sum(w > 1e-10) == 1  # rank one
        assert abs(w[-1] - N) < 1e-12

    @pytest.mark.parametrize("N", [2, 3])
    def test_depolarizing_channel(self, N):
        C = choi_matrix(depolarizing_channel(N))
        assert np.max(np.abs(C - np.eye(N * N) / N)) < 1e-12
        assert abs(np.trace(C) - N) < 1e-12

    def test_lindblad_channel_is_cp(self, rng):
        gen = random_unital_generator(2, rng)
        C = choi_matrix(channel_from_generator(gen, 0.0, 0.9))
        assert np.min(np.linalg.eigvalsh(C)) > -1e-9


class TestKrausFromChoi:

    def test_identity_channel_single_operator(self):
        ks = kraus_from_choi(choi_matrix(identity_channel(2)))
        assert len(ks) == 1
        K = ks.operators[0]
        phase = K[0, 0] / abs(K[0, 0])
        assert np.max(np.abs(K / phase - np.eye(2))) < 1e-12

    def test_long_time_dephasing_projectors(self):
        # Choi of the fully dephased qubit channel: action keeps only the
        # diagonal, equivalent to Kraus projectors diag(1,0), diag(0,1)
        gen = make_generator(2, np.diag([0.0, 0.0, 2.0]))
        ks = kraus_from_generator(gen, 0.0, 30.0)
        rho = np.array([[0.7, 0.3 - 0.2j], [0.3 + 0.2j, 0.3]])
        p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        expected = p0 @ rho @ p0 + p1 @ rho @ p1
        assert np.max(np.abs(ks.apply(rho) - expected)) < 1e-8

    @pytest.mark.parametrize("N", [2, 3])
    def test_reconstruction_on_matrix_basis(self, N, rng):
        gen = random_nonunital_generator(N, rng)
        Psi = channel_from_generator(gen, 0.0, 0.6)
        ks = kraus_from_choi(choi_matrix(Psi))
        for j in range(N):
            for k in range(N):
                E = np.zeros((N, N), dtype=complex)
                E[j, k] = 1.0
                assert np.max(np.abs(ks.apply(E) - Psi.apply(E))) < 1e-8

    def test_unital_kraus_condition(self, rng):
        gen = random_unital_generator(3, rng)
        ks = kraus_from_generator(gen, 0.0, 0.7)
        S = sum(K @ K.conj().T for K in ks.operators)
        assert np.max(np.abs(S - np.eye(3))) < 1e-8

    def test_rejects_non_cp(self):
        C = np.diag([1.0, 1.0, 1.0, -0.5]).astype(complex)
        with pytest.raises(NotCompletelyPositiveError):
            kraus_from_choi(C)


class TestKrausChecks:

    def test_trace_preserving_identity(self):
        ks = KrausSet((np.eye(2, dtype=complex),))
        rep = check_trace_preserving(ks)
        assert rep.passed and rep.residual == 0.0

    def test_trace_preserving_fail(self):
        ks = KrausSet((np.eye(2, dtype=complex) / 2,))
        rep = check_trace_preserving(ks)
        assert not rep.passed
        assert abs(rep.residual - 0.75) < 1e-12

    def test_unital_kraus_amplitude_damping(self):
        p = 0.3
        K0 = np.diag([1.0, np.sqrt(1 - p)]).astype(complex)
        K1 = np.zeros((2, 2), dtype=complex)
        K1[0, 1] = np.sqrt(p)
        ks = KrausSet((K0, K1))
        assert check_trace_preserving(ks).passed
        rep = check_unital_kraus(ks)
        assert not rep.passed
        assert abs(rep.residual - p) < 1e-12

    def test_pipeline_residuals(self, rng):
        gen = random_unital_generator(2, rng)
        ks = kraus_from_generator(gen, 0.0, 0.5)
        assert check_trace_preserving(ks, 1e-8).passed
        assert check_unital_kraus(ks, 1e-8).passed

    def test_unitality_equivalence(self, rng):
        for maker in (random_unital_generator, random_nonunital_generator):
            for N in (2, 3):
                gen = maker(N, rng)
                ks = kraus_from_generator(gen, 0.0, 0.6)
                assert check_unital(gen, 1e-7).unital == \
                    check_unital_kraus(ks, 1e-7).passed


class TestStochasticMatrix:

    def test_identity_channel(self, rng):
        rho = random_density(3, rng)
        ks = KrausSet((np.eye(3, dtype=complex),))
        D = stochastic_matrix(ks, rho, rho)
        assert np.max(np.abs(D - np.eye(3))) < 1e-8

    def test_depolarizing_endpoint(self, rng):
        N = 3
        rho1 = random_density(N, rng)
        ks = kraus_from_choi(choi_matrix(depolarizing_channel(N)))
        rho2 = density(ks.apply(rho1.matrix))
        D = stochastic_matrix(ks, rho1, rho2)
        assert np.max(np.abs(D - np.full((N, N), 1.0 / N))) < 1e-8
        assert np.allclose(D @ rho1.eigenvalues(), np.full(N, 1.0 / N), atol=1e-10)

    def test_unital_channel_doubly_stochastic(self, rng):
        for N in (2, 3):
            gen = random_unital_generator(N, rng)
            ks = kraus_from_generator(gen, 0.0, 0.8)
            rho1 = random_density(N, rng)
            rho2 = density(ks.apply(rho1.matrix))
            D = stochastic_matrix(ks, rho1, rho2)
            assert is_doubly_stochastic(D, 1e-8)

    def test_nonunital_rows_vs_columns(self, rng):
        # trace preservation alone forces the sums over the first index;
        # the sums over the second index need unitality
        gen = random_nonunital_generator(2, rng)
        ks = kraus_from_generator(gen, 0.0, 0.8)
        rho1 = random_density(2, rng)
        rho2 = density(ks.apply(rho1.matrix))
        D = stochastic_matrix(ks, rho1, rho2)
        assert np.max(np.abs(D.sum(axis=0) - 1.0)) < 1e-8
        assert np.max(np.abs(D.sum(axis=1) - 1.0)) > 1e-6
        assert np.min(D) >= 0.0

    def test_degenerate_spectrum_robustness(self, rng):
        # repeated eigenvalues: D depends on the eigenbasis but stays
        # doubly stochastic with lambda2 = D lambda1 for every choice
        N = 3
        gen = random_unital_generator(N, rng)
        ks = kraus_from_generator(gen, 0.0, 0.5)
        for _ in range(5):
            U = random_unitary(N, rng)
            lam = np.array([0.4, 0.4, 0.2])
            rho1 = density((U * lam) @ U.conj().T)
            rho2 = density(ks.apply(rho1.matrix))
            D = stochastic_matrix(ks, rho1, rho2)
            assert is_doubly_stochastic(D, 1e-8)
            assert np.max(np.abs(D @ rho1.eigenvalues() - rho2.eigenvalues())) < 1e-7

    def test_inconsistent_inputs_error(self, rng):
        ks = KrausSet((np.eye(2, dtype=complex),))
        rho1 = random_density(2, rng)
        rho2 = density(np.eye(2) / 2)
        with pytest.raises(InvariantViolation):
            stochastic_matrix(ks, rho1, rho2)


class TestVerifyMonotone:

    def test_zero_generator_all_monotone_identity_D(self, rng):
        gen = make_generator(2, np.zeros((3, 3)))
        certs = verify_monotone(gen, random_density(2, rng), np.linspace(0, 1, 6))
        for c in certs:
            assert c.verdict == VERDICT_MONOTONE
            assert np.max(np.abs(c.D - np.eye(2))) < 1e-8

    @pytest.mark.parametrize("N", [2, 3])
    def test_unital_all_monotone(self, N, rng):
        gen = random_unital_generator(N, rng)
        certs = verify_monotone(gen, random_density(N, rng), np.linspace(0, 1, 20))
        assert all(c.verdict == VERDICT_MONOTONE for c in certs)
        for c in certs:
            assert c.entropy_delta >= -1e-8
            assert c.purity_delta <= 1e-8

    def test_amplitude_damping_purifies_maximally_mixed(self):
        gamma = 1.0
        A = gamma * np.array([[1, -1j, 0], [1j, 1, 0], [0, 0, 0]])
        gen = make_generator(2, A)
        certs = verify_monotone(gen, density(np.eye(2) / 2), np.linspace(0, 1, 10))
        assert any(c.verdict == VERDICT_VIOLATED for c in certs)
        assert any(c.purity_delta > 1e-6 for c in certs)

    def test_all_pairs_chain_property(self, rng):
        gen = random_unital_generator(2, rng)
        certs = verify_monotone(gen, random_density(2, rng),
                                np.linspace(0, 1, 8), pairs="all")
        assert len(certs) == 8 * 7 // 2
        assert all(c.verdict == VERDICT_MONOTONE for c in certs)

    def test_kraus_cache_shared(self, rng):
        gen = random_unital_generator(2, rng)
        cache = {}
        t = np.linspace(0, 1, 5)
        a = verify_monotone(gen, random_density(2, rng), t, kraus_cache=cache)
        n_entries = len(cache)
        b = verify_monotone(gen, random_density(2, rng), t, kraus_cache=cache)
        assert len(cache) == n_entries  # reused, not regrown
        assert all(c.verdict == VERDICT_MONOTONE for c in a + b)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar_like, random_state
from multiphase_sensing.circuit import build_probe_circuit
from multiphase_sensing.errors import InvalidArgumentError
from multiphase_sensing.phase_space import (
    GaussianState,
    LossChannel,
    PassiveUnitary,
    apply_symplectic,
    apply_uniform_loss,
    homodyne_q_distribution,
    probe_state,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_from_unitary,
)


def squeezed_vacuum(r):
    return GaussianState(np.zeros(2), np.diag([np.exp(2 * r), np.exp(-2 * r)]) / 2)


class TestSymplecticFromUnitary:
    def test_identity(self):
        np.testing.assert_array_equal(symplectic_from_unitary(np.eye(3)).S, np.eye(6))

    def test_quarter_phase(self):
        S = symplectic_from_unitary(np.array([[1j]])).S
        np.testing.assert_allclose(S, [[0, -1], [1, 0]], atol=1e-15)

    def test_balanced_gate(self):
        U = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        S = symplectic_from_unitary(U).S
        expected = np.zeros((4, 4))
        expected[:2, :2] = U
        expected[2:, 2:] = U
        np.testing.assert_allclose(S, expected, atol=1e-15)
        Om = symplectic_form(2)
        np.testing.assert_allclose(S @ Om @ S.T, Om, atol=1e-12)

    def test_non_unitary_rejected(self):
        with pytest.raises(InvalidArgumentError):
            symplectic_from_unitary(np.array([[1.0, 0.1], [0.0, 1.0]]))

    def test_random_unitaries_symplectic_and_orthogonal(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 9))
            S = symplectic_from_unitary(haar_like(rng, n)).S
            Om = symplectic_form(n)
            assert np.max(np.abs(S @ Om @ S.T - Om)) < 1e-10
            assert np.max(np.abs(S @ S.T - np.eye(2 * n))) < 1e-10


class TestApplySymplectic:
    def test_identity_unchanged(self, rng):
        st_ = random_state(rng, 3)
        out = apply_symplectic(st_, np.eye(6))
        np.testing.assert_array_equal(out.d, st_.d)
        np.testing.assert_array_equal(out.V, st_.V)

    def test_vacuum_invariant_under_passive(self, rng):
        vac = GaussianState.vacuum(4)
        out = apply_symplectic(vac, symplectic_from_unitary(haar_like(rng, 4)))
        np.testing.assert_allclose(out.V, np.eye(8) / 2, atol=1e-14)
        np.testing.assert_allclose(out.d, 0, atol=1e-15)

    def test_probe_through_balanced_gate_matches_dense_product(self):
        st_ = probe_state(1, 0.5, 1.0)
        U = build_probe_circuit(1).U
        S = np.block([[U.real, -U.imag], [U.imag, U.real]])
        out = apply_symplectic(st_, symplectic_from_unitary(U))
        np.testing.assert_allclose(out.d, np.dot(S, st_.d), atol=1e-15)
        np.testing.assert_allclose(out.V, np.einsum("ij,jk,lk->il", S, st_.V, S), atol=1e-14)

    def test_purity_preserved(self, rng):
        st_ = random_state(rng, 4)
        out = apply_symplectic(st_, symplectic_from_unitary(haar_like(rng, 4)))
        assert out.purity() == pytest.approx(st_.purity(), rel=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            apply_symplectic(GaussianState.vacuum(2), np.eye(2))


class TestLoss:
    def test_unit_transmissivity_is_identity(self, rng):
        st_ = random_state(rng, 2)
        out = apply_uniform_loss(st_, LossChannel(1.0))
        np.testing.assert_allclose(out.V, st_.V, atol=1e-15)
        np.testing.assert_allclose(out.d, st_.d, atol=1e-15)

    def test_full_loss_gives_vacuum(self, rng):
        out = apply_uniform_loss(random_state(rng, 3), 0.0)
        np.testing.assert_array_equal(out.d, 0)
        np.testing.assert_allclose(out.V, np.eye(6) / 2)

    def test_squeezed_vacuum_thermal_eigenvalue(self):
        r, tau = 1.0, 0.5
        expected = np.sqrt(tau * (1 - tau) * np.sinh(r) ** 2 + 0.25)
        nu = symplectic_eigenvalues(apply_uniform_loss(squeezed_vacuum(r), tau).V)
        assert nu[-1] == pytest.approx(expected, rel=1e-12)
        assert nu[-1] == pytest.approx(0.7716, abs=2e-4)

    def test_bad_tau(self):
        with pytest.raises(InvalidArgumentError):
            LossChannel(1.5)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), tau=st.floats(0, 1))
    def test_loss_commutes_with_passive_unitary(self, seed, n, tau):
        rng = np.random.default_rng(seed)
        st_ = random_state(rng, n)
        S = symplectic_from_unitary(haar_like(rng, n))
        a = apply_symplectic(apply_uniform_loss(st_, tau), S)
        b = apply_uniform_loss(apply_symplectic(st_, S), tau)
        assert np.max(np.abs(a.d - b.d)) < 1e-12
        assert np.max(np.abs(a.V - b.V)) < 1e-12

    def test_physicality_preserved(self, rng):
        for _ in range(20):
            st_ = random_state(rng, 3)
            out = apply_uniform_loss(st_, rng.uniform())
            assert symplectic_eigenvalues(out.V)[0] >= 0.5 - 1e-9


class TestProbeState:
    def test_vacuum(self):
        st_ = probe_state(1, 0.0, 0.0)
        np.testing.assert_array_equal(st_.d, 0)
        np.testing.assert_array_equal(st_.V, np.eye(4) / 2)

    def test_squeezed_diagonal(self):
        st_ = probe_state(2, 1.0, 0.0)
        e = np.e
        np.testing.assert_allclose(np.diag(st_.V),
                                   [e**2 / 2, .5, .5, .5, e**-2 / 2, .5, .5, .5], rtol=1e-15)

    def test_coherent_displacement(self):
        d = probe_state(2, 0.0, 1 + 0j).d
        expected = np.zeros(8)
        expected[2] = np.sqrt(2)
        np.testing.assert_allclose(d, expected)

    def test_imaginary_amplitude_sets_p(self):
        d = probe_state(2, 0.0, 0.5j).d
        assert d[2 * 2 + 2] == pytest.approx(np.sqrt(2) * 0.5)

    def test_zero_modes_rejected(self):
        with pytest.raises(InvalidArgumentError):
            probe_state(0, 0.1, 0.0)


class TestHomodyne:
    def test_vacuum(self):
        assert homodyne_q_distribution(GaussianState.vacuum(3), 2) == (0.0, 0.5)

    def test_squeezed(self):
        mean, var = homodyne_q_distribution(probe_state(1, 0.7, 0.0), 1)
        assert mean == 0.0
        assert var == pytest.approx(np.exp(1.4) / 2)

    def test_probe_coherent_mode(self):
        mean, var = homodyne_q_distribution(probe_state(1, 0.0, 2.0), 2)
        assert mean == pytest.approx(2 * np.sqrt(2))
        assert var == 0.5

    @pytest.mark.parametrize("mode", [0, 3])
    def test_out_of_range(self, mode):
        with pytest.raises(InvalidArgumentError):
            homodyne_q_distribution(GaussianState.vacuum(2), mode)


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        np.testing.assert_allclose(symplectic_eigenvalues(np.eye(6) / 2), 0.5)

    def test_pure_squeezed(self):
        V = probe_state(3, 1.3, 0.0).V
        np.testing.assert_allclose(symplectic_eigenvalues(V), 0.5, rtol=1e-12)

    def test_lossy_single_mode(self):
        nu = symplectic_eigenvalues(apply_uniform_loss(probe_state(2, 1.0, 0.0), 0.5).V)
        np.testing.assert_allclose(nu[:-1], 0.5, rtol=1e-12)
        assert nu[-1] == pytest.approx(np.sqrt(0.25 * np.sinh(1) ** 2 + 0.25), rel=1e-12)

    def test_not_positive_definite(self):
        with pytest.raises(InvalidArgumentError):
            symplectic_eigenvalues(np.diag([1.0, -1.0]))


class TestTypes:
    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(InvalidArgumentError):
            GaussianState(np.zeros(2), [[0.5, 0.1], [0.0, 0.5]])

    def test_unphysical_rejected(self):
        with pytest.raises(InvalidArgumentError):
            GaussianState(np.zeros(2), np.eye(2) * 0.4)

    def test_state_is_immutable(self):
        st_ = GaussianState.vacuum(1)
        with pytest.raises(ValueError):
            st_.V[0, 0] = 3.0

    def test_passive_unitary_checks(self):
        with pytest.raises(InvalidArgumentError):
            PassiveUnitary(np.ones((2, 2)))

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from qrecur import algebra, linalg
from qrecur.errors import DimensionMismatch, InvariantViolation, NotFaithful, NotHermitian

from conftest import SIGMA_Z, random_complex, random_density


def trace_gram_oracle(rho):
    """Direct omega(E_mu^dag E_nu) assembly, independent of the kron formula."""
    d = rho.shape[0]
    units = [
        np.outer(np.eye(d)[:, i], np.eye(d)[:, j]) for i in range(d) for j in range(d)
    ]
    g = np.zeros((d * d, d * d), dtype=complex)
    for a, ea in enumerate(units):
        for b, eb in enumerate(units):
            g[a, b] = np.trace(rho @ ea.conj().T @ eb)
    return g


class TestStates:
    def test_tracial_expectation_sigma_z(self):
        st_ = algebra.tracial_state(2)
        assert abs(algebra.expectation(st_, SIGMA_Z)) < 1e-14

    def test_tracial_expectation_projector(self):
        st_ = algebra.tracial_state(2)
        assert abs(algebra.expectation(st_, np.diag([1.0, 0.0])) - 0.5) < 1e-14

    def test_gibbs_expectation_matches_expm_oracle(self):
        beta = 1.0
        st_ = algebra.gibbs_state(SIGMA_Z, beta)
        # independent oracle: direct matrix exponential
        raw = scipy.linalg.expm(-beta * SIGMA_Z)
        rho_oracle = raw / np.trace(raw).real
        val = algebra.expectation(st_, SIGMA_Z)
        oracle = np.trace(rho_oracle @ SIGMA_Z)
        assert abs(val - oracle) < 1e-12
        # scalar oracle: with rho ~ exp(-beta sigma_z), <sigma_z> = -tanh(beta)
        assert abs(val - (-np.tanh(beta))) < 1e-12

    def test_gibbs_beta_zero_is_tracial(self):
        st_ = algebra.gibbs_state(SIGMA_Z, 0.0)
        assert linalg.max_abs(st_.rho - np.eye(2) / 2) < 1e-14

    def test_gibbs_scalar_entries(self):
        st_ = algebra.gibbs_state(SIGMA_Z, 1.0)
        z = np.exp(-1.0) + np.exp(1.0)
        assert abs(st_.rho[0, 0] - np.exp(-1.0) / z) < 1e-14
        assert abs(st_.rho[1, 1] - np.exp(1.0) / z) < 1e-14

    def test_gibbs_faithfulness_flips_at_large_beta(self):
        assert algebra.gibbs_state(SIGMA_Z, 2.0).is_faithful()
        cold = algebra.gibbs_state(SIGMA_Z, 30.0)
        assert not cold.is_faithful()
        # approaches a rank-one projector
        assert abs(cold.rho[1, 1] - 1.0) < 1e-12

    def test_gibbs_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            algebra.gibbs_state([[0.0, 1.0], [0.0, 0.0]], 1.0)

    def test_density_state_validates(self):
        with pytest.raises(InvariantViolation):
            algebra.density_state(np.diag([0.5, 0.4]))
        with pytest.raises(InvariantViolation):
            algebra.density_state([[0.5, 1.0], [0.0, 0.5]])
        with pytest.raises(InvariantViolation):
            algebra.density_state(np.diag([1.5, -0.5]))

    def test_expectation_positive_on_psd(self, rng):
        st_ = algebra.density_state(random_density(rng, 3))
        a = random_complex(rng, (3, 3))
        val = algebra.expectation(st_, a.conj().T @ a)
        assert val.real >= -1e-12 and abs(val.imag) < 1e-12

    def test_expectation_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            algebra.expectation(algebra.tracial_state(2), np.eye(3))


class TestGnsConstruction:
    def test_tracial_gram_is_half_identity(self):
        gns = algebra.build_gns(algebra.tracial_state(2))
        assert linalg.max_abs(gns.gram - np.eye(4) / 2) < 1e-14
        assert abs(np.vdot(gns.omega_vec, gns.omega_vec) - 1.0) < 1e-10

    def test_diagonal_state_gram_matches_trace_oracle(self):
        p = 0.3
        rho = np.diag([p, 1.0 - p]).astype(complex)
        st_ = algebra.density_state(rho)
        gns = algebra.build_gns(st_)
        oracle = trace_gram_oracle(rho)
        assert linalg.max_abs(gns.gram - oracle) < 1e-12
        # omega(E_ij^dag E_ij) = rho_jj in order E00, E01, E10, E11
        assert np.allclose(np.diag(gns.gram).real, [p, 1 - p, p, 1 - p])

    def test_pure_state_not_faithful(self):
        st_ = algebra.density_state(np.diag([1.0, 0.0]))
        with pytest.raises(NotFaithful):
            algebra.build_gns(st_)

    def test_gram_matches_trace_oracle_generic(self, rng):
        rho = random_density(rng, 3)
        gns = algebra.build_gns(algebra.density_state(rho))
        assert linalg.max_abs(gns.gram - trace_gram_oracle(rho)) < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 4))
    def test_inner_products_reproduce_traces(self, seed, d):
        rng = np.random.default_rng(seed)
        rho = random_density(rng, d)
        gns = algebra.build_gns(algebra.density_state(rho))
        a = random_complex(rng, (d, d))
        b = random_complex(rng, (d, d))
        lhs = np.vdot(gns.to_coords(a), gns.to_coords(b))
        rhs = np.trace(rho @ a.conj().T @ b)
        assert abs(lhs - rhs) < 1e-10

    def test_vector_round_trip(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 3)))
        a = random_complex(rng, (3, 3))
        back = gns.from_coords(gns.to_coords(a))
        assert linalg.max_abs(back - a) < 1e-10

    def test_gns_vector_carries_source(self, rng):
        gns = algebra.build_gns(algebra.tracial_state(2))
        a = random_complex(rng, (2, 2))
        v = algebra.gns_vector(gns, a)
        assert v.source is not None
        assert linalg.max_abs(v.source - a) == 0.0
        assert abs(np.vdot(v.coords, v.coords) - np.trace(a.conj().T @ a) / 2) < 1e-12

    def test_cyclicity_iff_faithful(self, rng):
        # faithful: the matrix units span (Gram nonsingular)
        rho = random_density(rng, 2)
        gns = algebra.build_gns(algebra.density_state(rho))
        assert np.linalg.matrix_rank(gns.gram) == 4


class TestModularOperator:
    def test_fixes_omega_and_positive(self, rng):
        rho = random_density(rng, 3)
        gns = algebra.build_gns(algebra.density_state(rho))
        assert linalg.max_abs(gns.modular @ gns.omega_vec - gns.omega_vec) < 1e-9
        assert linalg.hermitian_defect(gns.modular) < 1e-9
        eigvals = np.linalg.eigvalsh(0.5 * (gns.modular + gns.modular.conj().T))
        assert eigvals[0] > 0

    def test_tracial_modular_is_identity(self):
        gns = algebra.build_gns(algebra.tracial_state(3))
        assert linalg.max_abs(gns.modular - np.eye(9)) < 1e-12

    def test_commutator_norm_trivial_cases(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 2)))
        assert algebra.modular_commutator_norm(gns, np.eye(4)) < 1e-12
        assert algebra.modular_commutator_norm(gns, gns.modular) < 1e-9

    def test_commutator_dimension_check(self):
        gns = algebra.build_gns(algebra.tracial_state(2))
        with pytest.raises(DimensionMismatch):
            algebra.modular_commutator_norm(gns, np.eye(3))

    def test_commutator_vanishes_for_depolarizing_on_tracial(self):
        # the tracial modular operator is the identity, which forces every
        # channel contraction to commute with it
        from qrecur import channels, models

        op, state = models.depolarizing(2, 0.5)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        assert algebra.modular_commutator_norm(gns, t) < 1e-9


class TestRepresentations:
    def test_identity_maps_to_identity(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 3)))
        assert linalg.max_abs(algebra.left_representation(gns, np.eye(3)) - np.eye(9)) < 1e-10
        assert linalg.max_abs(algebra.right_representation(gns, np.eye(3)) - np.eye(9)) < 1e-10

    def test_homomorphism(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 3)))
        a = random_complex(rng, (3, 3))
        b = random_complex(rng, (3, 3))
        lhs = algebra.left_representation(gns, a @ b)
        rhs = algebra.left_representation(gns, a) @ algebra.left_representation(gns, b)
        assert linalg.max_abs(lhs - rhs) < 1e-9

    def test_right_is_anti_homomorphism(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 2)))
        b1 = random_complex(rng, (2, 2))
        b2 = random_complex(rng, (2, 2))
        lhs = algebra.right_representation(gns, b1 @ b2)
        rhs = algebra.right_representation(gns, b2) @ algebra.right_representation(gns, b1)
        assert linalg.max_abs(lhs - rhs) < 1e-9

    def test_left_right_commute(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 2)))
        left = algebra.left_representation(gns, random_complex(rng, (2, 2)))
        right = algebra.right_representation(gns, random_complex(rng, (2, 2)))
        assert linalg.max_abs(left @ right - right @ left) < 1e-9

    def test_left_representation_injective_on_basis(self, rng):
        # separating property: the stacked images of the matrix units have full rank
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 2)))
        units = [np.outer(np.eye(2)[:, i], np.eye(2)[:, j]) for i in range(2) for j in range(2)]
        stack = np.stack([algebra.left_representation(gns, e).reshape(-1) for e in units])
        assert np.linalg.matrix_rank(stack) == 4

    def test_representation_action_matches_multiplication(self, rng):
        gns = algebra.build_gns(algebra.density_state(random_density(rng, 3)))
        a = random_complex(rng, (3, 3))
        x = random_complex(rng, (3, 3))
        via_rep = algebra.left_representation(gns, a) @ gns.to_coords(x)
        direct = gns.to_coords(a @ x)
        assert np.linalg.norm(via_rep - direct) < 1e-9

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrecur import algebra, channels, linalg, models, stability
from qrecur.errors import InconsistentInputs, NotContraction

from conftest import random_complex, random_unitary


def random_contraction(rng, n, *, unitary_block=0):
    """A random strict contraction, optionally padded with a unitary block
    and conjugated by a random unitary so the peripheral part is hidden."""
    strict = random_complex(rng, (n, n))
    strict /= (1.0 + 1e-3) * linalg.operator_norm(strict)
    if unitary_block == 0:
        return strict
    u = random_unitary(rng, unitary_block)
    block = np.zeros((n + unitary_block, n + unitary_block), dtype=complex)
    block[:unitary_block, :unitary_block] = u
    block[unitary_block:, unitary_block:] = strict
    w = random_unitary(rng, n + unitary_block)
    return w @ block @ w.conj().T


class TestAsymptoticProjections:
    def test_unitary_single_doubling(self, rng):
        u = random_unitary(rng, 4)
        proj = stability.asymptotic_projections(u)
        assert proj.iterations == 1
        assert linalg.max_abs(proj.p - np.eye(4)) < 1e-12
        assert linalg.max_abs(proj.q - np.eye(4)) < 1e-12

    def test_direct_limit_diagonal(self):
        proj = stability.asymptotic_projections(np.diag([1.0, 0.5]))
        assert linalg.max_abs(proj.p - np.diag([1.0, 0.0])) < 1e-9
        assert linalg.max_abs(proj.q - np.diag([1.0, 0.0])) < 1e-9

    def test_depolarizing_projects_onto_omega(self):
        op, state = models.depolarizing(2, 0.5)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        proj = stability.asymptotic_projections(t)
        omega = np.asarray(gns.omega_vec)
        expected = np.outer(omega, omega.conj())
        assert linalg.max_abs(proj.p - expected) < 1e-9
        assert linalg.max_abs(proj.q - expected) < 1e-9

    def test_projection_properties(self, rng):
        t = random_contraction(rng, 4, unitary_block=2)
        proj = stability.asymptotic_projections(t)
        for m in (proj.p, proj.q):
            assert linalg.hermitian_defect(m) < 1e-9
            eigvals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            assert eigvals[0] > -1e-9 and eigvals[-1] < 1.0 + 1e-9
            assert linalg.max_abs(m @ m - m) < 1e-8

    def test_spectral_method_selection(self, rng):
        t = random_contraction(rng, 3, unitary_block=1)
        it = stability.asymptotic_projections(t, method="iterated_squaring")
        sp = stability.asymptotic_projections(t, method="spectral")
        assert it.method == "iterated_squaring"
        assert sp.method == "spectral"
        assert linalg.max_abs(it.p - sp.p) < 1e-7

    def test_rejects_expansion(self):
        with pytest.raises(NotContraction):
            stability.asymptotic_projections(2.0 * np.eye(3))

    def test_iteration_budget_exhaustion(self, rng):
        from qrecur.errors import NoConvergence

        t = random_contraction(rng, 3)
        with pytest.raises(NoConvergence):
            stability.asymptotic_projections(t, max_iter=0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 6), st.integers(0, 2))
    def test_iterated_agrees_with_spectral(self, seed, n, k):
        t = random_contraction(np.random.default_rng(seed), n, unitary_block=k)
        proj = stability.asymptotic_projections(t)
        assert proj.spectral_mismatch < 1e-7


class TestUnitarySubspace:
    def test_unitary_whole_space(self, rng):
        u = random_unitary(rng, 4)
        split = stability.unitary_subspace(u)
        assert split.h1_basis.shape[1] == 4
        assert split.complement_basis.shape[1] == 0
        assert split.complement_spectral_radius == 0.0

    def test_depolarizing_one_dimensional(self):
        p = 0.3
        op, state = models.depolarizing(2, p)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        split = stability.unitary_subspace(t)
        assert split.h1_basis.shape[1] == 1
        assert abs(split.complement_spectral_radius - (1.0 - p)) < 1e-12
        # H1 = span of Omega
        omega = np.asarray(gns.omega_vec)
        overlap = abs(np.vdot(split.h1_basis[:, 0], omega))
        assert abs(overlap - 1.0) < 1e-10

    def test_dephasing_two_dimensional_with_dead_complement(self):
        op, state = models.dephasing(2)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        split = stability.unitary_subspace(t)
        assert split.h1_basis.shape[1] == 2
        assert linalg.max_abs(split.t_on_complement) < 1e-12
        # H1 consists of (the coordinates of) diagonal matrices
        for i in range(2):
            mat = gns.from_coords(split.h1_basis[:, i])
            off_diag = mat - np.diag(np.diag(mat))
            assert linalg.max_abs(off_diag) < 1e-10

    def test_splitting_completeness_and_reassembly(self, rng):
        t = random_contraction(rng, 4, unitary_block=2)
        split = stability.unitary_subspace(t)
        n = t.shape[0]
        assert split.h1_basis.shape[1] + split.complement_basis.shape[1] == n
        z = np.hstack([split.h1_basis, split.complement_basis])
        rebuilt = z @ (z.conj().T @ t @ z) @ z.conj().T
        assert linalg.max_abs(rebuilt - t) < 1e-9
        assert split.coupling_residual <= 1e-8
        assert split.unitary_residual <= 1e-8
        assert split.pq_equal

    def test_h1_vectors_are_isometric(self, rng):
        t = random_contraction(rng, 3, unitary_block=2)
        split = stability.unitary_subspace(t)
        for i in range(split.h1_basis.shape[1]):
            f = split.h1_basis[:, i]
            assert abs(np.linalg.norm(t @ f) - np.linalg.norm(f)) < 1e-9


class TestPqCriterion:
    def test_normal_contraction(self, rng):
        # normal operators satisfy T^dag T = T T^dag, so P = Q always
        u = random_unitary(rng, 4)
        t = u @ np.diag([1.0, 0.6, 0.3, 0.1]) @ u.conj().T
        proj = stability.asymptotic_projections(t)
        split = stability.unitary_subspace(t)
        report = stability.pq_criterion(proj, split)
        assert report.pq_residual < 1e-9
        assert report.criterion_holds
        assert report.complement_strongly_stable
        assert report.biconditional_ok

    def test_unitary_vacuous(self, rng):
        u = random_unitary(rng, 3)
        proj = stability.asymptotic_projections(u)
        split = stability.unitary_subspace(u)
        report = stability.pq_criterion(proj, split)
        assert report.criterion_holds
        assert report.rank_p == 3 and report.dim_h1 == 3
        assert report.biconditional_ok

    def test_non_normal_padded_block(self):
        # non-normal strict block padded with a unitary 1-block; both sides
        # of the biconditional verified from the computed objects
        block = np.zeros((3, 3), dtype=complex)
        block[0, 0] = 1.0
        block[1:, 1:] = [[0.5, 0.5], [0.0, 0.5]]
        proj = stability.asymptotic_projections(block)
        split = stability.unitary_subspace(block)
        report = stability.pq_criterion(proj, split)
        assert report.criterion_holds
        assert report.complement_strongly_stable
        assert report.biconditional_ok
        # complement restriction genuinely power-decays
        assert report.complement_power_norm < 1e-6

    def test_inconsistent_inputs(self, rng):
        proj = stability.asymptotic_projections(random_unitary(rng, 3))
        split = stability.unitary_subspace(random_unitary(rng, 4))
        with pytest.raises(InconsistentInputs):
            stability.pq_criterion(proj, split)


class TestStrongStability:
    def test_zero_operator(self):
        verdicts = stability.strong_stability_check(
            np.zeros((3, 3)), [np.ones(3)], 1, tol=1e-9
        )
        assert verdicts[0].stable

    def test_unitary_never_stable(self, rng):
        u = random_unitary(rng, 3)
        f = random_complex(rng, 3)
        verdicts = stability.strong_stability_check(u, [f], 500)
        assert not verdicts[0].stable
        assert abs(verdicts[0].final_ratio - 1.0) < 1e-9

    def test_depolarizing_complement_decay_exponent(self):
        p = 0.5
        op, state = models.depolarizing(2, p)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        split = stability.unitary_subspace(t)
        vectors = [split.complement_basis[:, i] for i in range(3)]
        verdicts = stability.strong_stability_check(t, vectors, 40, tol=1e-9)
        for v in verdicts:
            assert v.stable
            assert abs(v.decay_exponent - np.log(1.0 - p)) < 1e-3

    def test_zero_vector(self):
        verdicts = stability.strong_stability_check(np.eye(2), [np.zeros(2)], 10)
        assert verdicts[0].stable and verdicts[0].decay_exponent is None


class TestSpectralStability:
    def test_continuous_stable_generator(self):
        report = stability.spectral_stability_test(-np.eye(2), "continuous")
        assert report.verdict == stability.VERDICT_STABLE
        assert len(report.peripheral) == 0
        assert report.cross_check_agrees

    def test_imaginary_generator_not_stable(self):
        # 1x1 generator i: empty residual spectrum, yet the flow is isometric
        report = stability.spectral_stability_test(np.array([[1j]]), "continuous")
        assert report.verdict == stability.VERDICT_UNITARY_PART
        assert abs(report.peripheral[0] - 1j) < 1e-12
        assert "residual spectrum" in report.residual_spectrum_note

    def test_depolarizing_discrete_peripheral_one(self):
        op, _ = models.depolarizing(2, 0.5)
        report = stability.spectral_stability_test(op.transfer, "discrete")
        assert report.verdict == stability.VERDICT_UNITARY_PART
        assert len(report.peripheral) == 1
        assert abs(report.peripheral[0] - 1.0) < 1e-12

    def test_discrete_strictly_stable(self):
        report = stability.spectral_stability_test(0.5 * np.eye(3), "discrete")
        assert report.verdict == stability.VERDICT_STABLE

    def test_defective_peripheral_is_indeterminate(self):
        jordan = np.array([[1.0, 1.0], [0.0, 1.0]])
        report = stability.spectral_stability_test(jordan, "discrete")
        assert report.verdict == stability.VERDICT_INDETERMINATE

    def test_note_attached_in_both_modes(self):
        for mode, m in (("discrete", 0.5 * np.eye(2)), ("continuous", -np.eye(2))):
            report = stability.spectral_stability_test(m, mode)
            assert report.residual_spectrum_note == stability.FINITE_DIM_NOTE

    def test_discrete_verdict_matches_full_basis_decay(self, rng):
        # strongly_stable iff every basis vector decays within the number of
        # steps dictated by the spectral radius
        for scale, expect_stable in ((0.6, True), (1.0, False)):
            t = random_contraction(rng, 4, unitary_block=0 if expect_stable else 1)
            if expect_stable:
                t = scale * t
            report = stability.spectral_stability_test(t, "discrete")
            radius = float(np.max(np.abs(report.eigenvalues)))
            tol = 1e-9
            steps = (
                int(np.ceil(np.log(tol) / np.log(radius))) if 0 < radius < 1 else 64
            )
            basis = [np.eye(t.shape[0])[:, i] for i in range(t.shape[0])]
            verdicts = stability.strong_stability_check(t, basis, steps, tol=1e-6)
            all_decay = all(v.stable for v in verdicts)
            assert (report.verdict == stability.VERDICT_STABLE) == all_decay
            assert all_decay == expect_stable


class TestRecurrenceStabilityTension:
    def test_omega_component_survives_projection(self, rng):
        # for detailed-balance channels, a Omega keeps a component of size at
        # least |omega(A)|^2 / ||a Omega|| in the range of P
        for op, state in [
            models.depolarizing(2, 0.4),
            models.dephasing(2),
            models.thermal_qubit(1.0, 0.3),
            models.mixture_of_unitaries(3, 3, seed=51),
        ]:
            gns = algebra.build_gns(state)
            t = channels.build_contraction(op, gns)
            proj = stability.asymptotic_projections(t)
            for _ in range(5):
                a = random_complex(rng, (state.dim, state.dim))
                omega_a = abs(algebra.expectation(state, a))
                if omega_a <= 1e-6:
                    continue
                x = gns.to_coords(a)
                bound = omega_a**2 / np.linalg.norm(x)
                assert np.linalg.norm(proj.p @ x) >= bound - 1e-6

import numpy as np
import pytest

from qrecur import algebra, channels, linalg, models, recurrence
from qrecur.errors import BadParam, ContractionViolation

from conftest import random_complex

GOLDEN_THETA = 2.0 * np.pi * (np.sqrt(5.0) - 1.0) / 2.0


def rotation_observable():
    a = 0.5 * np.eye(2, dtype=complex)
    a[0, 1] += 1.0
    return a


class TestCorrelationSequence:
    def test_identity_channel_constant(self, rng):
        op = channels.identity_channel(2)
        state = algebra.tracial_state(2)
        a = random_complex(rng, (2, 2))
        series = recurrence.correlation_sequence(op, state, a, 40)
        assert np.allclose(series.values, series.base, atol=1e-12)

    def test_depolarizing_closed_form(self):
        # tau^n(A) = (1-p)^n A + (1 - (1-p)^n) Tr(A) I / d gives, for
        # p = 1/2, tracial phi and A = |0><0|:  c_n = 1/4 + (1/4) (1/2)^n
        op, state = models.depolarizing(2, 0.5)
        a = np.diag([1.0, 0.0]).astype(complex)
        series = recurrence.correlation_sequence(op, state, a, 50)
        expected = 0.25 + 0.25 * 0.5 ** np.arange(51)
        assert linalg.max_abs(series.values - expected) < 1e-12
        assert abs(series.values[0] - 0.5) < 1e-12
        assert abs(series.values[1] - 0.375) < 1e-12
        assert abs(series.abs_expectation_sq - 0.25) < 1e-12

    def test_rotation_closed_form(self):
        # U = diag(1, e^{i theta}), A = I/2 + E01: c_n = 1/4 + cos(n theta)/2
        theta = 0.7
        op, state = models.rotation(2, theta)
        series = recurrence.correlation_sequence(op, state, rotation_observable(), 200)
        expected = 0.25 + 0.5 * np.cos(theta * np.arange(201))
        assert linalg.max_abs(series.values - expected) < 1e-12

    def test_base_equals_direct_quadratic(self, rng):
        op, state = models.depolarizing(3, 0.4)
        a = random_complex(rng, (3, 3))
        series = recurrence.correlation_sequence(op, state, a, 5)
        direct = np.trace(state.rho @ a.conj().T @ a).real
        assert abs(series.base - direct) < 1e-12
        assert abs(series.values[0] - direct) < 1e-10

    def test_two_path_consistency_with_gns(self, rng):
        # <a Omega, T^n a Omega> computed through GNS coordinates agrees with
        # the direct trace iteration for phi = omega
        op, state = models.mixture_of_unitaries(2, 3, seed=17)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        a = random_complex(rng, (2, 2))
        series = recurrence.correlation_sequence(op, state, a, 30)
        x = gns.to_coords(a)
        y = x.copy()
        for n in range(31):
            assert abs(np.vdot(x, y).real - series.values[n]) < 1e-9
            y = t @ y

    def test_cauchy_schwarz_chain(self, rng):
        op, state = models.mixture_of_unitaries(2, 2, seed=23)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        a = random_complex(rng, (2, 2))
        x = gns.to_coords(a)
        y = x.copy()
        for _ in range(40):
            inner = np.vdot(x, y)
            assert np.linalg.norm(x) * np.linalg.norm(y) >= abs(inner) - 1e-10
            assert abs(inner) >= inner.real - 1e-10
            y = t @ y

    def test_values_bounded_by_base_under_contraction(self, rng):
        # Cauchy-Schwarz in the GNS space: |c_n| <= c_0 for channels passing
        # the contraction hypothesis
        for op, state in [
            models.depolarizing(2, 0.3),
            models.thermal_qubit(1.0, 0.4),
            models.mixture_of_unitaries(3, 3, seed=43),
        ]:
            a = random_complex(rng, (state.dim, state.dim))
            series = recurrence.correlation_sequence(op, state, a, 300)
            assert np.all(np.abs(series.values) <= series.base + 1e-9)

    def test_bad_horizon(self):
        op, state = models.depolarizing(2, 0.5)
        with pytest.raises(BadParam):
            recurrence.correlation_sequence(op, state, np.eye(2), 0)


class TestRecurrenceSet:
    def test_constant_series_all_indices(self):
        op = channels.identity_channel(2)
        state = algebra.tracial_state(2)
        series = recurrence.correlation_sequence(op, state, np.diag([1.0, 0.0]), 30)
        rset = recurrence.recurrence_set(series, 0.01)
        assert np.array_equal(rset.indices, np.arange(31))
        assert rset.max_gap == 1

    def test_depolarizing_cofinite(self):
        # c_n = 1/4 + (1/4)(1/2)^n > 1/4 for every n, so all indices qualify
        op, state = models.depolarizing(2, 0.5)
        series = recurrence.correlation_sequence(op, state, np.diag([1.0, 0.0]), 100)
        rset = recurrence.recurrence_set(series, 0.01)
        assert len(rset.indices) == 101
        assert rset.max_gap == 1

    def test_rotation_against_brute_force_oracle(self):
        # independent oracle: the closed form c_n = 1/4 + cos(n theta)/2 puts
        # n in the set iff cos(n theta) >= -2 eps
        eps = 0.05
        horizon = 2000
        op, state = models.rotation(2, GOLDEN_THETA)
        series = recurrence.correlation_sequence(op, state, rotation_observable(), horizon)
        rset = recurrence.recurrence_set(series, eps)
        oracle = np.flatnonzero(np.cos(GOLDEN_THETA * np.arange(horizon + 1)) >= -2 * eps - 1e-12)
        assert np.array_equal(rset.indices, oracle)

    def test_rotation_gap_stable_under_doubling(self):
        eps = 0.05
        op, state = models.rotation(2, GOLDEN_THETA)
        a = rotation_observable()
        gaps = []
        for horizon in (2000, 4000, 8000):
            series = recurrence.correlation_sequence(op, state, a, horizon)
            gaps.append(recurrence.recurrence_set(series, eps).max_gap)
        assert gaps[0] == gaps[1] == gaps[2]

    def test_listed_indices_satisfy_threshold(self, rng):
        op, state = models.mixture_of_unitaries(2, 3, seed=31)
        a = random_complex(rng, (2, 2))
        series = recurrence.correlation_sequence(op, state, a, 500)
        rset = recurrence.recurrence_set(series, 0.01 * series.base)
        assert np.all(series.values[rset.indices] >= rset.threshold - 1e-12)

    def test_empty_set_is_legal(self):
        # a strictly decaying series with a threshold above its tail
        series = recurrence.CorrelationSeries(
            values=np.array([1.0, 0.1, 0.1, 0.1]), abs_expectation_sq=0.9,
            base=1.0, horizon=3,
        )
        rset = recurrence.recurrence_set(series, 0.5)
        assert np.array_equal(rset.indices, [0])
        empty = recurrence.recurrence_set(
            recurrence.CorrelationSeries(
                values=np.array([0.0, 0.0]), abs_expectation_sq=0.9, base=0.0, horizon=1
            ),
            0.1,
        )
        assert len(empty.indices) == 0
        assert empty.max_gap == 3  # horizon + 2

    def test_epsilon_must_be_positive(self):
        series = recurrence.CorrelationSeries(
            values=np.zeros(3), abs_expectation_sq=0.0, base=0.0, horizon=2
        )
        with pytest.raises(BadParam):
            recurrence.recurrence_set(series, 0.0)


class TestGapProbe:
    def test_identity_every_window(self):
        op = channels.identity_channel(2)
        state = algebra.tracial_state(2)
        probe = recurrence.gap_stability_probe(
            op, state, np.diag([1.0, 0.0]), 0.01, [100, 1000, 5000]
        )
        assert [g for _, g in probe.rows] == [1, 1, 1]
        assert probe.evidence == recurrence.EVIDENCE_SATURATING

    def test_rotation_three_windows(self):
        op, state = models.rotation(2, GOLDEN_THETA)
        probe = recurrence.gap_stability_probe(
            op, state, rotation_observable(), 0.05, [1000, 10_000, 100_000]
        )
        gaps = [g for _, g in probe.rows]
        assert gaps[0] == gaps[1] == gaps[2]
        assert probe.evidence == recurrence.EVIDENCE_SATURATING

    def test_vacuous_threshold_below_zero(self):
        # strictly contractive channel with phi(A) = 0: the threshold -eps is
        # negative and the probe must still produce a report
        op, state = models.depolarizing(2, 0.9)
        a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # trace zero
        probe = recurrence.gap_stability_probe(op, state, a, 0.05, [100, 1000])
        assert probe.rows[0][1] >= 1

    def test_windows_must_ascend(self):
        op, state = models.depolarizing(2, 0.5)
        with pytest.raises(BadParam):
            recurrence.gap_stability_probe(op, state, np.eye(2), 0.01, [100, 50])


class TestNormSequence:
    def test_unitary_constant(self, rng):
        op, state = models.rotation(2, 1.1)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        a = random_complex(rng, (2, 2))
        seq = recurrence.norm_sequence(t, gns, a, 50)
        assert linalg.max_abs(seq.values - seq.values[0]) < 1e-10

    def test_depolarizing_closed_form(self):
        # ||T^n a Omega||^2 = 1/4 + (1/4)(1/4)^n for p = 1/2, A = |0><0|
        op, state = models.depolarizing(2, 0.5)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        a = np.diag([1.0, 0.0]).astype(complex)
        seq = recurrence.norm_sequence(t, gns, a, 60)
        expected = np.sqrt(0.25 + 0.25 * 0.25 ** np.arange(61))
        assert linalg.max_abs(seq.values - expected) < 1e-12
        assert abs(seq.values[0] - np.sqrt(0.5)) < 1e-12
        # terminal value against the expectation bound |omega(A)|^2 / ||a Omega||
        assert abs(seq.lower_bound - 0.25 / np.sqrt(0.5)) < 1e-12
        assert seq.values[-1] + 1e-6 >= seq.lower_bound
        assert not seq.bound_violated

    def test_monotone_nonincreasing(self, rng):
        op, state = models.mixture_of_unitaries(3, 3, seed=37)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        seq = recurrence.norm_sequence(t, gns, random_complex(rng, (3, 3)), 200)
        assert np.all(np.diff(seq.values) <= 1e-12)

    def test_traceless_may_decay_without_flag(self):
        op, state = models.depolarizing(2, 0.5)
        gns = algebra.build_gns(state)
        t = channels.build_contraction(op, gns)
        a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        seq = recurrence.norm_sequence(t, gns, a, 200)
        assert seq.lower_bound == 0.0
        assert seq.values[-1] < 1e-12
        assert not seq.bound_violated

    def test_expansion_raises(self):
        gns = algebra.build_gns(algebra.tracial_state(2))
        with pytest.raises(ContractionViolation):
            recurrence.norm_sequence(2.0 * np.eye(4), gns, np.diag([1.0, 0.0]), 5)

    def test_khintchin_lower_bound_on_db_zoo(self, rng):
        # whenever omega(A) != 0 the terminal norm respects the bound
        for op, state in [
            models.depolarizing(2, 0.5),
            models.dephasing(2),
            models.thermal_qubit(0.5, 0.3),
            models.mixture_of_unitaries(2, 3, seed=41),
        ]:
            gns = algebra.build_gns(state)
            t = channels.build_contraction(op, gns)
            for _ in range(5):
                a = random_complex(rng, (2, 2))
                if abs(algebra.expectation(state, a)) < 1e-6:
                    continue
                seq = recurrence.norm_sequence(t, gns, a, 400)
                assert seq.values[-1] >= seq.lower_bound - 1e-6
                assert not seq.bound_violated

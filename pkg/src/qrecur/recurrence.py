"""Correlation sequences, recurrence sets, and the norm-sequence bound.

For a channel tau, a state phi and an observable A the correlation series
is c_n = Re phi(A^dag tau^n(A)), computed in a single pass by iterating
the transfer matrix on vec(A) (O(N d^4) total).  The recurrence set at
level epsilon collects the n with c_n >= |phi(A)|^2 - epsilon, together
with gap statistics over the window: relative density of the set is
*evidenced* by the maximal gap saturating as the window grows, never
certified.

The norm sequence ||T^n (A Omega)|| of a verified GNS contraction is
nonincreasing and, whenever omega(A) != 0, bounded below by
|omega(A)|^2 / ||A Omega||; the report flags a violation of that bound
instead of failing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import linalg
from .algebra import GnsSpace, State, expectation, vec
from .channels import SuperOperator
from .errors import BadParam, ContractionViolation, DimensionMismatch

EVIDENCE_SATURATING = "saturating"
EVIDENCE_GROWING = "growing"
EVIDENCE_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CorrelationSeries:
    """c_n = Re phi(A^dag tau^n(A)) for n = 0..horizon."""

    values: np.ndarray
    abs_expectation_sq: float
    base: float
    horizon: int


@dataclass(frozen=True)
class RecurrenceSet:
    """Indices with c_n >= |phi(A)|^2 - epsilon, plus gap statistics.

    ``max_gap`` is the largest difference of consecutive indices, with the
    window edges (virtual indices -1 and horizon+1) included as gap
    boundaries; an empty set therefore has max_gap = horizon + 2.
    """

    epsilon: float
    threshold: float
    indices: np.ndarray
    max_gap: int
    gap_histogram: dict


@dataclass(frozen=True)
class GapProbe:
    """max_gap per window plus a qualitative relative-density evidence tag."""

    epsilon: float
    rows: list
    evidence: str


@dataclass(frozen=True)
class NormSequence:
    """||T^n (A Omega)|| for n = 0..N with the correlation lower bound."""

    values: np.ndarray
    lower_bound: float
    bound_violated: bool


def correlation_sequence(
    op: SuperOperator, state: State, a, n_steps: int
) -> CorrelationSeries:
    """Single-pass computation of c_n = Re phi(A^dag tau^n(A)), n <= n_steps."""
    if n_steps < 1:
        raise BadParam(f"horizon must be >= 1, got {n_steps}")
    a = np.asarray(a, dtype=complex)
    if a.shape != (op.dim, op.dim):
        raise DimensionMismatch(
            f"observable shape {a.shape} does not match channel dimension {op.dim}"
        )
    if state.dim != op.dim:
        raise DimensionMismatch(
            f"state dimension {state.dim} does not match channel dimension {op.dim}"
        )
    # c_n = Re Tr(rho A^dag B_n) = Re g . vec(B_n) with g = vec((rho A^dag).T)
    g = (state.rho @ a.conj().T).T.reshape(-1)
    w = vec(a)
    values = np.empty(n_steps + 1)
    for n in range(n_steps + 1):
        values[n] = (g @ w).real
        if n < n_steps:
            w = op.transfer @ w
    base = float(np.trace(state.rho @ a.conj().T @ a).real)
    exp_sq = float(abs(expectation(state, a)) ** 2)
    return CorrelationSeries(
        values=linalg.frozen(values),
        abs_expectation_sq=exp_sq,
        base=base,
        horizon=n_steps,
    )


def _gaps(indices: np.ndarray, horizon: int) -> list:
    """All gaps, with virtual boundary indices -1 and horizon + 1."""
    if len(indices) == 0:
        return [horizon + 2]
    inner = np.diff(indices).tolist()
    return [int(indices[0]) + 1] + [int(g) for g in inner] + [horizon + 1 - int(indices[-1])]


def recurrence_set(series: CorrelationSeries, epsilon: float) -> RecurrenceSet:
    """Indices where the correlation returns above |phi(A)|^2 - epsilon."""
    if epsilon <= 0:
        raise BadParam(f"epsilon must be positive, got {epsilon}")
    threshold = series.abs_expectation_sq - epsilon
    mask = series.values >= threshold - 1e-12
    indices = np.flatnonzero(mask)
    gaps = _gaps(indices, series.horizon)
    return RecurrenceSet(
        epsilon=float(epsilon),
        threshold=float(threshold),
        indices=linalg.frozen(indices),
        max_gap=int(max(gaps)),
        gap_histogram=dict(sorted(Counter(gaps).items())),
    )


def gap_stability_probe(
    op: SuperOperator, state: State, a, epsilon: float, windows
) -> GapProbe:
    """max_gap across growing windows; the series is computed once for the
    largest window and truncated for each smaller one."""
    windows = [int(w) for w in windows]
    if not windows or any(w < 1 for w in windows):
        raise BadParam("windows must be a nonempty list of positive horizons")
    if windows != sorted(windows):
        raise BadParam("windows must be ascending")
    full = correlation_sequence(op, state, a, windows[-1])
    rows = []
    for w in windows:
        sub = CorrelationSeries(
            values=full.values[: w + 1],
            abs_expectation_sq=full.abs_expectation_sq,
            base=full.base,
            horizon=w,
        )
        rows.append((w, recurrence_set(sub, epsilon).max_gap))
    gaps = [g for _, g in rows]
    if len(gaps) >= 2 and gaps[-1] == gaps[-2]:
        evidence = EVIDENCE_SATURATING
    elif len(gaps) >= 2 and all(x < y for x, y in zip(gaps, gaps[1:])):
        evidence = EVIDENCE_GROWING
    else:
        evidence = EVIDENCE_INCONCLUSIVE
    return GapProbe(epsilon=float(epsilon), rows=rows, evidence=evidence)


def norm_sequence(t, gns: GnsSpace, a, n_steps: int) -> NormSequence:
    """||T^n (A Omega)|| for a verified contraction T in omega coordinates.

    Raises :class:`ContractionViolation` if the sequence ever grows by more
    than a factor 1 + 1e-9 between steps.
    """
    t = np.asarray(t, dtype=complex)
    if t.shape != (gns.dim, gns.dim):
        raise DimensionMismatch(
            f"operator shape {t.shape} does not match GNS dimension {gns.dim}"
        )
    if n_steps < 1:
        raise BadParam(f"horizon must be >= 1, got {n_steps}")
    x = gns.to_coords(a)
    values = np.empty(n_steps + 1)
    values[0] = np.linalg.norm(x)
    for n in range(1, n_steps + 1):
        x = t @ x
        values[n] = np.linalg.norm(x)
        if values[n] > values[n - 1] * (1.0 + 1e-9):
            raise ContractionViolation(
                f"norm sequence increased at step {n}: "
                f"{values[n - 1]:.12g} -> {values[n]:.12g}"
            )
    a_norm = values[0]
    omega_a = abs(expectation(gns.state, np.asarray(a, dtype=complex)))
    lower = float(omega_a**2 / a_norm) if a_norm > 0 else 0.0
    return NormSequence(
        values=linalg.frozen(values),
        lower_bound=lower,
        bound_violated=bool(values[-1] + 1e-6 < lower),
    )

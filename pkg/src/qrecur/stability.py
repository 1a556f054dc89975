"""Asymptotic projections, unitary/CNU splitting, and spectral stability.

For a contraction T on the GNS space (adjoints are literal conjugate
transposes in omega-orthonormal coordinates):

* P = lim (T^dag)^n T^n and Q = lim T^n (T^dag)^n, computed by doubling n
  until the step delta falls below tolerance, and independently by the
  spectral method (orthogonal projector onto the span of
  unimodular-eigenvalue eigenvectors); the two are cross-checked.
* H_1 is the maximal subspace on which T restricts to a unitary; for a
  finite-dimensional contraction it is spanned by the eigenvectors with
  |lambda| = 1, it reduces T, and the complement restriction has spectral
  radius < 1.  Consequently P = Q = projector onto H_1 always holds here;
  the criterion "P = Q is a projection iff T and T^dag are jointly
  strongly stable on the complement" is verified on both sides anyway.

Spectral stability verdicts cover a discrete power-bounded step or a
continuous semigroup generator.  For matrices the residual spectrum is
empty and the spectrum is finite, so the operative criterion is emptiness
of the peripheral *point* spectrum; a generator like i*identity has no
residual spectrum yet generates a non-decaying isometric flow, and the
report says so explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (
    DimensionMismatch,
    InconsistentInputs,
    NoConvergence,
    NotContraction,
)

PERIPHERAL_TOL = 1e-7
CLUSTER_MERGE_TOL = 1e-7

FINITE_DIM_NOTE = (
    "finite matrices have empty residual spectrum and finite (hence countable) "
    "spectrum; the operative stability criterion is emptiness of the peripheral "
    "point spectrum. A condition on the residual spectrum alone cannot decide "
    "stability here: the generator i*identity has empty residual spectrum but "
    "generates an isometric, non-decaying flow."
)


def _require_contraction(t: np.ndarray, tol: float = 1e-9) -> float:
    norm = linalg.operator_norm(t)
    if norm > 1.0 + tol:
        raise NotContraction(f"operator norm {norm:.12g} exceeds 1 + {tol:.1e}")
    return norm


def _peripheral_count(abs_vals: np.ndarray, threshold: float) -> int:
    """Size of the leading |lambda| >= threshold block, with clusters within
    CLUSTER_MERGE_TOL of the boundary merged in to avoid splitting a
    multiple eigenvalue."""
    n = len(abs_vals)
    k = int(np.sum(abs_vals >= threshold))
    while 0 < k < n and abs_vals[k - 1] - abs_vals[k] <= CLUSTER_MERGE_TOL:
        k += 1
    return k


def _peripheral_schur(t: np.ndarray, tol: float):
    """Ordered Schur form plus the peripheral block size for threshold 1 - tol."""
    tri, z = linalg.ordered_schur(t)
    abs_vals = np.abs(np.diag(tri))
    k = _peripheral_count(abs_vals, 1.0 - tol)
    return tri, z, k


def _peripheral_projector(t: np.ndarray, tol: float) -> np.ndarray:
    _, z, k = _peripheral_schur(t, tol)
    zk = z[:, :k]
    return zk @ zk.conj().T


@dataclass(frozen=True)
class AsymptoticProjections:
    p: np.ndarray
    q: np.ndarray
    iterations: int
    residuals: dict
    method: str
    spectral_mismatch: float


def asymptotic_projections(
    t,
    tol: float = 1e-9,
    max_iter: int = 60,
    *,
    method: str = "iterated_squaring",
    peripheral_tol: float = PERIPHERAL_TOL,
    cross_check_tol: float = 1e-7,
) -> AsymptoticProjections:
    """P = lim (T^dag)^n T^n and Q = lim T^n (T^dag)^n for a contraction.

    The iterated route doubles n (n = 2^k) until successive iterates differ
    by at most ``tol`` in max norm; the spectral route projects onto the
    peripheral eigenspaces of T and T^dag.  Both are always computed and
    must agree within ``cross_check_tol``.
    """
    t = linalg.as_matrix(t, square=True, name="contraction")
    _require_contraction(t)

    p_spec = _peripheral_projector(t, peripheral_tol)
    q_spec = _peripheral_projector(t.conj().T, peripheral_tol)

    s = np.array(t)
    p_prev = s.conj().T @ s
    q_prev = s @ s.conj().T
    iterations = 0
    p_delta = q_delta = np.inf
    for _ in range(max_iter):
        s = s @ s
        p_new = s.conj().T @ s
        q_new = s @ s.conj().T
        p_delta = linalg.max_abs(p_new - p_prev)
        q_delta = linalg.max_abs(q_new - q_prev)
        p_prev, q_prev = p_new, q_new
        iterations += 1
        if max(p_delta, q_delta) <= tol:
            break
    else:
        raise NoConvergence(
            f"projection iteration did not converge in {max_iter} doublings "
            f"(last deltas {p_delta:.3e}, {q_delta:.3e})"
        )

    mismatch = max(linalg.max_abs(p_prev - p_spec), linalg.max_abs(q_prev - q_spec))
    if mismatch > cross_check_tol:
        raise NoConvergence(
            f"iterated and spectral projections disagree by {mismatch:.3e} "
            f"> {cross_check_tol:.1e}"
        )
    if method == "iterated_squaring":
        p, q = p_prev, q_prev
    elif method == "spectral":
        p, q = p_spec, q_spec
    else:
        raise ValueError(f"unknown method {method!r}")
    return AsymptoticProjections(
        p=linalg.frozen(p),
        q=linalg.frozen(q),
        iterations=iterations,
        residuals={"p_delta": float(p_delta), "q_delta": float(q_delta)},
        method=method,
        spectral_mismatch=float(mismatch),
    )


@dataclass(frozen=True)
class Splitting:
    """Unitary/completely-non-unitary splitting of a contraction."""

    h1_basis: np.ndarray
    complement_basis: np.ndarray
    t_on_h1: np.ndarray
    t_on_complement: np.ndarray
    unitary_residual: float
    complement_spectral_radius: float
    coupling_residual: float
    pq_equal: bool
    pq_residual: float


def unitary_subspace(t, tol: float = PERIPHERAL_TOL) -> Splitting:
    """Split the space into the maximal unitary subspace H_1 (eigenvectors
    with |lambda| >= 1 - tol) and its orthogonal complement."""
    t = linalg.as_matrix(t, square=True, name="contraction")
    _require_contraction(t)
    tri, z, k = _peripheral_schur(t, tol)
    z1, z2 = z[:, :k], z[:, k:]
    t1 = z1.conj().T @ t @ z1
    t2 = z2.conj().T @ t @ z2
    unitary_residual = (
        linalg.max_abs(t1.conj().T @ t1 - np.eye(k)) if k else 0.0
    )
    if unitary_residual > 1e-8:
        raise NotContraction(
            "peripheral block is not unitary "
            f"(residual {unitary_residual:.3e}); the input cannot be a "
            "power-bounded contraction"
        )
    radius = float(np.max(np.abs(np.diag(tri)[k:]))) if k < tri.shape[0] else 0.0
    coupling = max(
        linalg.max_abs(z1.conj().T @ t @ z2),
        linalg.max_abs(z2.conj().T @ t @ z1),
    )
    p1 = z1 @ z1.conj().T
    q1 = _peripheral_projector(t.conj().T, tol)
    pq_residual = linalg.max_abs(p1 - q1)
    return Splitting(
        h1_basis=linalg.frozen(z1),
        complement_basis=linalg.frozen(z2),
        t_on_h1=linalg.frozen(t1),
        t_on_complement=linalg.frozen(t2),
        unitary_residual=float(unitary_residual),
        complement_spectral_radius=radius,
        coupling_residual=float(coupling),
        pq_equal=bool(pq_residual <= 1e-8),
        pq_residual=float(pq_residual),
    )


@dataclass(frozen=True)
class PqReport:
    pq_residual: float
    idempotency_residual: float
    max_principal_angle: float
    rank_p: int
    dim_h1: int
    criterion_holds: bool
    complement_strongly_stable: bool
    complement_power_norm: float
    biconditional_ok: bool


def pq_criterion(
    proj: AsymptoticProjections,
    split: Splitting,
    tol: float = 1e-8,
    *,
    angle_tol: float = 1e-6,
) -> PqReport:
    """Check that P = Q is a projection with range H_1, against joint strong
    stability of the complement restriction (spectral radius < 1, verified
    by power decay).  Returns both sides and whether the biconditional holds.
    """
    n = proj.p.shape[0]
    if split.h1_basis.shape[0] != n:
        raise InconsistentInputs(
            f"projections are {n}-dimensional but the splitting is "
            f"{split.h1_basis.shape[0]}-dimensional"
        )
    pq_residual = linalg.max_abs(proj.p - proj.q)
    idem = linalg.max_abs(proj.p @ proj.p - proj.p)
    vals, vecs = np.linalg.eigh(0.5 * (proj.p + proj.p.conj().T))
    range_basis = vecs[:, vals > 0.5]
    rank_p = range_basis.shape[1]
    dim_h1 = split.h1_basis.shape[1]
    if rank_p != dim_h1:
        max_angle = np.pi / 2.0
    elif rank_p == 0:
        max_angle = 0.0
    else:
        angles = scipy.linalg.subspace_angles(range_basis, np.asarray(split.h1_basis))
        max_angle = float(np.max(angles)) if len(angles) else 0.0
    criterion = (
        pq_residual <= tol
        and idem <= max(tol, 1e-8)
        and rank_p == dim_h1
        and max_angle <= angle_tol
    )
    # joint strong stability of T and T^dag on the complement: the power
    # norms of the restriction and its adjoint coincide, so one decay check
    # covers both.
    r = split.complement_spectral_radius
    stable = r < 1.0 - PERIPHERAL_TOL
    t2 = np.asarray(split.t_on_complement)
    if t2.shape[0] == 0:
        power_norm = 0.0
    else:
        steps = 64 if r <= 0 else min(4096, max(4, int(np.ceil(np.log(1e-8) / np.log(max(r, 1e-300))))))
        power_norm = linalg.operator_norm(np.linalg.matrix_power(t2, steps))
    return PqReport(
        pq_residual=float(pq_residual),
        idempotency_residual=float(idem),
        max_principal_angle=float(max_angle),
        rank_p=rank_p,
        dim_h1=dim_h1,
        criterion_holds=bool(criterion),
        complement_strongly_stable=bool(stable),
        complement_power_norm=float(power_norm),
        biconditional_ok=bool(criterion == stable),
    )


@dataclass(frozen=True)
class VectorVerdict:
    stable: bool
    final_ratio: float
    decay_exponent: float | None


def strong_stability_check(t, vectors, n_steps: int, tol: float = 1e-9):
    """Per-vector verdicts: does ||T^N f|| fall below tol * ||f||?"""
    t = linalg.as_matrix(t, square=True, name="operator")
    tn = np.linalg.matrix_power(np.asarray(t), n_steps)
    verdicts = []
    for f in vectors:
        coords = np.asarray(getattr(f, "coords", f), dtype=complex)
        if coords.shape != (t.shape[0],):
            raise DimensionMismatch(
                f"vector shape {coords.shape} does not match operator size {t.shape[0]}"
            )
        norm0 = np.linalg.norm(coords)
        if norm0 == 0.0:
            verdicts.append(VectorVerdict(True, 0.0, None))
            continue
        ratio = float(np.linalg.norm(tn @ coords) / norm0)
        exponent = float(np.log(ratio) / n_steps) if ratio > 0 else float("-inf")
        verdicts.append(VectorVerdict(bool(ratio <= tol), ratio, exponent))
    return verdicts


VERDICT_STABLE = "strongly_stable"
VERDICT_UNITARY_PART = "unitary_part_present"
VERDICT_INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class SpectralReport:
    mode: str
    eigenvalues: np.ndarray
    peripheral: np.ndarray
    verdict: str
    residual_spectrum_note: str
    cross_check_agrees: bool | None


def _discrete_verdict(step: np.ndarray, tol: float):
    sys = linalg.general_eig(step)
    abs_vals = np.abs(sys.eigenvalues)
    k = _peripheral_count(abs_vals, 1.0 - tol)
    peripheral = sys.eigenvalues[:k]
    if k == 0:
        return sys.eigenvalues, peripheral, VERDICT_STABLE
    # a defective peripheral block contradicts power-boundedness
    tri, z = linalg.ordered_schur(step)
    block = tri[:k, :k]
    growth = linalg.operator_norm(np.linalg.matrix_power(block, 64))
    if growth > 2.0:
        return sys.eigenvalues, peripheral, VERDICT_INDETERMINATE
    return sys.eigenvalues, peripheral, VERDICT_UNITARY_PART


def spectral_stability_test(matrix, mode: str, tol: float = PERIPHERAL_TOL) -> SpectralReport:
    """Spectral stability verdict for a discrete step or a continuous
    generator.

    Discrete mode classifies by |lambda| against 1 - tol.  Continuous mode
    classifies the generator spectrum by |Re lambda| against tol and
    cross-checks against the discrete verdict of the sampled step
    exp(L * delta) with delta = 1 / max(1, spectral radius of L).
    """
    m = linalg.as_matrix(matrix, square=True, name="matrix")
    if mode == "discrete":
        eigenvalues, peripheral, verdict = _discrete_verdict(m, tol)
        return SpectralReport(
            mode=mode,
            eigenvalues=linalg.frozen(eigenvalues),
            peripheral=linalg.frozen(peripheral),
            verdict=verdict,
            residual_spectrum_note=FINITE_DIM_NOTE,
            cross_check_agrees=None,
        )
    if mode != "continuous":
        raise ValueError(f"mode must be 'discrete' or 'continuous', got {mode!r}")
    sys = linalg.general_eig(m)
    on_axis = np.abs(sys.eigenvalues.real) <= tol
    peripheral = sys.eigenvalues[on_axis]
    delta = 1.0 / max(1.0, linalg.spectral_radius(m))
    step = scipy.linalg.expm(np.asarray(m) * delta)
    _, step_peripheral, step_verdict = _discrete_verdict(step, tol)
    if len(peripheral) == 0:
        verdict = VERDICT_STABLE
    elif step_verdict == VERDICT_INDETERMINATE:
        verdict = VERDICT_INDETERMINATE
    else:
        verdict = VERDICT_UNITARY_PART
    agrees = (verdict == step_verdict) or (
        verdict == VERDICT_STABLE and step_verdict == VERDICT_STABLE
    )
    return SpectralReport(
        mode=mode,
        eigenvalues=linalg.frozen(sys.eigenvalues),
        peripheral=linalg.frozen(peripheral),
        verdict=verdict,
        residual_spectrum_note=FINITE_DIM_NOTE,
        cross_check_agrees=bool(agrees),
    )

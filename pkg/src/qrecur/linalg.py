"""Dense complex linear-algebra kernel.

Every tolerance in the package bottoms out here.  Conventions:

* matrices are ``complex128`` numpy arrays; the helpers return read-only
  arrays and never mutate their inputs,
* comparisons use absolute tolerances on the entrywise max norm, default
  ``DEFAULT_TOL = 1e-9``, overridable per call,
* eigenvalue order is deterministic: ascending for Hermitian problems,
  (|lambda| descending, phase ascending) for general ones, so peripheral
  eigenvalues always come first where that matters downstream.

``general_eig`` works on the complex Schur form: the returned ``vectors``
are an orthonormal basis whose leading columns span the invariant subspace
of the leading eigenvalues, and the residual is measured on the
invariant-subspace relation ``M @ Z - Z @ T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    NotPositiveDefinite,
)

DEFAULT_TOL = 1e-9


def as_matrix(a, *, square=False, name="matrix") -> np.ndarray:
    """Validate ``a`` as a finite 2-D complex matrix and freeze it."""
    m = np.array(a, dtype=complex, order="C")
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    m.flags.writeable = False
    return m


def frozen(m: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(m)
    if out is m and m.flags.writeable:
        out = m.copy()
    out.flags.writeable = False
    return out


def max_abs(m) -> float:
    """Entrywise max norm; 0 for empty arrays."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermitian_defect(m: np.ndarray) -> float:
    return max_abs(m - m.conj().T)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues plus a basis matrix whose columns realise them.

    For :func:`hermitian_eig` the columns are orthonormal eigenvectors and
    ``residual`` is the worst column norm of ``M v - lambda v``.  For
    :func:`general_eig` the columns are a Schur basis (leading columns span
    invariant subspaces) and the residual is on ``M Z - Z T``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual: float


def hermitian_eig(m, tol: float = DEFAULT_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = as_matrix(m, square=True)
    if hermitian_defect(m) > tol:
        raise NotHermitian(
            f"matrix deviates from Hermitian by {hermitian_defect(m):.3e} > {tol:.3e}"
        )
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NoConvergence(f"eigh failed: {exc}") from exc
    resid = max_abs(np.linalg.norm(m @ vecs - vecs * vals, axis=0)) if m.size else 0.0
    if resid > tol:
        raise NoConvergence(f"eigenvector residual {resid:.3e} exceeds {tol:.3e}")
    return EigenSystem(frozen(vals), frozen(vecs), float(resid))


def _swap_schur_block(t: np.ndarray, z: np.ndarray, i: int) -> None:
    """Unitarily swap adjacent Schur eigenvalues t[i,i] and t[i+1,i+1]."""
    a = t[i, i]
    b = t[i, i + 1]
    c = t[i + 1, i + 1]
    v = np.array([b, c - a], dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0.0:  # equal eigenvalues: nothing to reorder
        return
    v /= nv
    g = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]])
    t[:, i : i + 2] = t[:, i : i + 2] @ g
    t[i : i + 2, :] = g.conj().T @ t[i : i + 2, :]
    z[:, i : i + 2] = z[:, i : i + 2] @ g
    t[i + 1, i] = 0.0


def ordered_schur(m, tol: float = DEFAULT_TOL):
    """Complex Schur form ``m = Z T Z^dag`` with the diagonal sorted by
    (|lambda| descending, phase ascending)."""
    m = as_matrix(m, square=True)
    n = m.shape[0]
    if n == 0:
        return np.zeros((0, 0), complex), np.zeros((0, 0), complex)
    try:
        t, z = scipy.linalg.schur(np.array(m), output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NoConvergence(f"Schur reduction failed: {exc}") from exc

    def key(lam):
        return (-abs(lam), np.angle(lam))

    # Bounded bubble sort with exact 2x2 unitary swaps; equal keys never swap.
    for _ in range(n):
        moved = False
        for j in range(n - 1):
            if key(t[j, j]) > key(t[j + 1, j + 1]):
                _swap_schur_block(t, z, j)
                moved = True
        if not moved:
            break
    resid = max_abs(np.linalg.norm(m @ z - z @ t, axis=0))
    scale = max(1.0, max_abs(m))
    if resid > tol * scale:
        raise NoConvergence(
            f"Schur residual {resid:.3e} exceeds {tol:.3e} * {scale:.3e}"
        )
    return t, z


def general_eig(m, tol: float = DEFAULT_TOL) -> EigenSystem:
    """Full spectrum with multiplicity plus an invariant-subspace basis."""
    m = as_matrix(m, square=True)
    if m.shape[0] == 0:
        return EigenSystem(np.zeros(0, complex), np.zeros((0, 0), complex), 0.0)
    t, z = ordered_schur(m, tol)
    resid = max_abs(np.linalg.norm(m @ z - z @ t, axis=0))
    return EigenSystem(frozen(np.diag(t).copy()), frozen(z), float(resid))


def _first_bad_pivot(m: np.ndarray, tol: float) -> int:
    """Locate the first failing pivot of the textbook Cholesky recursion."""
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    for k in range(n):
        piv = a[k, k].real
        if piv <= tol:
            return k
        root = np.sqrt(piv)
        a[k:, k] /= root
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k + 1 :, k].conj())
    return n - 1  # pragma: no cover - only reached on inconsistent input


def cholesky(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Lower-triangular L with ``L @ L^dag = m`` for Hermitian PD ``m``."""
    m = as_matrix(m, square=True)
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitian(
            f"matrix deviates from Hermitian by {defect:.3e} > {tol:.3e}"
        )
    h = 0.5 * (m + m.conj().T)
    try:
        low = scipy.linalg.cholesky(h, lower=True)
    except scipy.linalg.LinAlgError as exc:
        pivot = _first_bad_pivot(h, 0.0)
        raise NotPositiveDefinite(
            f"matrix is not positive definite (pivot {pivot})", pivot=pivot
        ) from exc
    scale = max_abs(m)
    resid = max_abs(low @ low.conj().T - m)
    if scale > 0 and resid > tol * scale:
        raise NoConvergence(
            f"Cholesky reconstruction residual {resid:.3e} exceeds {tol:.3e} * {scale:.3e}"
        )
    return frozen(low)


def operator_norm(m) -> float:
    """Largest singular value, via the Hermitian eigenproblem of M^dag M.

    The input is max-norm rescaled first so the residual check inside
    :func:`hermitian_eig` stays meaningful for badly scaled matrices.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"operator_norm expects 2-D input, got {m.shape}")
    if m.size == 0:
        return 0.0
    scale = max_abs(m)
    if scale == 0.0:
        return 0.0
    mn = m / scale
    sys = hermitian_eig(mn.conj().T @ mn, tol=max(DEFAULT_TOL, 1e-12))
    top = float(sys.eigenvalues[-1])
    return scale * float(np.sqrt(max(top, 0.0)))


def spectral_radius(m) -> float:
    """Largest |eigenvalue|; 0 for empty matrices."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    try:
        vals = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NoConvergence(f"eigvals failed: {exc}") from exc
    return float(np.max(np.abs(vals)))

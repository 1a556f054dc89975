"""States on M_d and the GNS representation machinery.

A state is a density matrix rho with omega(A) = Tr(rho A).  The GNS space
of (M_d, omega) is realised on the matrix-unit basis E_ij in row-major
order (index mu = i*d + j), so a matrix A *is* its coordinate vector
``vec(A) = A.reshape(-1)`` and

    <A Omega, B Omega> = omega(A^dag B) = vec(A)^dag G vec(B),
    G[(i,j),(k,l)] = omega(E_ij^dag E_kl) = delta_ik rho[l, j]
                   = kron(I_d, rho.T).

omega-orthonormal coordinates are x = L^dag vec(A) with G = L L^dag the
Cholesky factorisation; in them the GNS inner product is the literal numpy
inner product, and a linear map with matrix-unit transfer matrix Theta
(``vec(tau(A)) = Theta vec(A)``) acts as ``L^dag Theta (L^dag)^{-1}``.
The cyclic vector is Omega = vec(identity) and the modular operator is the
similarity X -> rho X rho^{-1}, transfer ``kron(rho, (rho^{-1}).T)``,
transported to omega coordinates; it is Hermitian positive there and fixes
Omega.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NotFaithful,
    NotHermitian,
    NotPositiveDefinite,
)

FAITHFULNESS_THRESHOLD = 1e-10


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major vectorisation of a matrix."""
    return np.asarray(a, dtype=complex).reshape(-1)


def unvec(x: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vec` for a d x d matrix."""
    return np.asarray(x, dtype=complex).reshape(d, d)


def transpose_permutation(d: int) -> np.ndarray:
    """Index permutation p with ``vec(A.T) = vec(A)[p]``; an involution."""
    return np.arange(d * d).reshape(d, d).T.reshape(-1)


@dataclass(frozen=True)
class State:
    """A state omega(A) = Tr(rho A) on M_d."""

    rho: np.ndarray
    dim: int
    min_eigenvalue: float

    def is_faithful(self, threshold: float = FAITHFULNESS_THRESHOLD) -> bool:
        return self.min_eigenvalue > threshold


def density_state(
    rho,
    *,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    psd_tol: float = 1e-12,
) -> State:
    """Validate a density matrix and wrap it as a :class:`State`.

    Raises :class:`InvariantViolation` when Hermiticity, unit trace or
    positive semidefiniteness fail at the given tolerances.
    """
    rho = linalg.as_matrix(rho, square=True, name="rho")
    defect = linalg.hermitian_defect(rho)
    if defect > herm_tol:
        raise InvariantViolation(
            f"rho must be Hermitian within {herm_tol:.1e} (defect {defect:.3e})"
        )
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise InvariantViolation(
            f"trace must be 1 within {trace_tol:.1e} (got {tr.real:.12g})"
        )
    sym = 0.5 * (rho + rho.conj().T)
    eigvals = np.linalg.eigvalsh(sym)
    if eigvals[0] < -psd_tol:
        raise InvariantViolation(
            f"rho must be positive semidefinite within {psd_tol:.1e} "
            f"(min eigenvalue {eigvals[0]:.3e})"
        )
    return State(linalg.frozen(sym), rho.shape[0], float(eigvals[0]))


def tracial_state(d: int) -> State:
    """The maximally mixed state I/d."""
    if d < 1:
        raise DimensionMismatch(f"dimension must be >= 1, got {d}")
    rho = np.eye(d, dtype=complex) / d
    return State(linalg.frozen(rho), d, 1.0 / d)


def gibbs_state(h, beta: float) -> State:
    """Thermal state rho = exp(-beta H) / Tr exp(-beta H).

    Faithful for every finite beta in exact arithmetic; the cached minimum
    eigenvalue underflows to 0 for very large |beta|*spread, which flips
    :meth:`State.is_faithful` exactly as it should.
    """
    h = linalg.as_matrix(h, square=True, name="hamiltonian")
    if linalg.hermitian_defect(h) > 1e-10:
        raise NotHermitian("Gibbs Hamiltonian must be Hermitian")
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    x = -beta * w
    x -= x.max()
    p = np.exp(x)
    p /= p.sum()
    rho = (v * p) @ v.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return State(linalg.frozen(rho), h.shape[0], float(p.min()))


def expectation(state: State, a) -> complex:
    """omega(A) = Tr(rho A)."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (state.dim, state.dim):
        raise DimensionMismatch(
            f"observable shape {a.shape} does not match dimension {state.dim}"
        )
    return complex(np.trace(state.rho @ a))


@dataclass(frozen=True)
class GnsSpace:
    """The GNS Hilbert space of (M_d, omega) in omega-orthonormal coordinates.

    ``gram`` is the matrix-unit Gram matrix, ``chol`` its lower Cholesky
    factor L, ``omega_vec`` the coordinates of the cyclic vector Omega and
    ``modular`` the modular operator X -> rho X rho^{-1} transported to
    omega coordinates (Hermitian positive there, fixes Omega).
    """

    state: State
    gram: np.ndarray
    chol: np.ndarray
    omega_vec: np.ndarray
    modular: np.ndarray
    _chol_ct: np.ndarray = field(repr=False, default=None)
    _chol_ct_inv: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        """GNS Hilbert-space dimension d^2."""
        return self.gram.shape[0]

    @property
    def matrix_dim(self) -> int:
        return self.state.dim

    def to_coords(self, a) -> np.ndarray:
        """omega-orthonormal coordinates of the vector A Omega."""
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.matrix_dim, self.matrix_dim):
            raise DimensionMismatch(
                f"matrix shape {a.shape} does not match dimension {self.matrix_dim}"
            )
        return self._chol_ct @ vec(a)

    def from_coords(self, x) -> np.ndarray:
        """Pull a coordinate vector back to the matrix A with A Omega = x."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim,):
            raise DimensionMismatch(
                f"coordinate shape {x.shape} does not match GNS dimension {self.dim}"
            )
        return unvec(self._chol_ct_inv @ x, self.matrix_dim)

    def transport(self, transfer) -> np.ndarray:
        """Conjugate a matrix-unit transfer matrix into omega coordinates."""
        transfer = np.asarray(transfer, dtype=complex)
        if transfer.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"transfer shape {transfer.shape} does not match GNS dimension {self.dim}"
            )
        return self._chol_ct @ transfer @ self._chol_ct_inv

    def untransport(self, t) -> np.ndarray:
        """Inverse of :meth:`transport`."""
        t = np.asarray(t, dtype=complex)
        return self._chol_ct_inv @ t @ self._chol_ct


@dataclass(frozen=True)
class VectorInGns:
    """A GNS vector in omega-orthonormal coordinates, with its source
    matrix when it arose as A Omega."""

    coords: np.ndarray
    source: np.ndarray | None = None


def build_gns(
    state: State,
    *,
    faithfulness_threshold: float = FAITHFULNESS_THRESHOLD,
    tol: float = linalg.DEFAULT_TOL,
) -> GnsSpace:
    """Assemble the GNS space of a faithful state.

    Non-faithful states make the Gram matrix singular; they are rejected
    with :class:`NotFaithful` instead of quotienting.
    """
    if not state.is_faithful(faithfulness_threshold):
        raise NotFaithful(
            f"state min eigenvalue {state.min_eigenvalue:.3e} is at or below "
            f"the faithfulness threshold {faithfulness_threshold:.1e}"
        )
    d = state.dim
    gram = np.kron(np.eye(d, dtype=complex), state.rho.T)
    try:
        low = linalg.cholesky(gram, tol=tol)
    except NotPositiveDefinite as exc:
        raise NotFaithful(f"Gram matrix is numerically singular: {exc}") from exc
    chol_ct = low.conj().T
    chol_ct_inv = scipy.linalg.solve_triangular(
        chol_ct, np.eye(d * d, dtype=complex), lower=False
    )
    # modular transfer: vec(rho X rho^{-1}) = kron(rho, (rho^{-1}).T) vec(X)
    w, v = np.linalg.eigh(state.rho)
    rho_inv = (v / w) @ v.conj().T
    modular = chol_ct @ np.kron(state.rho, rho_inv.T) @ chol_ct_inv
    omega_vec = chol_ct @ vec(np.eye(d))
    return GnsSpace(
        state=state,
        gram=gram,
        chol=low,
        omega_vec=linalg.frozen(omega_vec),
        modular=linalg.frozen(modular),
        _chol_ct=linalg.frozen(chol_ct),
        _chol_ct_inv=linalg.frozen(chol_ct_inv),
    )


def gns_vector(gns: GnsSpace, a) -> VectorInGns:
    """The vector A Omega in omega-orthonormal coordinates."""
    a = linalg.as_matrix(a, square=True, name="source")
    return VectorInGns(linalg.frozen(gns.to_coords(a)), a)


def left_representation(gns: GnsSpace, a) -> np.ndarray:
    """Matrix of X -> A X in omega coordinates (the algebra acting on H).

    Multiplicative: rep(AB) = rep(A) rep(B), rep(identity) = identity.
    """
    a = np.asarray(a, dtype=complex)
    d = gns.matrix_dim
    if a.shape != (d, d):
        raise DimensionMismatch(f"shape {a.shape} does not match dimension {d}")
    return gns.transport(np.kron(a, np.eye(d, dtype=complex)))


def right_representation(gns: GnsSpace, b) -> np.ndarray:
    """Matrix of X -> X B in omega coordinates: the commutant action.

    Anti-multiplicative, and commutes with every left representation.
    """
    b = np.asarray(b, dtype=complex)
    d = gns.matrix_dim
    if b.shape != (d, d):
        raise DimensionMismatch(f"shape {b.shape} does not match dimension {d}")
    return gns.transport(np.kron(np.eye(d, dtype=complex), b.T))


def modular_commutator_norm(gns: GnsSpace, t) -> float:
    """Operator norm of [T, Delta] for T given in omega coordinates."""
    t = np.asarray(t, dtype=complex)
    if t.shape != (gns.dim, gns.dim):
        raise DimensionMismatch(
            f"operator shape {t.shape} does not match GNS dimension {gns.dim}"
        )
    return linalg.operator_norm(t @ gns.modular - gns.modular @ t)

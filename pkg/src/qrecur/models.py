"""Built-in channel/state families with known closed forms.

Every constructor returns the channel together with its canonical faithful
invariant state, since every analysis needs both.  Families whose
detailed-balance property is claimed by construction re-verify it at build
time and refuse to hand out a channel that fails its own self-check.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .algebra import State, gibbs_state, tracial_state, vec
from .channels import (
    DB_HOLDS,
    SuperOperator,
    detailed_balance_check,
    from_kraus,
    from_transfer,
)
from .errors import BadParam, InvariantViolation, NotUnitary

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def depolarizing(d: int, p: float):
    """tau(A) = (1 - p) A + p Tr(A)/d * identity, paired with the tracial
    state.  Transfer spectrum {1} + {1 - p} x (d^2 - 1)."""
    if d < 2:
        raise BadParam(f"dimension must be >= 2, got {d}")
    if not 0.0 <= p <= 1.0:
        raise BadParam(f"depolarizing strength must be in [0, 1], got {p}")
    v = vec(np.eye(d))
    transfer = (1.0 - p) * np.eye(d * d, dtype=complex) + (p / d) * np.outer(v, v)
    return from_transfer(transfer), tracial_state(d)


def dephasing(d: int, basis=None):
    """Pinching onto the diagonal (optionally in a rotated basis), paired
    with the tracial state."""
    if d < 2:
        raise BadParam(f"dimension must be >= 2, got {d}")
    if basis is not None:
        basis = linalg.as_matrix(basis, square=True, name="basis")
        if basis.shape[0] != d:
            raise BadParam(f"basis must be {d}x{d}, got {basis.shape}")
        defect = linalg.max_abs(basis.conj().T @ basis - np.eye(d))
        if defect > 1e-10:
            raise BadParam(f"basis is not unitary (defect {defect:.3e})")
        cols = [basis[:, i] for i in range(d)]
    else:
        cols = [np.eye(d, dtype=complex)[:, i] for i in range(d)]
    kraus = [np.outer(c, c.conj()) for c in cols]
    return from_kraus(kraus), tracial_state(d)


def _eigencluster_projectors(u: np.ndarray, tol: float = 1e-8):
    vals, vecs = np.linalg.eig(u)
    order = np.argsort(np.angle(vals))
    vals, vecs = vals[order], vecs[:, order]
    clusters = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or abs(vals[i] - vals[start]) > tol:
            clusters.append((start, i))
            start = i
    projectors = []
    for a, b in clusters:
        q, _ = np.linalg.qr(vecs[:, a:b])
        projectors.append(q @ q.conj().T)
    return projectors


def unitary_model(u, weights=None):
    """tau(A) = U^dag A U, paired with a state commuting with U.

    The default state is tracial; ``weights`` (one per eigenvalue cluster
    of U) mixes the spectral projectors instead.
    """
    u = linalg.as_matrix(u, square=True, name="unitary")
    d = u.shape[0]
    defect = linalg.max_abs(u.conj().T @ u - np.eye(d))
    if defect > 1e-10:
        raise NotUnitary(f"matrix is not unitary (defect {defect:.3e})")
    op = from_kraus([u])
    if weights is None:
        return op, tracial_state(d)
    projectors = _eigencluster_projectors(u)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(projectors),):
        raise BadParam(
            f"expected {len(projectors)} weights (one per eigenvalue cluster), "
            f"got {weights.shape}"
        )
    if np.any(weights <= 0):
        raise BadParam("weights must be strictly positive for a faithful state")
    rho = sum(w * p for w, p in zip(weights, projectors))
    rho /= np.trace(rho).real
    state = State(linalg.frozen(rho), d, float(np.linalg.eigvalsh(rho)[0]))
    return op, state


def rotation(d: int, theta: float):
    """Conjugation by diag(1, e^{i theta}, ..., e^{i (d-1) theta}), the
    reversible benchmark, paired with the tracial state."""
    if d < 2:
        raise BadParam(f"dimension must be >= 2, got {d}")
    u = np.diag(np.exp(1j * theta * np.arange(d)))
    return unitary_model(u)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix with
    the standard phase fix on the R diagonal."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def mixture_of_unitaries(d: int, count: int, seed: int):
    """tau(A) = sum_i p_i U_i^dag A U_i with Haar-ish unitaries and flat
    simplex weights, paired with the tracial state.  Detailed balance with
    respect to the tracial state holds by construction (the adjoint is the
    mixture of the inverse conjugations) and is re-verified at build time.
    """
    if d < 2:
        raise BadParam(f"dimension must be >= 2, got {d}")
    if count < 1:
        raise BadParam(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    unitaries = [haar_unitary(d, rng) for _ in range(count)]
    weights = rng.exponential(1.0, count)
    weights /= weights.sum()
    kraus = [np.sqrt(w) * u for w, u in zip(weights, unitaries)]
    op = from_kraus(kraus)
    state = tracial_state(d)
    _self_check(op, state, "mixture_of_unitaries")
    return op, state


def thermal_qubit(beta: float, gamma: float):
    """Heisenberg dual of qubit thermal damping with stationary state
    Gibbs(sigma_z, beta).

    The Kraus operators are modular eigenvectors (raising/lowering and
    diagonal), so the channel commutes with the modular group; it is unital
    in the Heisenberg picture, leaves the Gibbs state invariant, and is its
    own omega-adjoint.  gamma is the damping strength; gamma -> 0 gives the
    identity channel.
    """
    if not np.isfinite(beta):
        raise BadParam(f"beta must be finite, got {beta}")
    if not 0.0 < gamma < 1.0:
        raise BadParam(f"gamma must be in (0, 1), got {gamma}")
    state = gibbs_state(SIGMA_Z, beta)
    q = float(state.rho[0, 0].real)
    root = np.sqrt(1.0 - gamma)
    k1 = np.sqrt(q) * np.diag([1.0, root]).astype(complex)
    k2 = np.sqrt(q * gamma) * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    k3 = np.sqrt(1.0 - q) * np.diag([root, 1.0]).astype(complex)
    k4 = np.sqrt((1.0 - q) * gamma) * np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    op = from_kraus([k1, k2, k3, k4])
    _self_check(op, state, "thermal_qubit")
    return op, state


def _self_check(op: SuperOperator, state: State, name: str) -> None:
    report = detailed_balance_check(op, state, samples=0)
    if report.verdict != DB_HOLDS:
        raise InvariantViolation(
            f"{name} failed its detailed-balance self-check "
            f"(verdict {report.verdict})"
        )


def _build_depolarizing(dim, params):
    return depolarizing(dim, params["p"])


def _build_dephasing(dim, params):
    return dephasing(dim)


def _build_rotation(dim, params):
    return rotation(dim, params["theta"])


def _build_mixture(dim, params):
    return mixture_of_unitaries(dim, int(params["count"]), int(params["seed"]))


def _build_thermal(dim, params):
    if dim != 2:
        raise BadParam(f"thermal_qubit requires dimension 2, got {dim}")
    return thermal_qubit(params["beta"], params["gamma"])


MODEL_REGISTRY = {
    "depolarizing": (_build_depolarizing, {"p"}, "uniform noise of strength p toward the tracial state"),
    "dephasing": (_build_dephasing, set(), "pinching onto the computational diagonal"),
    "rotation": (_build_rotation, {"theta"}, "conjugation by diag(exp(i k theta))"),
    "mixture_of_unitaries": (_build_mixture, {"count", "seed"}, "random convex mixture of Haar unitary conjugations"),
    "thermal_qubit": (_build_thermal, {"beta", "gamma"}, "qubit thermal damping with Gibbs(sigma_z, beta) stationary state"),
}


def build_model(name: str, dim: int, params: dict):
    """Instantiate a registered model; unknown names or parameters raise
    :class:`BadParam`."""
    if name not in MODEL_REGISTRY:
        known = ", ".join(sorted(MODEL_REGISTRY))
        raise BadParam(f"unknown model {name!r}; known models: {known}")
    builder, required, _ = MODEL_REGISTRY[name]
    given = set(params)
    if given != required:
        raise BadParam(
            f"model {name!r} takes parameters {sorted(required)}, got {sorted(given)}"
        )
    return builder(dim, params)

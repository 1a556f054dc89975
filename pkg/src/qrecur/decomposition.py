"""Splitting the observable algebra into a reversible subalgebra and a
decaying complement, and the obstruction that pins the complement inside
the kernel of the state.

The reversible candidate A_1 is the pullback of the maximal unitary
subspace H_1 of the GNS contraction: matrices B with B Omega in H_1.  The
code *verifies* rather than assumes that this span is closed under
products and adjoints and that the channel restricted to it is isometric
and invertible in the omega metric; the automorphism property of the
restriction is additionally tested and reported, never required.

The decaying candidate A_2 is the omega-orthogonal complement, pulled back
to matrices.  Decay is verified through the vector-norm criterion
||T^n B Omega|| -> 0, which dominates matrix-element decay against every
commutant vector by Cauchy-Schwarz.  Failure to decay within the horizon
is a legal outcome reported through :class:`DecayFailure`, which carries
the partial decomposition.

Because the cyclic vector always lies in H_1 for an invariant unital
channel, every element of A_2 is omega-orthogonal to Omega, i.e.
omega(B) = 0: recurrence leaves no room for decaying observables with
nonzero expectation.  ``obstruction_check`` measures |omega(B)| over the
A_2 basis against any supplied state and, when violations appear,
cross-references which standing hypothesis (invariance, Schwarz,
unitality) that state/channel pair fails.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .algebra import GnsSpace, State, expectation
from .channels import (
    SuperOperator,
    apply_channel,
    build_contraction,
    invariance_residual,
    schwarz_check,
)
from .errors import DecayFailure
from .stability import Splitting, unitary_subspace

DECAY_HORIZON_CAP = 10**6


@dataclass(frozen=True)
class Decomposition:
    """Reversible/decaying split of M_d for one channel and GNS space."""

    channel: SuperOperator
    gns: GnsSpace
    t_matrix: np.ndarray
    splitting: Splitting
    a1_basis: list
    a2_basis: list
    a1_is_algebra: bool
    a1_closure_residual: float
    a1_reversible: bool
    a1_isometry_residual: float
    a1_invertibility_residual: float
    a1_multiplicative: bool
    a1_multiplicativity_residual: float
    unit_in_a1_residual: float
    a2_decay_verified: bool
    slowest_decay_exponent: float | None
    decay_horizon: int | None


def reversible_part(
    op: SuperOperator,
    gns: GnsSpace,
    tol: float = 1e-9,
    *,
    t_matrix: np.ndarray | None = None,
) -> Decomposition:
    """Build A_1 from the unitary subspace of the GNS contraction and verify
    its algebra and reversibility properties."""
    if t_matrix is None:
        t_matrix = build_contraction(op, gns, tol=tol)
    split = unitary_subspace(t_matrix)
    z1 = np.asarray(split.h1_basis)
    k = z1.shape[1]
    a1 = [gns.from_coords(z1[:, i]) for i in range(k)]
    proj_out = np.eye(gns.dim) - z1 @ z1.conj().T

    closure = 0.0
    for b in a1:
        closure = max(closure, float(np.linalg.norm(proj_out @ gns.to_coords(b.conj().T))))
        for c in a1:
            closure = max(closure, float(np.linalg.norm(proj_out @ gns.to_coords(b @ c))))

    t1 = np.asarray(split.t_on_h1)
    if k:
        sing = np.linalg.svd(t1, compute_uv=False)
        isometry_residual = float(np.max(np.abs(sing - 1.0)))
        invertibility_residual = float(1.0 - np.min(sing))
    else:
        isometry_residual = 0.0
        invertibility_residual = 0.0

    mult = 0.0
    for b in a1:
        tb = apply_channel(op, b)
        for c in a1:
            mult = max(
                mult,
                linalg.max_abs(apply_channel(op, b @ c) - tb @ apply_channel(op, c)),
            )

    unit_residual = float(
        np.linalg.norm(proj_out @ np.asarray(gns.omega_vec))
    )

    return Decomposition(
        channel=op,
        gns=gns,
        t_matrix=linalg.frozen(np.asarray(t_matrix)),
        splitting=split,
        a1_basis=a1,
        a2_basis=[],
        a1_is_algebra=bool(closure <= max(tol, 1e-8)),
        a1_closure_residual=closure,
        a1_reversible=bool(
            isometry_residual <= max(tol, 1e-8)
            and invertibility_residual <= max(tol, 1e-8)
        ),
        a1_isometry_residual=isometry_residual,
        a1_invertibility_residual=invertibility_residual,
        a1_multiplicative=bool(mult <= max(tol, 1e-8)),
        a1_multiplicativity_residual=mult,
        unit_in_a1_residual=unit_residual,
        a2_decay_verified=False,
        slowest_decay_exponent=None,
        decay_horizon=None,
    )


def default_horizon(radius: float, tol: float) -> int:
    """Twice ceil(log tol / log r) for complement spectral radius r, capped.

    The factor two absorbs the transient constant of non-normal
    restrictions, for which ||T^n|| <= C r^n with C > 1.
    """
    if radius <= tol:
        return 1
    if radius >= 1.0:
        return DECAY_HORIZON_CAP
    return int(
        min(DECAY_HORIZON_CAP, max(1, 2 * np.ceil(np.log(tol) / np.log(radius))))
    )


def decaying_part(
    op: SuperOperator,
    gns: GnsSpace,
    horizon: int | None = None,
    tol: float = 1e-9,
    *,
    reversible: Decomposition | None = None,
) -> Decomposition:
    """Complete the decomposition with the omega-orthogonal complement and
    verify decay of each basis vector at the horizon.

    Raises :class:`DecayFailure` (carrying the partial decomposition) when
    some basis elements do not decay; a legal outcome meaning the split
    does not exist in the intended sense for this system.
    """
    dec = reversible if reversible is not None else reversible_part(op, gns, tol)
    split = dec.splitting
    z2 = np.asarray(split.complement_basis)
    m = z2.shape[1]
    a2 = [gns.from_coords(z2[:, i]) for i in range(m)]
    if horizon is None:
        horizon = default_horizon(split.complement_spectral_radius, tol)
    horizon = int(horizon)

    if m == 0:
        return replace(
            dec, a2_basis=[], a2_decay_verified=True,
            slowest_decay_exponent=None, decay_horizon=horizon,
        )

    tn = np.linalg.matrix_power(np.asarray(dec.t_matrix), horizon)
    finals = np.linalg.norm(tn @ z2, axis=0)  # columns are unit omega-norm
    non_decaying = [i for i in range(m) if finals[i] > tol]
    with np.errstate(divide="ignore"):
        exponents = np.log(finals) / horizon
    slowest = float(np.max(exponents))

    dec = replace(
        dec,
        a2_basis=a2,
        a2_decay_verified=not non_decaying,
        slowest_decay_exponent=slowest,
        decay_horizon=horizon,
    )
    if non_decaying:
        raise DecayFailure(
            f"{len(non_decaying)} complement basis elements do not decay "
            f"below {tol:.1e} within horizon {horizon}",
            non_decaying=non_decaying,
            decomposition=dec,
        )
    return dec


@dataclass(frozen=True)
class ObstructionReport:
    """|omega(B)| over the decaying basis, with hypothesis cross-references
    for any violation."""

    tol: float
    entries: list
    violations: list
    consistent: bool
    cross_reference: dict


def obstruction_check(
    dec: Decomposition,
    state: State,
    tol: float = 1e-8,
    *,
    schwarz_samples: int = 64,
    seed: int = 0,
) -> ObstructionReport:
    """Measure |omega(B)| for every B in the decaying basis.

    A decaying element with nonzero expectation contradicts recurrence of
    the correlation sequence, so a violation means the supplied state and
    channel fail one of the standing hypotheses; the report re-runs those
    checks and names the failing ones.
    """
    entries = []
    violations = []
    for i, b in enumerate(dec.a2_basis):
        val = float(abs(expectation(state, b)))
        entries.append((i, val))
        if val > tol:
            violations.append(i)
    cross = {}
    if violations:
        inv = invariance_residual(dec.channel, state)
        margin = schwarz_check(dec.channel, state, schwarz_samples, seed)
        unital = dec.channel.flags.unital_residual
        cross = {
            "invariance_residual": float(inv),
            "invariance_failed": bool(inv > tol),
            "schwarz_margin": float(margin),
            "schwarz_failed": bool(margin < -1e-9),
            "unital_residual": float(unital),
            "unitality_failed": bool(unital > 1e-9),
        }
    return ObstructionReport(
        tol=float(tol),
        entries=entries,
        violations=violations,
        consistent=not violations,
        cross_reference=cross,
    )

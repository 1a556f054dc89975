"""Full analysis pipeline: hypothesis checks, GNS, detailed balance,
recurrence, stability splitting, decomposition, obstruction.

Findings (a failed detailed-balance verdict, a contraction violation, a
decay failure) are report content: the pipeline annotates the stage,
skips only dependent stages, and still completes.  Refused standing
hypotheses (non-faithful state, non-unital channel) and numerical
failures abort with the corresponding exception; the CLI maps those to
exit codes.

Reports are deterministic functions of (spec, seed, options): every
sampled check takes the seed explicitly, and the timing section records
work counters (steps, doublings, horizons) rather than wall-clock time so
repeated runs are byte-identical.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, linalg
from .algebra import build_gns
from .channels import (
    build_contraction,
    detailed_balance_check,
    invariance_residual,
    schwarz_check,
)
from .decomposition import decaying_part, obstruction_check, reversible_part
from .errors import (
    ContractionViolation,
    DecayFailure,
    NotFaithful,
    NotInvariant,
    NotUnital,
)
from .recurrence import correlation_sequence, recurrence_set
from .spec_io import SystemSpec, complex_to_json
from .stability import (
    asymptotic_projections,
    pq_criterion,
    spectral_stability_test,
    unitary_subspace,
)

THREADS_ENV = "QRECUR_THREADS"


@dataclass
class AnalysisOptions:
    steps: int = 5000
    epsilon: float = 0.01
    tol: float = 1e-9
    seed: int = 0
    schwarz_samples: int = 200
    positivity_samples: int = 200
    faithfulness_threshold: float = 1e-10
    horizon: int | None = None
    extra_observables: list = field(default_factory=list)  # (label, matrix) pairs


def checked(value: float, tol: float) -> dict:
    """A numeric entry carrying its tolerance; the verdict is derivable
    from the pair alone."""
    value = float(value)
    return {"value": value, "tolerance": float(tol), "pass": bool(value <= tol)}


@dataclass
class AnalysisReport:
    spec_echo: dict
    hypothesis_checks: dict
    db_report: dict
    recurrence_results: list
    stability_results: dict
    decomposition_results: dict
    stages: dict
    timing: dict
    seed: int
    tool_version: str
    series_data: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "spec_echo": self.spec_echo,
            "hypothesis_checks": self.hypothesis_checks,
            "db_report": self.db_report,
            "recurrence_results": self.recurrence_results,
            "stability_results": self.stability_results,
            "decomposition_results": self.decomposition_results,
            "stages": self.stages,
            "timing": self.timing,
            "seed": self.seed,
            "tool_version": self.tool_version,
        }


def _default_observables(d: int):
    out = []
    eye = np.eye(d, dtype=complex)
    for i in range(d):
        for j in range(d):
            out.append((f"unit_{i}_{j}", np.outer(eye[:, i], eye[:, j])))
    return out


def _max_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _series_summary(label, series, rset):
    return {
        "label": label,
        "horizon": int(series.horizon),
        "c0": float(series.base),
        "abs_expectation_sq": float(series.abs_expectation_sq),
        "epsilon": float(rset.epsilon),
        "threshold": float(rset.threshold),
        "recurrence_count": int(len(rset.indices)),
        "max_gap": int(rset.max_gap),
        "gap_histogram": {str(k): int(v) for k, v in rset.gap_histogram.items()},
        "empty_set_red_flag": bool(len(rset.indices) == 0),
    }


def run_analysis(spec: SystemSpec, options: AnalysisOptions | None = None) -> AnalysisReport:
    """Run the full pipeline on a parsed system spec."""
    options = options or AnalysisOptions()
    op, state = spec.channel, spec.state
    tol = options.tol
    stages: dict = {}
    timing: dict = {
        "matrix_dim": spec.dimension,
        "gns_dim": spec.dimension**2,
        "recurrence_steps": 0,
        "projection_doublings": 0,
        "decay_horizon": 0,
    }

    # Stage 1: standing hypotheses.  Refusals abort; everything else is data.
    schwarz_margin = schwarz_check(op, state, options.schwarz_samples, options.seed)
    inv_residual = invariance_residual(op, state)
    hypothesis_checks = {
        "unital": checked(op.flags.unital_residual, tol),
        "cp": {"value": bool(op.flags.cp), "choi_min_eig": float(op.flags.choi_min_eig)},
        "schwarz_margin": {
            "value": float(schwarz_margin),
            "tolerance": 1e-9,
            "pass": bool(schwarz_margin >= -1e-9),
            "samples": options.schwarz_samples,
        },
        "invariance": checked(inv_residual, tol),
        "faithful": {
            "min_eigenvalue": float(state.min_eigenvalue),
            "threshold": options.faithfulness_threshold,
            "pass": bool(state.is_faithful(options.faithfulness_threshold)),
        },
    }
    stages["hypothesis_checks"] = {"status": "ok"}
    if not state.is_faithful(options.faithfulness_threshold):
        raise NotFaithful(
            f"state min eigenvalue {state.min_eigenvalue:.3e} is at or below "
            f"{options.faithfulness_threshold:.1e}; no GNS analysis is possible"
        )
    if op.flags.unital_residual > tol:
        raise NotUnital(
            f"channel unitality residual {op.flags.unital_residual:.3e} exceeds "
            f"{tol:.1e}; the analyses require a unital channel"
        )

    gns = build_gns(state, faithfulness_threshold=options.faithfulness_threshold)
    stages["gns"] = {"status": "ok"}

    db = detailed_balance_check(
        op, state, tol=tol, samples=options.positivity_samples,
        seed=options.seed, gns=gns,
    )
    db_report = {
        "verdict": db.verdict,
        "evidence": db.evidence,
        "invariance_residual": checked(db.invariance_residual, tol),
        "identity_residual": checked(db.identity_residual, tol),
        "beta_unital_residual": checked(db.beta_unital_residual, tol),
        "beta_cp_min_eig": float(db.beta_cp_min_eig),
        "contraction_norm": {
            "value": float(db.contraction_norm),
            "tolerance": 1.0 + tol,
            "pass": bool(db.contraction_norm <= 1.0 + tol),
        },
        "modular_commutator": checked(db.modular_commutator, 1e-8),
    }
    stages["detailed_balance"] = {"status": "ok"}

    t_matrix = None
    try:
        t_matrix = build_contraction(
            op, gns, tol=tol, samples=options.schwarz_samples, seed=options.seed
        )
        stages["contraction"] = {"status": "ok"}
    except (ContractionViolation, NotInvariant) as exc:
        stages["contraction"] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}

    # Recurrence needs only the transfer matrix and the state.
    observables = _default_observables(spec.dimension) + [
        (label, np.asarray(a, dtype=complex)) for label, a in options.extra_observables
    ]

    def one_series(item):
        label, a = item
        series = correlation_sequence(op, state, a, options.steps)
        rset = recurrence_set(series, options.epsilon)
        return label, series, rset

    workers = _max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            computed = list(pool.map(one_series, observables))
    else:
        computed = [one_series(item) for item in observables]

    recurrence_results = []
    series_data = []
    for label, series, rset in computed:
        recurrence_results.append(_series_summary(label, series, rset))
        series_data.append(
            {"label": label, "values": series.values, "indices": rset.indices}
        )
    timing["recurrence_steps"] = options.steps * len(observables)
    stages["recurrence"] = {"status": "ok"}

    stability_results: dict = {}
    decomposition_results: dict = {}
    if t_matrix is None:
        stages["stability"] = {"status": "skipped", "error": "no verified contraction"}
        stages["decomposition"] = {"status": "skipped", "error": "no verified contraction"}
    else:
        split = unitary_subspace(t_matrix)
        proj = asymptotic_projections(t_matrix, tol=tol)
        pq = pq_criterion(proj, split)
        spectral = spectral_stability_test(np.asarray(t_matrix), "discrete")
        timing["projection_doublings"] = proj.iterations
        stability_results = {
            "h1_dimension": int(split.h1_basis.shape[1]),
            "complement_dimension": int(split.complement_basis.shape[1]),
            "unitary_residual": checked(split.unitary_residual, 1e-8),
            "complement_spectral_radius": float(split.complement_spectral_radius),
            "coupling_residual": checked(split.coupling_residual, 1e-8),
            "pq_equal": {"value": bool(split.pq_equal), "residual": float(split.pq_residual)},
            "projection_iterations": int(proj.iterations),
            "projection_spectral_mismatch": checked(proj.spectral_mismatch, 1e-7),
            "pq_criterion": {
                "criterion_holds": pq.criterion_holds,
                "complement_strongly_stable": pq.complement_strongly_stable,
                "biconditional_ok": pq.biconditional_ok,
                "pq_residual": float(pq.pq_residual),
                "idempotency_residual": float(pq.idempotency_residual),
                "max_principal_angle": float(pq.max_principal_angle),
            },
            "spectral": {
                "verdict": spectral.verdict,
                "eigenvalues": [complex_to_json(z) for z in spectral.eigenvalues],
                "peripheral": [complex_to_json(z) for z in spectral.peripheral],
                "residual_spectrum_note": spectral.residual_spectrum_note,
            },
        }
        stages["stability"] = {"status": "ok"}

        try:
            rev = reversible_part(op, gns, tol, t_matrix=t_matrix)
            try:
                dec = decaying_part(
                    op, gns, horizon=options.horizon, tol=tol, reversible=rev
                )
                stages["decomposition"] = {"status": "ok"}
            except DecayFailure as exc:
                dec = exc.decomposition
                stages["decomposition"] = {
                    "status": "failed",
                    "error": f"DecayFailure: {exc}",
                }
            timing["decay_horizon"] = int(dec.decay_horizon or 0)
            obstruction = obstruction_check(
                dec, state, seed=options.seed, schwarz_samples=options.schwarz_samples
            )
            decomposition_results = {
                "a1_dimension": len(dec.a1_basis),
                "a2_dimension": len(dec.a2_basis),
                "a1_is_algebra": dec.a1_is_algebra,
                "a1_closure_residual": checked(dec.a1_closure_residual, 1e-8),
                "a1_reversible": dec.a1_reversible,
                "a1_isometry_residual": checked(dec.a1_isometry_residual, 1e-8),
                "a1_invertibility_residual": checked(dec.a1_invertibility_residual, 1e-8),
                "a1_multiplicative": dec.a1_multiplicative,
                "unit_in_a1_residual": checked(dec.unit_in_a1_residual, 1e-8),
                "a2_decay_verified": dec.a2_decay_verified,
                "slowest_decay_exponent": (
                    float(dec.slowest_decay_exponent)
                    if dec.slowest_decay_exponent is not None
                    and np.isfinite(dec.slowest_decay_exponent)
                    else None
                ),
                "decay_horizon": int(dec.decay_horizon or 0),
                "obstruction": {
                    "consistent": obstruction.consistent,
                    "tolerance": obstruction.tol,
                    "entries": [[int(i), float(v)] for i, v in obstruction.entries],
                    "violations": [int(i) for i in obstruction.violations],
                    "cross_reference": obstruction.cross_reference,
                },
            }
        except (ContractionViolation, NotInvariant) as exc:
            stages["decomposition"] = {
                "status": "failed",
                "error": f"{type(exc).__name__}: {exc}",
            }

    return AnalysisReport(
        spec_echo=spec.document,
        hypothesis_checks=hypothesis_checks,
        db_report=db_report,
        recurrence_results=recurrence_results,
        stability_results=stability_results,
        decomposition_results=decomposition_results,
        stages=stages,
        timing=timing,
        seed=options.seed,
        tool_version=__version__,
        series_data=series_data,
    )

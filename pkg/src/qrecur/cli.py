"""Command-line interface.

Usage:
    qrecur analyze SPEC [--out DIR] [--steps N] [--epsilon E] [--tol T] [--seed S]
    qrecur recurrence SPEC [--observable OBS ...] [--windows W1,W2,...] ...
    qrecur stability SPEC [--tol T] [--seed S] [--out DIR]
    qrecur decompose SPEC [--horizon N] [--tol T] [--seed S] [--out DIR]
    qrecur models list

SPEC is a JSON system-spec file (see the package README for the schema).
An observable is either a path to a JSON matrix file (nested arrays of
[re, im] pairs) or a symbolic name: ``unit:i:j``, ``proj:k``, ``identity``.

Exit codes: 0 analysis completed (findings such as obstruction flags are
report content), 1 invalid spec, 2 numerical failure, 3 standing
hypothesis refused.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import AnalysisOptions, AnalysisReport, run_analysis
from .channels import build_contraction, detailed_balance_check
from .decomposition import decaying_part, obstruction_check, reversible_part
from .errors import (
    BadParam,
    ContractionViolation,
    DecayFailure,
    DimensionMismatch,
    EmptyKrausList,
    InconsistentInputs,
    InvariantViolation,
    NoConvergence,
    NotContraction,
    NotFaithful,
    NotHermitian,
    NotInvariant,
    NotPositiveDefinite,
    NotUnital,
    NotUnitary,
    ParseError,
    QrecurError,
)
from .algebra import build_gns
from .models import MODEL_REGISTRY
from .recurrence import correlation_sequence, gap_stability_probe, recurrence_set
from .spec_io import (
    SystemSpec,
    canonical_json,
    complex_to_json,
    parse_spec,
    write_json_report,
    write_series_csv,
)
from .stability import asymptotic_projections, pq_criterion, spectral_stability_test, unitary_subspace

EXIT_OK = 0
EXIT_BAD_SPEC = 1
EXIT_NUMERICAL = 2
EXIT_REFUSED = 3

_SPEC_ERRORS = (ParseError, InvariantViolation, BadParam, EmptyKrausList, DimensionMismatch)
_NUMERICAL_ERRORS = (NoConvergence, NotPositiveDefinite, NotHermitian, InconsistentInputs)
_REFUSAL_ERRORS = (
    NotFaithful,
    NotInvariant,
    NotUnital,
    NotUnitary,
    NotContraction,
    ContractionViolation,
)


def _load_spec(path: str) -> SystemSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read spec file: {exc}") from exc
    return parse_spec(text)


def _parse_observable(token: str, d: int):
    """Either a symbolic name (unit:i:j, proj:k, identity) or a file path."""
    if token == "identity":
        return "identity", np.eye(d, dtype=complex)
    if token.startswith("unit:"):
        parts = token.split(":")
        if len(parts) != 3:
            raise ParseError(f"expected unit:i:j, got {token!r}")
        i, j = int(parts[1]), int(parts[2])
        if not (0 <= i < d and 0 <= j < d):
            raise ParseError(f"matrix-unit indices out of range for dimension {d}")
        m = np.zeros((d, d), dtype=complex)
        m[i, j] = 1.0
        return f"unit_{i}_{j}", m
    if token.startswith("proj:"):
        k = int(token.split(":", 1)[1])
        if not 0 <= k < d:
            raise ParseError(f"projector index out of range for dimension {d}")
        m = np.zeros((d, d), dtype=complex)
        m[k, k] = 1.0
        return f"proj_{k}", m
    path = Path(token)
    if not path.exists():
        raise ParseError(
            f"observable {token!r} is neither a known name (unit:i:j, proj:k, "
            "identity) nor an existing file"
        )
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read observable file {token!r}: {exc}") from exc
    m = np.asarray(
        [[complex(e[0], e[1]) for e in row] for row in raw], dtype=complex
    )
    if m.shape != (d, d):
        raise ParseError(f"observable in {token!r} has shape {m.shape}, expected ({d}, {d})")
    return path.stem, m


def _emit_or_print(report_dict: dict, out_dir, series=None) -> None:
    if out_dir is None:
        sys.stdout.write(canonical_json(report_dict) + "\n")
        return
    path = write_json_report(report_dict, out_dir)
    written = [path]
    for entry in series or []:
        written.append(
            write_series_csv(entry["label"], entry["values"], entry["indices"], out_dir)
        )
    for p in written:
        print(f"wrote {p}")


def _options_from_args(args) -> AnalysisOptions:
    return AnalysisOptions(
        steps=args.steps,
        epsilon=args.epsilon,
        tol=args.tol,
        seed=args.seed,
    )


def cmd_analyze(args) -> int:
    spec = _load_spec(args.spec)
    options = _options_from_args(args)
    report: AnalysisReport = run_analysis(spec, options)
    _emit_or_print(report.to_dict(), args.out, report.series_data)
    return EXIT_OK


def cmd_recurrence(args) -> int:
    spec = _load_spec(args.spec)
    observables = [_parse_observable(tok, spec.dimension) for tok in args.observable]
    if not observables:
        eye = np.eye(spec.dimension, dtype=complex)
        observables = [
            (f"unit_{i}_{j}", np.outer(eye[:, i], eye[:, j]))
            for i in range(spec.dimension)
            for j in range(spec.dimension)
        ]
    windows = [int(w) for w in args.windows.split(",")] if args.windows else None
    results = []
    series_data = []
    for label, a in observables:
        series = correlation_sequence(spec.channel, spec.state, a, args.steps)
        rset = recurrence_set(series, args.epsilon)
        entry = {
            "label": label,
            "c0": series.base,
            "abs_expectation_sq": series.abs_expectation_sq,
            "threshold": rset.threshold,
            "recurrence_count": int(len(rset.indices)),
            "max_gap": int(rset.max_gap),
            "gap_histogram": {str(k): int(v) for k, v in rset.gap_histogram.items()},
        }
        if windows:
            probe = gap_stability_probe(spec.channel, spec.state, a, args.epsilon, windows)
            entry["gap_probe"] = {
                "rows": [[int(w), int(g)] for w, g in probe.rows],
                "evidence": probe.evidence,
            }
        results.append(entry)
        series_data.append({"label": label, "values": series.values, "indices": rset.indices})
    report = {
        "spec_echo": spec.document,
        "epsilon": args.epsilon,
        "steps": args.steps,
        "seed": args.seed,
        "recurrence_results": results,
    }
    _emit_or_print(report, args.out, series_data)
    return EXIT_OK


def cmd_stability(args) -> int:
    spec = _load_spec(args.spec)
    gns = build_gns(spec.state)
    t = build_contraction(spec.channel, gns, tol=args.tol, seed=args.seed)
    split = unitary_subspace(t)
    proj = asymptotic_projections(t, tol=args.tol)
    pq = pq_criterion(proj, split)
    spectral = spectral_stability_test(np.asarray(t), "discrete")
    report = {
        "spec_echo": spec.document,
        "seed": args.seed,
        "h1_dimension": int(split.h1_basis.shape[1]),
        "complement_dimension": int(split.complement_basis.shape[1]),
        "unitary_residual": float(split.unitary_residual),
        "complement_spectral_radius": float(split.complement_spectral_radius),
        "pq_equal": bool(split.pq_equal),
        "pq_residual": float(split.pq_residual),
        "projection_iterations": int(proj.iterations),
        "projection_spectral_mismatch": float(proj.spectral_mismatch),
        "pq_criterion": {
            "criterion_holds": pq.criterion_holds,
            "complement_strongly_stable": pq.complement_strongly_stable,
            "biconditional_ok": pq.biconditional_ok,
        },
        "spectral": {
            "verdict": spectral.verdict,
            "eigenvalues": [complex_to_json(z) for z in spectral.eigenvalues],
            "peripheral": [complex_to_json(z) for z in spectral.peripheral],
            "residual_spectrum_note": spectral.residual_spectrum_note,
        },
    }
    _emit_or_print(report, args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    spec = _load_spec(args.spec)
    gns = build_gns(spec.state)
    rev = reversible_part(spec.channel, gns, args.tol)
    decay_error = None
    try:
        dec = decaying_part(spec.channel, gns, horizon=args.horizon, tol=args.tol, reversible=rev)
    except DecayFailure as exc:
        dec = exc.decomposition
        decay_error = str(exc)
    obstruction = obstruction_check(dec, spec.state, seed=args.seed)
    report = {
        "spec_echo": spec.document,
        "seed": args.seed,
        "a1_dimension": len(dec.a1_basis),
        "a2_dimension": len(dec.a2_basis),
        "a1_is_algebra": dec.a1_is_algebra,
        "a1_closure_residual": float(dec.a1_closure_residual),
        "a1_reversible": dec.a1_reversible,
        "a1_isometry_residual": float(dec.a1_isometry_residual),
        "a1_invertibility_residual": float(dec.a1_invertibility_residual),
        "a1_multiplicative": dec.a1_multiplicative,
        "a2_decay_verified": dec.a2_decay_verified,
        "decay_horizon": int(dec.decay_horizon or 0),
        "decay_failure": decay_error,
        "obstruction": {
            "consistent": obstruction.consistent,
            "tolerance": obstruction.tol,
            "entries": [[int(i), float(v)] for i, v in obstruction.entries],
            "violations": [int(i) for i in obstruction.violations],
            "cross_reference": obstruction.cross_reference,
        },
    }
    _emit_or_print(report, args.out)
    return EXIT_OK


def cmd_models(args) -> int:
    if args.action != "list":
        raise ParseError(f"unknown models action {args.action!r}; try 'list'")
    print(f"{'name':<22}{'parameters':<18}description")
    for name in sorted(MODEL_REGISTRY):
        _, params, description = MODEL_REGISTRY[name]
        print(f"{name:<22}{','.join(sorted(params)) or '-':<18}{description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrecur",
        description="Numerical laboratory for quantum dynamical systems on M_d.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, steps=True):
        p.add_argument("spec", help="path to a JSON system-spec file")
        p.add_argument("--out", default=None, help="output directory (default: print JSON)")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--seed", type=int, default=0)
        if steps:
            p.add_argument("--steps", type=int, default=5000)
            p.add_argument("--epsilon", type=float, default=0.01)

    p = sub.add_parser("analyze", help="run the full pipeline")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recurrence", help="correlation series and recurrence sets")
    common(p)
    p.add_argument(
        "--observable",
        action="append",
        default=[],
        help="matrix file or name (unit:i:j, proj:k, identity); repeatable",
    )
    p.add_argument("--windows", default=None, help="comma-separated gap-probe horizons")
    p.set_defaults(func=cmd_recurrence)

    p = sub.add_parser("stability", help="unitary splitting, projections, spectrum")
    common(p, steps=False)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("decompose", help="reversible/decaying split and obstruction")
    common(p, steps=False)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("models", help="built-in model registry")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_models)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SPEC_ERRORS as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
    except _REFUSAL_ERRORS as exc:
        print(f"refused: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QrecurError as exc:  # pragma: no cover - safety net
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

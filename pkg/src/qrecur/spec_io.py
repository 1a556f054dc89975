"""System-spec ingestion and deterministic report emission.

A system spec is a strict JSON document::

    {"dimension": 2,
     "state":   {"type": "tracial"}
              | {"type": "gibbs", "hamiltonian": M, "beta": 1.0}
              | {"type": "matrix", "rho": M},
     "channel": {"type": "kraus", "kraus": [M, ...]}
              | {"type": "choi", "choi": M}
              | {"type": "transfer", "transfer": M}
              | {"type": "model", "name": "depolarizing", "params": {"p": 0.5}}}

Complex scalars are two-element arrays [re, im]; matrices are row-major
nested arrays of such pairs.  Unknown fields anywhere reject the document
(guards against silent typos), and every error carries the path into the
document (e.g. ``channel.kraus[2][1][0]``).  Parsed matrices are checked
against their structural invariants (Hermiticity at 1e-9 where required,
unit trace, positivity) and then exactly normalised (symmetrised, trace
divided) so downstream code sees clean inputs.

Emission is byte-deterministic: JSON with sorted keys, floats at 17
significant digits (which round-trips float64 exactly), LF line endings;
CSV series files with header ``n,c_n,in_set``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import State, density_state, gibbs_state, tracial_state
from .channels import SuperOperator, from_choi, from_kraus, from_transfer
from .errors import (
    BadParam,
    DimensionMismatch,
    InvariantViolation,
    ParseError,
)
from .models import build_model

PARSE_TOL = 1e-9


@dataclass(frozen=True)
class SystemSpec:
    dimension: int
    state: State
    channel: SuperOperator
    state_kind: str
    channel_kind: str
    document: dict


def _require_keys(obj: dict, required: set, path: str, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise ParseError(f"expected an object, got {type(obj).__name__}", path)
    for key in obj:
        if key not in required and key not in optional:
            raise ParseError("unknown field", f"{path}.{key}" if path else key)
    for key in required:
        if key not in obj:
            raise ParseError(f"missing required field {key!r}", path)


def _parse_scalar(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {type(value).__name__}", path)
    if not math.isfinite(value):
        raise ParseError("number must be finite", path)
    return float(value)


def _parse_complex(value, path: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError("complex scalar must be a two-element array [re, im]", path)
    re = _parse_scalar(value[0], f"{path}[0]")
    im = _parse_scalar(value[1], f"{path}[1]")
    return complex(re, im)


def _parse_matrix(value, path: str, rows: int, cols: int) -> np.ndarray:
    if not isinstance(value, list) or len(value) != rows:
        raise ParseError(f"matrix must be an array of {rows} rows", path)
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise ParseError(f"row must be an array of {cols} entries", f"{path}[{i}]")
        for j, entry in enumerate(row):
            out[i, j] = _parse_complex(entry, f"{path}[{i}][{j}]")
    return out


def _parse_state(obj, d: int, path: str):
    _require_keys(obj, {"type"}, path, optional={"hamiltonian", "beta", "rho"})
    kind = obj["type"]
    if kind == "tracial":
        _require_keys(obj, {"type"}, path)
        return tracial_state(d), kind
    if kind == "gibbs":
        _require_keys(obj, {"type", "hamiltonian", "beta"}, path)
        h = _parse_matrix(obj["hamiltonian"], f"{path}.hamiltonian", d, d)
        defect = float(np.max(np.abs(h - h.conj().T)))
        if defect > PARSE_TOL:
            raise InvariantViolation(
                f"hamiltonian must be Hermitian within {PARSE_TOL:.0e} "
                f"(defect {defect:.3e})",
                f"{path}.hamiltonian",
            )
        beta = _parse_scalar(obj["beta"], f"{path}.beta")
        return gibbs_state(0.5 * (h + h.conj().T), beta), kind
    if kind == "matrix":
        _require_keys(obj, {"type", "rho"}, path)
        rho = _parse_matrix(obj["rho"], f"{path}.rho", d, d)
        try:
            # check at document tolerance, then normalise exactly
            density_state(rho, herm_tol=PARSE_TOL, trace_tol=PARSE_TOL, psd_tol=PARSE_TOL)
        except InvariantViolation as exc:
            raise InvariantViolation(str(exc), f"{path}.rho") from exc
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
        return density_state(rho), kind
    raise ParseError(
        f"state type must be one of tracial/gibbs/matrix, got {kind!r}",
        f"{path}.type",
    )


def _parse_channel(obj, d: int, path: str):
    _require_keys(
        obj, {"type"}, path, optional={"kraus", "choi", "transfer", "name", "params"}
    )
    kind = obj["type"]
    if kind == "kraus":
        _require_keys(obj, {"type", "kraus"}, path)
        raw = obj["kraus"]
        if not isinstance(raw, list) or not raw:
            raise ParseError("kraus must be a nonempty array of matrices", f"{path}.kraus")
        ops = [
            _parse_matrix(entry, f"{path}.kraus[{i}]", d, d)
            for i, entry in enumerate(raw)
        ]
        return from_kraus(ops), kind
    if kind == "choi":
        _require_keys(obj, {"type", "choi"}, path)
        choi = _parse_matrix(obj["choi"], f"{path}.choi", d * d, d * d)
        defect = float(np.max(np.abs(choi - choi.conj().T)))
        if defect > PARSE_TOL:
            raise InvariantViolation(
                f"Choi matrix must be Hermitian within {PARSE_TOL:.0e} "
                f"(defect {defect:.3e})",
                f"{path}.choi",
            )
        return from_choi(choi), kind
    if kind == "transfer":
        _require_keys(obj, {"type", "transfer"}, path)
        transfer = _parse_matrix(obj["transfer"], f"{path}.transfer", d * d, d * d)
        return from_transfer(transfer), kind
    if kind == "model":
        _require_keys(obj, {"type", "name", "params"}, path)
        name = obj["name"]
        if not isinstance(name, str):
            raise ParseError("model name must be a string", f"{path}.name")
        params = obj["params"]
        if not isinstance(params, dict):
            raise ParseError("params must be an object of scalars", f"{path}.params")
        parsed = {
            key: _parse_scalar(value, f"{path}.params.{key}")
            for key, value in params.items()
        }
        try:
            op, _paired = build_model(name, d, parsed)
        except BadParam as exc:
            raise ParseError(str(exc), f"{path}") from exc
        return op, kind
    raise ParseError(
        f"channel type must be one of kraus/choi/transfer/model, got {kind!r}",
        f"{path}.type",
    )


def parse_spec(text: str) -> SystemSpec:
    """Parse and validate a system-spec document (strict mode)."""
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    _require_keys(doc, {"dimension", "state", "channel"}, "")
    dim = doc["dimension"]
    if isinstance(dim, bool) or not isinstance(dim, int):
        raise ParseError("dimension must be an integer", "dimension")
    if not 2 <= dim <= 16:
        raise ParseError(f"dimension must be in [2, 16], got {dim}", "dimension")
    state, state_kind = _parse_state(doc["state"], dim, "state")
    channel, channel_kind = _parse_channel(doc["channel"], dim, "channel")
    return SystemSpec(
        dimension=dim,
        state=state,
        channel=channel,
        state_kind=state_kind,
        channel_kind=channel_kind,
        document=doc,
    )


def format_float(x: float) -> str:
    """17 significant digits; round-trips float64 bit-exactly."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite float {x!r}")
    return format(float(x), ".17g")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float format, no whitespace
    variation."""
    import json

    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, bool):  # pragma: no cover - caught above
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise ValueError(f"JSON object keys must be strings, got {key!r}")
            items.append(f"{json.dumps(key)}: {canonical_json(obj[key])}")
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_json(x) for x in obj) + "]"
    raise ValueError(f"cannot serialise {type(obj).__name__} to JSON")


def matrix_to_json(m) -> list:
    """Row-major nested arrays of [re, im] pairs."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def complex_to_json(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def write_json_report(report_dict: dict, destination) -> Path:
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    path = destination / "report.json"
    path.write_text(canonical_json(report_dict) + "\n", encoding="utf-8", newline="\n")
    return path


def write_series_csv(label: str, values, in_set, destination) -> Path:
    """One CSV per correlation series: header n,c_n,in_set and LF endings."""
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in label)
    path = destination / f"series_{safe}.csv"
    in_set = set(int(i) for i in in_set)
    lines = ["n,c_n,in_set"]
    for n, value in enumerate(values):
        lines.append(f"{n},{format_float(float(value))},{1 if n in in_set else 0}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def emit(report, fmt: str, destination) -> list:
    """Write a completed analysis report; ``fmt`` is json or csv_series.

    Returns the list of written paths.
    """
    if fmt == "json":
        return [write_json_report(report.to_dict(), destination)]
    if fmt == "csv_series":
        paths = []
        for entry in report.series_data:
            paths.append(
                write_series_csv(entry["label"], entry["values"], entry["indices"], destination)
            )
        return paths
    raise ValueError(f"format must be 'json' or 'csv_series', got {fmt!r}")

"""JSON sequence and report files.

Sequence file (schema ``kmoment.sequence/1``)::

    {
      "schema": "kmoment.sequence/1",
      "grid": {"sites": [...], "coords": [[...], ...], "sigma": [...]},
      "basis": "moment" | "correlation",
      "truncation": D,
      "components": [{"order": n, "entries": [[[i, j, ...], value], ...]}, ...],
      "provenance": {...}            # optional
    }

Site tuples are sorted lists of site positions (0-based, in ``grid.sites``
order); missing entries and missing orders are zero.  Values are JSON numbers
(floats are written with the shortest repr that round-trips, at most 17
significant digits) or ``"p/q"`` strings for exact rationals.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np

from .conversion import CorrelationSequence, MomentSequence
from .grid import GridSpec, SymTensor, canonical_count, index_rank

SEQUENCE_SCHEMA = "kmoment.sequence/1"
REPORT_SCHEMA = "kmoment.report/1"


class SchemaError(ValueError):
    """Malformed or inconsistent sequence/report file."""


@dataclass
class SequenceFile:
    grid: GridSpec
    sequence: MomentSequence | CorrelationSequence
    provenance: dict | None = None

    @property
    def basis(self) -> str:
        return self.sequence.basis


def _encode_value(v):
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, Rational):
        v = Fraction(v)
        return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    v = float(v)
    if not math.isfinite(v):
        raise SchemaError("sequence values must be finite")
    return v


def _decode_value(v, where: str):
    if isinstance(v, bool):
        raise SchemaError(f"{where}: boolean is not a valid value")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise SchemaError(f"{where}: non-finite value")
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"{where}: cannot parse value {v!r}") from None
    raise SchemaError(f"{where}: unsupported value {v!r}")


def sequence_to_dict(sf: SequenceFile) -> dict:
    grid, seq = sf.grid, sf.sequence
    if grid.n_sites != seq.n_sites:
        raise SchemaError("grid and sequence have different numbers of sites")
    comps = []
    for t in seq:
        entries = [[list(idx), _encode_value(v)] for idx, v in t.entries().items()]
        comps.append({"order": t.order, "entries": entries})
    out = {
        "schema": SEQUENCE_SCHEMA,
        "grid": {"sites": list(grid.sites), "coords": grid.coords.tolist(),
                 "sigma": grid.sigma.tolist()},
        "basis": seq.basis,
        "truncation": seq.truncation,
        "components": comps,
    }
    if sf.provenance is not None:
        out["provenance"] = sf.provenance
    return out


def dumps(obj: dict) -> str:
    return json.dumps(_json_safe(obj), indent=1, sort_keys=True) + "\n"


def write_sequence(path: str, sf: SequenceFile) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(sequence_to_dict(sf)))


def sequence_from_dict(data: dict) -> SequenceFile:
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object")
    if data.get("schema") != SEQUENCE_SCHEMA:
        raise SchemaError(f"unsupported schema {data.get('schema')!r}; expected {SEQUENCE_SCHEMA}")
    try:
        g = data["grid"]
        grid = GridSpec(g["sites"], g.get("coords"), g.get("sigma"))
        basis = data["basis"]
        D = data["truncation"]
        comps_in = data["components"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"missing or malformed field: {exc}") from None
    except ValueError as exc:
        raise SchemaError(f"invalid grid: {exc}") from None
    if basis not in ("moment", "correlation"):
        raise SchemaError(f"basis must be 'moment' or 'correlation', got {basis!r}")
    if not isinstance(D, int) or isinstance(D, bool) or D < 0:
        raise SchemaError("truncation must be a nonnegative integer")
    m = grid.n_sites
    raw: dict = {}
    for comp in comps_in:
        n = comp.get("order") if isinstance(comp, dict) else None
        if not isinstance(n, int) or not 0 <= n <= D:
            raise SchemaError(f"component order {n!r} outside 0..{D}")
        if n in raw:
            raise SchemaError(f"duplicate component of order {n}")
        entries = {}
        for item in comp.get("entries", []):
            try:
                idx, v = item
                idx = tuple(idx)
            except (TypeError, ValueError):
                raise SchemaError(f"order {n}: entries must be [tuple, value] pairs") from None
            where = f"order {n} entry {list(idx)}"
            if len(idx) != n or any(not isinstance(s, int) or not 0 <= s < m for s in idx):
                raise SchemaError(f"{where}: bad site tuple")
            if list(idx) != sorted(idx):
                raise SchemaError(f"{where}: site tuple is not sorted")
            if idx in entries:
                raise SchemaError(f"{where}: duplicate entry")
            entries[idx] = _decode_value(v, where)
        raw[n] = entries
    all_values = [v for e in raw.values() for v in e.values()]
    exact = all(isinstance(v, (int, Fraction)) for v in all_values)
    comps = []
    for n in range(D + 1):
        vals = [0] * canonical_count(m, n) if exact else np.zeros(canonical_count(m, n))
        for idx, v in raw.get(n, {}).items():
            vals[index_rank(idx, m)] = v if exact else float(v)
        comps.append(SymTensor(m, n, np.array(vals, dtype=object if exact else float)))
    cls = MomentSequence if basis == "moment" else CorrelationSequence
    return SequenceFile(grid, cls(comps), data.get("provenance"))


def read_sequence(path: str) -> SequenceFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return sequence_from_dict(data)


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (Integral, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return _encode_value(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def report_to_dict(report, input_digest: str, config: dict, seconds: float | None) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "input_sha256": input_digest,
        "config": config,
        "report": report.to_dict(),
        "timing": None if seconds is None else {"seconds": seconds},
    }


__all__ = [
    "SEQUENCE_SCHEMA", "REPORT_SCHEMA", "SchemaError", "SequenceFile", "read_sequence",
    "write_sequence", "sequence_to_dict", "sequence_from_dict", "report_to_dict",
    "file_digest", "dumps",
]

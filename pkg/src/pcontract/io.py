"""JSON encodings of instances, series and solver results."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .blocks import BlockMatrix
from .errors import FormatError
from .rep import Rep
from .series import SeriesVector
from .solver import FixedVectorResult, Residual

INSTANCE_FORMAT = "pcontract-instance"
RESULT_FORMAT = "pcontract-result"
VERSION = 1


@dataclass
class Instance:
    rep: Rep
    metadata: dict = field(default_factory=dict)
    name: str = ""

    def __eq__(self, other) -> bool:
        return isinstance(other, Instance) and self.rep == other.rep and self.metadata == other.metadata


def _int(x: Any, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"expected an integer, got {x!r}", where)
    return x


def _need(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise FormatError("expected an object", where)
    if key not in obj:
        raise FormatError(f"missing field {key!r}", where)
    return obj[key]


def _check_header(obj: dict, fmt: str) -> None:
    if _need(obj, "format", "$") != fmt:
        raise FormatError(f"format must be {fmt!r}", "$.format")
    if _need(obj, "version", "$") != VERSION:
        raise FormatError(f"unsupported version {obj['version']!r}", "$.version")


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


def instance_to_dict(inst: Instance | Rep) -> dict:
    if isinstance(inst, Rep):
        inst = Instance(inst)
    A0 = inst.rep.A0
    out = {
        "format": INSTANCE_FORMAT,
        "version": VERSION,
        "p": A0.p,
        "d": A0.d,
        "blocks": [{"i": i, "j": j, "entries": m.tolist()} for (i, j), m in sorted(A0.blocks.items())],
    }
    if inst.metadata:
        out["metadata"] = inst.metadata
    return out


def instance_from_dict(obj: dict) -> Instance:
    _check_header(obj, INSTANCE_FORMAT)
    p = _int(_need(obj, "p", "$"), "$.p")
    d = _int(_need(obj, "d", "$"), "$.d")
    if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)) or p >= 1 << 16:
        raise FormatError(f"p = {p} is not a supported prime", "$.p")
    if d < 1:
        raise FormatError("d must be positive", "$.d")
    raw = _need(obj, "blocks", "$")
    if not isinstance(raw, list):
        raise FormatError("expected a list", "$.blocks")
    blocks = {}
    for n, b in enumerate(raw):
        where = f"$.blocks[{n}]"
        i = _int(_need(b, "i", where), where + ".i")
        j = _int(_need(b, "j", where), where + ".j")
        ent = _need(b, "entries", where)
        if not isinstance(ent, list) or len(ent) != d or any(not isinstance(r, list) or len(r) != d for r in ent):
            raise FormatError(f"entries must be a {d}x{d} grid", where + ".entries")
        for a, row in enumerate(ent):
            for c, x in enumerate(row):
                x = _int(x, f"{where}.entries[{a}][{c}]")
                if not 0 <= x < p:
                    raise FormatError(f"entry {x} outside [0, {p})", f"{where}.entries[{a}][{c}]")
        if (i, j) in blocks:
            raise FormatError(f"duplicate block ({i}, {j})", where)
        if not any(any(r) for r in ent):
            raise FormatError("zero blocks must be omitted", where)
        blocks[(i, j)] = ent
    meta = obj.get("metadata", {})
    if not isinstance(meta, dict):
        raise FormatError("metadata must be an object", "$.metadata")
    return Instance(Rep(BlockMatrix(p, d, blocks)), meta)


_INT_LIST = re.compile(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]")


def dumps(obj: dict) -> str:
    """Stable JSON with integer rows kept on one line."""
    text = json.dumps(obj, indent=2, sort_keys=True)
    return _INT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text) + "\n"


def _loads(text: str, where: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}", where) from exc


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        inst = instance_from_dict(_loads(text, str(path)))
    except FormatError as exc:
        if exc.location.startswith("$"):
            raise FormatError(str(exc).split(": ", 1)[-1], f"{path}:{exc.location}") from exc
        raise
    inst.name = path.stem
    return inst


def save_instance(inst: Instance | Rep, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def shipped_instances() -> dict[str, Instance]:
    """The instance suite bundled with the package, keyed by file stem."""
    out = {}
    root = resources.files("pcontract") / "instances"
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            inst = instance_from_dict(json.loads(entry.read_text()))
            inst.name = entry.name[:-5]
            out[inst.name] = inst
    return out


# ---------------------------------------------------------------------------
# Series and results
# ---------------------------------------------------------------------------


def series_to_dict(z: SeriesVector) -> dict:
    if z.coeffs:
        lo, hi = min(z.coeffs), max(z.coeffs)
    else:
        lo, hi = z.lo, z.lo - 1
    return {
        "p": z.p,
        "d": z.d,
        "lo": lo,
        "prec": "exact" if z.prec is None else z.prec,
        "coeffs": [list(z.coefficient(n)) for n in range(lo, hi + 1)],
    }


def series_from_dict(obj: dict, where: str = "$") -> SeriesVector:
    p = _int(_need(obj, "p", where), where + ".p")
    d = _int(_need(obj, "d", where), where + ".d")
    lo = _int(_need(obj, "lo", where), where + ".lo")
    prec = _need(obj, "prec", where)
    if prec != "exact":
        prec = _int(prec, where + ".prec")
    else:
        prec = None
    coeffs = _need(obj, "coeffs", where)
    if not isinstance(coeffs, list):
        raise FormatError("expected a list", where + ".coeffs")
    try:
        return SeriesVector(p, d, {lo + k: v for k, v in enumerate(coeffs)}, prec=prec)
    except (ValueError, TypeError) as exc:
        raise FormatError(str(exc), where + ".coeffs") from exc


def result_to_dict(res: FixedVectorResult, timings: dict | None = None) -> dict:
    out = {
        "format": RESULT_FORMAT,
        "version": VERSION,
        "xi": series_to_dict(res.xi),
        "exact": res.exact,
        "residuals": [{"r": x.r, "max_degree": x.max_degree, "ok": x.ok} for x in res.residuals],
        "trace": res.trace,
        "oracle": None if res.oracle is None else series_to_dict(res.oracle),
        "oracle_agrees": res.oracle_agrees,
    }
    if timings is not None:
        out["timings"] = timings
    return out


def result_from_dict(obj: dict) -> FixedVectorResult:
    _check_header(obj, RESULT_FORMAT)
    xi = series_from_dict(_need(obj, "xi", "$"), "$.xi")
    res = [Residual(_int(r["r"], "$.residuals.r"), r["max_degree"], bool(r["ok"])) for r in _need(obj, "residuals", "$")]
    oracle = obj.get("oracle")
    return FixedVectorResult(
        xi,
        bool(_need(obj, "exact", "$")),
        res,
        dict(obj.get("trace", {})),
        None if oracle is None else series_from_dict(oracle, "$.oracle"),
        obj.get("oracle_agrees"),
    )

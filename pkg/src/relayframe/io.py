"""JSON serialization of relay systems and analysis reports.

System file (``schema_version`` "1")::

    {
      "schema_version": "1",
      "field": "real",
      "ambient_dim": n,
      "locals": [
        {"id": "w1", "mu": 1.0, "W_basis": [[...], ...], "K_dim": k,
         "Lambda": [[...], ...],
         "inner": [{"id": "v1", "mu": 1.0, "alpha": 1.0, "V_basis": [[...]]}]}
      ],
      "transforms": {"Q": ..., "Q_locals": {id: ...}, "G_locals": {id: ...},
                     "local_frames": {id: [[...], ...]}},
      "extensions": {"per_atom_Lambda": [{"local": id, "inner": id, "Lambda": ...}]},
      "vector": [...]
    }

Bases (``W_basis``, ``V_basis``, ``local_frames``) are lists of column
vectors; ``Lambda``, ``Q`` and ``G`` are row-major.  ``transforms``,
``extensions`` and ``vector`` are optional.  Bases that are not orthonormal
are orthonormalized on load and a notice is logged; orthonormal bases are
kept bit for bit so that a save/load round trip is exact.
"""
from dataclasses import dataclass, field
import datetime
import hashlib
import json
import logging
import math

import numpy as np

from . import linalg
from .errors import AllColumnsDegenerate, ParseError, SchemaError
from .measure import MeasureAtom
from .model import ORTHONORMAL_TOL, InnerAtom, LocalSystem, RelaySystem, Subspace, validate_system

log = logging.getLogger("relayframe")

SCHEMA_VERSION = "1"


@dataclass
class LoadedSystem:
    system: RelaySystem
    digest: str
    transforms: dict = field(default_factory=dict)
    vector: np.ndarray = None
    notices: list = field(default_factory=list)


def digest_bytes(data):
    return "sha256:" + hashlib.sha256(data).hexdigest()


def parse_json(text, source="<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _matrix(value, where, rows=None, cols=None):
    try:
        a = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: not a numeric matrix") from exc
    if a.ndim != 2:
        raise SchemaError(f"{where}: expected a 2-D array, got {a.ndim}-D")
    if (rows is not None and a.shape[0] != rows) or (cols is not None and a.shape[1] != cols):
        raise SchemaError(f"{where}: shape {a.shape}, expected ({rows}, {cols})")
    if not np.all(np.isfinite(a)):
        raise SchemaError(f"{where}: non-finite entries")
    return a


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _basis(columns, dim, where, notices):
    """Columns -> Subspace, orthonormalizing (with a notice) only when needed."""
    if not isinstance(columns, list) or not columns:
        raise SchemaError(f"{where}: expected a non-empty list of column vectors")
    B = _matrix(columns, where, cols=dim).T
    defect = float(np.max(np.abs(B.T @ B - np.eye(B.shape[1]))))
    if defect <= ORTHONORMAL_TOL:
        return Subspace(B)
    try:
        Q = linalg.orthonormalize(B)
    except AllColumnsDegenerate as exc:
        raise SchemaError(f"{where}: spans the zero subspace") from exc
    msg = f"{where}: basis not orthonormal (defect {defect:.2e}); orthonormalized to dimension {Q.shape[1]}"
    log.info(msg)
    notices.append(msg)
    return Subspace(Q)


def system_from_dict(doc, notices=None):
    notices = [] if notices is None else notices
    version = _require(doc, "schema_version", "file")
    if str(version) != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    if doc.get("field", "real") != "real":
        raise SchemaError(f"field {doc['field']!r} is not supported; only 'real'")
    n = _require(doc, "ambient_dim", "file")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SchemaError(f"ambient_dim must be a positive integer, got {n!r}")
    raw_locals = _require(doc, "locals", "file")
    if not isinstance(raw_locals, list):
        raise SchemaError("locals: expected a list")

    overrides = {}
    for k, item in enumerate(doc.get("extensions", {}).get("per_atom_Lambda", [])):
        where = f"extensions.per_atom_Lambda[{k}]"
        key = (str(_require(item, "local", where)), str(_require(item, "inner", where)))
        overrides[key] = _matrix(_require(item, "Lambda", where), where, cols=n)

    locals_ = []
    for i, rl in enumerate(raw_locals):
        where = f"locals[{i}]"
        wid = str(_require(rl, "id", where))
        mu = _number(_require(rl, "mu", where), f"{where}.mu")
        W = _basis(_require(rl, "W_basis", where), n, f"{where} (node {wid!r}) W_basis", notices)
        L = _matrix(_require(rl, "Lambda", where), f"{where}.Lambda", cols=n)
        k = rl.get("K_dim", L.shape[0])
        if k != L.shape[0]:
            raise SchemaError(f"{where}: K_dim {k} does not match Lambda with {L.shape[0]} rows")
        raw_inner = _require(rl, "inner", where)
        if not isinstance(raw_inner, list):
            raise SchemaError(f"{where}.inner: expected a list")
        inner = []
        for j, ra in enumerate(raw_inner):
            wj = f"{where}.inner[{j}]"
            vid = str(_require(ra, "id", wj))
            V = _basis(_require(ra, "V_basis", wj), L.shape[0], f"{wj} (atom {wid}/{vid}) V_basis", notices)
            inner.append(InnerAtom(
                MeasureAtom(vid, _number(_require(ra, "mu", wj), f"{wj}.mu")),
                _number(_require(ra, "alpha", wj), f"{wj}.alpha"),
                V,
                overrides.pop((wid, vid), None),
            ))
        locals_.append(LocalSystem(MeasureAtom(wid, mu), W, L, tuple(inner)))
    if overrides:
        raise SchemaError(f"per_atom_Lambda refers to unknown atoms {sorted(overrides)}")
    sys = RelaySystem(n, tuple(locals_))
    validate_system(sys)
    return sys


def _keyed_matrices(raw, where, columns=False):
    if isinstance(raw, dict):
        items = raw.items()
    elif isinstance(raw, list):
        items = enumerate(raw)
    else:
        raise SchemaError(f"{where}: expected an object keyed by node id or a list")
    out = {}
    for key, val in items:
        m = _matrix(val, f"{where}[{key!r}]")
        out[key] = m.T if columns else m
    return out if isinstance(raw, dict) else [out[i] for i in range(len(raw))]


def transforms_from_dict(raw):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise SchemaError("transforms: expected an object")
    out = {}
    if "Q" in raw:
        out["Q"] = _matrix(raw["Q"], "transforms.Q")
    for key in ("Q_locals", "G_locals"):
        if key in raw:
            out[key] = _keyed_matrices(raw[key], f"transforms.{key}")
    if "local_frames" in raw:
        out["local_frames"] = _keyed_matrices(raw["local_frames"], "transforms.local_frames", columns=True)
    return out


def load_system(path):
    """Read, validate and orthonormalize a system file."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc})") from exc
    return loads_system(text, source=str(path), digest=digest_bytes(data))


def loads_system(text, source="<string>", digest=None):
    doc = parse_json(text, source)
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be an object")
    notices = []
    sys = system_from_dict(doc, notices)
    vec = None
    if "vector" in doc:
        try:
            vec = np.array(doc["vector"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise SchemaError("vector: not numeric") from exc
        if vec.ndim != 1:
            raise SchemaError("vector: expected a flat list")
    return LoadedSystem(
        system=sys,
        digest=digest or digest_bytes(text.encode("utf-8")),
        transforms=transforms_from_dict(doc.get("transforms")),
        vector=vec,
        notices=notices,
    )


def _rows(a):
    return [[float(x) for x in row] for row in np.asarray(a)]


def _cols(a):
    return _rows(np.asarray(a).T)


def system_to_dict(sys):
    locals_ = []
    ext = []
    for loc in sys.locals:
        inner = []
        for a in loc.inner:
            inner.append({
                "id": a.atom.id,
                "mu": float(a.atom.weight),
                "alpha": float(a.alpha),
                "V_basis": _cols(a.V.basis),
            })
            if a.Lambda is not None:
                ext.append({"local": loc.atom.id, "inner": a.atom.id, "Lambda": _rows(a.Lambda)})
        locals_.append({
            "id": loc.atom.id,
            "mu": float(loc.atom.weight),
            "W_basis": _cols(loc.W.basis),
            "K_dim": int(loc.local_dim),
            "Lambda": _rows(loc.Lambda),
            "inner": inner,
        })
    doc = {"schema_version": SCHEMA_VERSION, "field": "real", "ambient_dim": int(sys.ambient_dim), "locals": locals_}
    if ext:
        doc["extensions"] = {"per_atom_Lambda": ext}
    return doc


def dumps_system(sys):
    return json.dumps(system_to_dict(sys), indent=2) + "\n"


def save_system(sys, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_system(sys))


def to_jsonable(obj):
    """Plain-JSON copy of `obj`; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def build_report(command, digests, tolerances, results, passed, notices=()):
    """Report dictionary; ``timestamp`` is the only run-dependent field."""
    return to_jsonable({
        "report_version": "1",
        "command": command,
        "input_digest": digests,
        "tolerances": tolerances,
        "results": results,
        "notices": list(notices),
        "passed": passed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    })


def dumps_report(report):
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def strip_timestamp(report_text):
    doc = json.loads(report_text)
    doc.pop("timestamp", None)
    return json.dumps(doc, indent=2)

"""JSON documents: named modules, morphisms, complexes, chain maps, diagrams and tasks.

Example::

    {
      "version": "exactcat/1",
      "modules": {"Z": {"generators": 1, "relations": []}},
      "morphisms": {"six": {"source": "Z", "target": "Z", "matrix": [[6]]}},
      "complexes": {"X": {"objects": {"1": "Z", "0": "Z"}, "differentials": {"1": "six"}}},
      "tasks": {"h": {"op": "homology", "complex": "X"}}
    }

Modules may also be written ``{"invariants": [2, 0]}``; differentials and
chain-map components may be morphism names or inline matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .chain import ChainMap, Complex
from .core import FgModule, Morphism
from .errors import ChainComplexError, ParseError, ValidationError
from .indpro import ConstantMap, FinitePoset, IndObject, OmegaTower, ProObject, Stationary
from .linalg import IntMatrix

VERSION = "exactcat/1"
SECTIONS = ("modules", "morphisms", "complexes", "chain_maps", "diagrams", "tasks")


@dataclass
class Document:
    """Normalised JSON content (``data``) plus the entities built from it."""

    data: dict
    modules: dict[str, FgModule] = field(default_factory=dict)
    morphisms: dict[str, Morphism] = field(default_factory=dict)
    complexes: dict[str, Complex] = field(default_factory=dict)
    chain_maps: dict[str, ChainMap] = field(default_factory=dict)
    diagrams: dict[str, IndObject | ProObject] = field(default_factory=dict)

    @property
    def tasks(self) -> dict[str, dict]:
        return self.data["tasks"]

    def __eq__(self, other) -> bool:
        return isinstance(other, Document) and self.data == other.data


def parse(path: str | Path) -> Document:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    return parse_text(text)


def parse_text(text: str) -> Document:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return from_dict(raw)


def serialize(doc: Document) -> str:
    return json.dumps(doc.data, indent=2) + "\n"


def from_dict(raw: Any) -> Document:
    if not isinstance(raw, dict):
        raise ParseError("document must be a JSON object")
    if raw.get("version") != VERSION:
        raise ParseError(f"unknown version tag {raw.get('version')!r} (expected {VERSION!r})")
    extra = set(raw) - set(SECTIONS) - {"version"}
    if extra:
        raise ParseError(f"unknown top-level section {sorted(extra)[0]!r}")
    data: dict = {"version": VERSION}
    for sec in SECTIONS:
        val = raw.get(sec, {})
        if not isinstance(val, dict):
            raise ParseError(f"section {sec!r} must be an object")
        data[sec] = {}
    doc = Document(data)
    for name, m in raw.get("modules", {}).items():
        _module(doc, name, m)
    for name, m in raw.get("morphisms", {}).items():
        _morphism(doc, name, m)
    for name, m in raw.get("complexes", {}).items():
        _complex(doc, name, m)
    for name, m in raw.get("chain_maps", {}).items():
        _chain_map(doc, name, m)
    for name, m in raw.get("diagrams", {}).items():
        _diagram(doc, name, m)
    for name, t in raw.get("tasks", {}).items():
        _task(doc, name, t)
    return doc


# -- helpers ------------------------------------------------------------------------

def _obj(where: str, val: Any) -> dict:
    if not isinstance(val, dict):
        raise ParseError(f"{where}: expected an object")
    return val


def _field(where: str, d: dict, key: str, kind: type | tuple | None = None) -> Any:
    if key not in d:
        raise ParseError(f"{where}: missing field {key!r}")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ParseError(f"{where}.{key}: wrong type")
    return v


def _int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _matrix(where: str, v: Any, ncols: int | None = None) -> list[list[int]]:
    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise ValidationError(f"{where}: matrix must be an array of arrays")
    if not all(_int(x) for r in v for x in r):
        raise ValidationError(f"{where}: matrix entries must be integers")
    widths = {len(r) for r in v}
    if len(widths) > 1:
        raise ValidationError(f"{where}: ragged matrix")
    if ncols is not None and widths and widths != {ncols}:
        raise ValidationError(f"{where}: expected {ncols} columns, got {widths.pop()}")
    return [list(r) for r in v]


def _ref(where: str, table: dict, name: Any, kind: str):
    if not isinstance(name, str):
        raise ParseError(f"{where}: expected a {kind} name")
    if name not in table:
        raise ValidationError(f"{where}: unknown {kind} {name!r}")
    return table[name]


def _degree(where: str, key: str) -> int:
    try:
        return int(key)
    except ValueError:
        raise ParseError(f"{where}: degree key {key!r} is not an integer") from None


# -- entities -----------------------------------------------------------------------

def _module(doc: Document, name: str, m: Any):
    where = f"modules.{name}"
    m = _obj(where, m)
    if "invariants" in m:
        inv = m["invariants"]
        if not isinstance(inv, list) or not all(_int(x) and x >= 0 for x in inv):
            raise ValidationError(f"{where}.invariants: expected non-negative integers")
        mod = FgModule.from_invariants(inv)
    else:
        g = _field(where, m, "generators")
        if not _int(g) or g < 0:
            raise ValidationError(f"{where}.generators: expected a non-negative integer")
        rel = _matrix(f"{where}.relations", m.get("relations", []), g)
        mod = FgModule(g, IntMatrix.of(rel, g))
    doc.modules[name] = mod
    doc.data["modules"][name] = {"generators": mod.generator_count, "relations": mod.relations.tolist()}


def _morphism(doc: Document, name: str, m: Any):
    where = f"morphisms.{name}"
    m = _obj(where, m)
    src = _ref(f"{where}.source", doc.modules, _field(where, m, "source"), "module")
    tgt = _ref(f"{where}.target", doc.modules, _field(where, m, "target"), "module")
    mat = _matrix(f"{where}.matrix", _field(where, m, "matrix"), src.generator_count)
    if len(mat) != tgt.generator_count:
        raise ValidationError(f"{where}.matrix: expected {tgt.generator_count} rows, got {len(mat)}")
    f = Morphism(src, tgt, IntMatrix.of(mat, src.generator_count))
    if not f.is_well_defined():
        raise ValidationError(f"{where}.matrix: does not map the source relations into the target relations")
    doc.morphisms[name] = f
    doc.data["morphisms"][name] = {"source": m["source"], "target": m["target"], "matrix": mat}


def _map_value(where: str, doc: Document, v: Any, src: FgModule, tgt: FgModule):
    """A morphism name or an inline matrix; returns (data value, Morphism)."""
    if isinstance(v, str):
        f = _ref(where, doc.morphisms, v, "morphism")
        if f.source != src or f.target != tgt:
            raise ValidationError(f"{where}: morphism {v!r} has the wrong source or target")
        return v, f
    mat = _matrix(where, v, src.generator_count)
    if len(mat) != tgt.generator_count:
        raise ValidationError(f"{where}: expected {tgt.generator_count} rows, got {len(mat)}")
    f = Morphism(src, tgt, IntMatrix.of(mat, src.generator_count))
    if not f.is_well_defined():
        raise ValidationError(f"{where}: does not respect relations")
    return mat, f


def _complex(doc: Document, name: str, m: Any):
    where = f"complexes.{name}"
    m = _obj(where, m)
    objs_raw = _obj(f"{where}.objects", _field(where, m, "objects"))
    objs, objs_data = {}, {}
    for k, v in objs_raw.items():
        n = _degree(f"{where}.objects", k)
        objs[n] = _ref(f"{where}.objects.{k}", doc.modules, v, "module")
        objs_data[str(n)] = v
    diffs, diffs_data = {}, {}
    for k, v in _obj(f"{where}.differentials", m.get("differentials", {})).items():
        n = _degree(f"{where}.differentials", k)
        src, tgt = objs.get(n, FgModule.zero()), objs.get(n - 1, FgModule.zero())
        data_v, f = _map_value(f"{where}.differentials.{k}", doc, v, src, tgt)
        diffs[n] = f
        diffs_data[str(n)] = data_v
    try:
        doc.complexes[name] = Complex.build(objs, diffs)
    except ChainComplexError as e:
        raise ValidationError(f"{where}: {e}") from None
    doc.data["complexes"][name] = {"objects": objs_data, "differentials": diffs_data}


def _chain_map(doc: Document, name: str, m: Any):
    where = f"chain_maps.{name}"
    m = _obj(where, m)
    x = _ref(f"{where}.source", doc.complexes, _field(where, m, "source"), "complex")
    y = _ref(f"{where}.target", doc.complexes, _field(where, m, "target"), "complex")
    comps, comps_data = {}, {}
    for k, v in _obj(f"{where}.components", m.get("components", {})).items():
        n = _degree(f"{where}.components", k)
        data_v, f = _map_value(f"{where}.components.{k}", doc, v, x.obj(n), y.obj(n))
        comps[n] = f
        comps_data[str(n)] = data_v
    try:
        doc.chain_maps[name] = ChainMap.build(x, y, comps)
    except ChainComplexError as e:
        raise ValidationError(f"{where}: {e}") from None
    doc.data["chain_maps"][name] = {"source": m["source"], "target": m["target"], "components": comps_data}


def _diagram(doc: Document, name: str, m: Any):
    where = f"diagrams.{name}"
    m = _obj(where, m)
    variance = _field(where, m, "variance", str)
    if variance not in ("ind", "pro"):
        raise ParseError(f"{where}.variance: expected 'ind' or 'pro'")
    cls = IndObject if variance == "ind" else ProObject
    shape_raw = _obj(f"{where}.shape", _field(where, m, "shape"))
    objs_raw = _obj(f"{where}.objects", _field(where, m, "objects"))
    arrows_raw = _field(where, m, "arrows", list)
    kind = _field(f"{where}.shape", shape_raw, "kind", str)
    if kind == "poset":
        elements = _field(f"{where}.shape", shape_raw, "elements", list)
        if not all(isinstance(e, str) for e in elements):
            raise ParseError(f"{where}.shape.elements: element names must be strings")
        order = _field(f"{where}.shape", shape_raw, "order", list)
        pairs = []
        for pr in order:
            if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(e, str) for e in pr)):
                raise ParseError(f"{where}.shape.order: pairs must be [lower, upper] names")
            pairs.append(tuple(pr))
        shape = FinitePoset(elements, pairs)
        keyfn = str
        shape_data = {"kind": "poset", "elements": elements, "order": [list(p) for p in pairs]}
    elif kind in ("stationary", "constant"):
        if kind == "stationary":
            k = _field(f"{where}.shape", shape_raw, "k")
            if not _int(k) or k < 0:
                raise ValidationError(f"{where}.shape.k: expected a non-negative integer")
            shape = OmegaTower(Stationary(k))
            shape_data = {"kind": "stationary", "k": k}
        else:
            shape = OmegaTower(ConstantMap())
            shape_data = {"kind": "constant"}

        def keyfn(s):
            return _degree(f"{where}.objects", s)
    else:
        raise ParseError(f"{where}.shape.kind: expected 'poset', 'stationary' or 'constant'")
    objects, objs_data = {}, {}
    for k, v in objs_raw.items():
        objects[keyfn(k)] = _ref(f"{where}.objects.{k}", doc.modules, v, "module")
        objs_data[k] = v
    tower_kind = None if shape_data["kind"] == "poset" else shape_data["kind"]

    def at(i):
        if tower_kind == "constant":
            return objects.get(0)
        if tower_kind == "stationary":
            return objects.get(min(i, shape_data["k"]))
        return objects.get(i)

    arrows, arrows_data = {}, []
    for i, a in enumerate(arrows_raw):
        aw = f"{where}.arrows[{i}]"
        a = _obj(aw, a)
        lo, hi = _field(aw, a, "from"), _field(aw, a, "to")
        key = (keyfn(str(lo)), keyfn(str(hi)))
        if at(key[0]) is None or at(key[1]) is None:
            raise ValidationError(f"{aw}: endpoints must name indexed objects")
        if tower_kind and key[1] != key[0] + 1:
            raise ValidationError(f"{aw}: tower arrows go from n to n+1")
        src, tgt = (at(key[0]), at(key[1])) if variance == "ind" else (at(key[1]), at(key[0]))
        data_v, f = _map_value(f"{aw}.map", doc, _field(aw, a, "map"), src, tgt)
        arrows[key[0] if tower_kind else key] = f
        arrows_data.append({"from": lo, "to": hi, "map": data_v})
    try:
        doc.diagrams[name] = cls(shape, objects, arrows)
    except ValidationError as e:
        raise ValidationError(f"{where}: {e}") from None
    doc.data["diagrams"][name] = {"variance": variance, "shape": shape_data, "objects": objs_data,
                                  "arrows": arrows_data}


TASK_REFS = {"complex": "complexes", "chain_map": "chain_maps", "diagram": "diagrams"}
KIND_NAMES = {"complex": "complex", "chain_map": "chain map", "diagram": "diagram"}


def _task(doc: Document, name: str, t: Any):
    where = f"tasks.{name}"
    t = _obj(where, t)
    _field(where, t, "op", str)
    for key, sec in TASK_REFS.items():
        if key in t:
            _ref(f"{where}.{key}", getattr(doc, sec), t[key], KIND_NAMES[key])
    doc.data["tasks"][name] = dict(t)

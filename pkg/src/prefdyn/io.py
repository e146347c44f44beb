"""Model files (JSON), rule files and query files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .formula import (
    Discourse, Formula, FormulaError, OpType, PropAtom, desugar, parse_discourse, parse_formula,
)
from .model import InformationModel, Layer, ModelError, RuleSet, transitive_closure
from .entailment import MODES, Query


class FileFormatError(ValueError):
    """Malformed model, rule or query file."""


# -------------------------------------------------------------------- models

def _order(n: int, data: Mapping[str, Any]):
    edges = data.get("order_edges")
    if edges is None:
        return None
    try:
        pairs = [(int(a), int(b)) for a, b in edges]
    except (TypeError, ValueError):
        raise FileFormatError("order_edges must be a list of index pairs") from None
    if any(not (0 <= a < n and 0 <= b < n) for a, b in pairs):
        raise FileFormatError("order edge refers to an unknown state")
    if data.get("close_order", True):
        return transitive_closure(n, pairs)
    import numpy as np
    leq = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        leq[a, b] = True
    return leq


def _text_layers(data: Mapping[str, Any], parse, default_fallback: str) -> dict[int, Layer]:
    out = {}
    for key, spec in data.get("layers", {}).items():
        fallback = spec.get("fallback", default_fallback) if isinstance(spec, Mapping) else default_fallback
        entries = {}
        raw = spec.get("entries", spec) if isinstance(spec, Mapping) else spec
        for f_text, value in raw.items():
            if f_text in ("fallback", "templates"):
                continue
            f = parse(f_text)
            if isinstance(value, str):
                entries[f] = parse(value)
            elif isinstance(value, Mapping):
                entries[f] = dict(value)
            else:
                entries[f] = frozenset(int(i) for i in value)
        templates = [(parse(p), parse(d)) for p, d in spec.get("templates", {}).items()] \
            if isinstance(spec, Mapping) else []
        out[int(key)] = (entries, templates, fallback)
    return out


def model_from_json(data: Mapping[str, Any], name: str = "model") -> InformationModel:
    kind = data.get("kind", "generic")
    try:
        if kind == "prop":
            return _prop_from_json(data)
        if kind == "fo":
            return _fo_from_json(data)
        if kind == "generic":
            return _generic_from_json(data)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, (FileFormatError, FormulaError, ModelError)):
            raise
        raise FileFormatError(f"{name}: missing or malformed field {e}") from None
    raise FileFormatError(f"{name}: unknown model kind {kind!r}")


def _finish_layers(raw, class_count, resolve) -> dict[int, Layer]:
    layers = {}
    for i, (entries, templates, fallback) in raw.items():
        layers[i] = Layer({f: resolve(v) for f, v in entries.items()}, templates, fallback)
    for i in range(1, class_count + 1):
        layers.setdefault(i, Layer(fallback="indefeasible"))
    return layers


def _prop_from_json(data: Mapping[str, Any]) -> InformationModel:
    from .prop import PropState, all_assignments, inclusion_order, prop_model

    atoms = list(data["atoms"])
    if "states" in data:
        states = [PropState.of({a: bool(v) for a, v in s.items()}) for s in data["states"]]
    else:
        # lattice form: all assignments minus excluded combinations
        implications = [(a, b) for a, b in data.get("implications", [])]

        def keep(s: PropState) -> bool:
            for lhs, rhs in implications:
                if _lit_holds(s, lhs) and not _lit_holds(s, rhs):
                    return False
            return True

        states = [s for s in all_assignments(atoms) if keep(s)]
    for s in states:
        unknown = set(s.assignment) - set(atoms)
        if unknown:
            raise FileFormatError(f"state {s} uses undeclared atoms {sorted(unknown)}")
    class_count = int(data.get("class_count", 1))
    leq = _order(len(states), data)
    if leq is None:
        leq = inclusion_order(states, atoms)
    raw = _text_layers(data, parse_formula, data.get("fallback", "strict"))

    def resolve(v):
        if isinstance(v, dict):
            need = {(a, bool(b)) for a, b in v.items()}
            return frozenset(i for i, s in enumerate(states) if need <= set(s.items))
        return v

    return prop_model(states, leq, atoms, _finish_layers(raw, class_count, resolve), class_count,
                      meta={"source": data.get("name")})


def _lit_holds(s, text: str) -> bool:
    text = text.strip()
    if text.startswith("~"):
        return s.get(text[1:]) is False
    return s.get(text) is True


def _fo_from_json(data: Mapping[str, Any]) -> InformationModel:
    from .fo import FOState, Vocabulary, build_fo_closure, fo_model, layer_from_spec

    vocab = Vocabulary.from_json(data["vocabulary"])
    class_count = int(data.get("class_count", 1))
    specs = {int(k): v for k, v in data.get("layers", {}).items()}
    if data.get("closure"):
        return build_fo_closure(vocab, specs, class_count,
                                ceiling=int(data.get("ceiling", 20000)),
                                meta={"source": data.get("name")})
    states = [FOState.from_json(s) for s in data["states"]]
    layers = {i: layer_from_spec(spec, vocab) for i, spec in specs.items()}
    for i in range(1, class_count + 1):
        layers.setdefault(i, Layer(fallback="indefeasible"))
    return fo_model(states, vocab, _order(len(states), data), layers, class_count,
                    meta={"source": data.get("name")})


def _generic_from_json(data: Mapping[str, Any]) -> InformationModel:
    names = [str(s) for s in data["states"]]
    index = {s: i for i, s in enumerate(names)}
    n = len(names)

    def ids(values):
        return [index[v] if isinstance(v, str) else int(v) for v in values]

    edges = [[index.get(a, a), index.get(b, b)] for a, b in data.get("order_edges", [])]
    leq = _order(n, {**data, "order_edges": edges})
    if leq is None:
        leq = transitive_closure(n, [])
    table = {parse_formula(a): ids(v) for a, v in data.get("atoms", {}).items()}
    class_count = int(data.get("class_count", 1))
    raw = {}
    for key, spec in data.get("layers", {}).items():
        fallback = spec.get("fallback", "strict")
        entries = {parse_formula(f): frozenset(ids(v)) for f, v in spec.items()
                   if f != "fallback"}
        raw[int(key)] = Layer(entries, fallback=fallback)
    from .model import to_mask
    masks = {a: to_mask(n, v) for a, v in table.items()}

    def interpret(f: Formula):
        return masks[f]

    return InformationModel(leq, interpret, raw, class_count=class_count, names=names,
                            atoms=list(masks), meta={"source": data.get("name")})


def load_model(path: str | Path) -> InformationModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: invalid JSON ({e})") from None
    try:
        m = model_from_json(data, str(path))
    except (FormulaError, ModelError) as e:
        raise FileFormatError(f"{path}: {e}") from None
    m.meta.setdefault("path", str(path))
    return m


def save_prop_model(m: InformationModel, path: str | Path) -> None:
    """Write a propositional model with explicit states, edges and layer sets."""
    import numpy as np
    atoms = sorted({lit.name for lit in m.atoms})
    layers = {}
    for i, layer in m.layers.items():
        spec: dict[str, Any] = {"fallback": layer.fallback}
        for f, v in layer.entries.items():
            spec[str(f)] = str(v) if isinstance(v, Formula) else sorted(v)
        layers[str(i)] = spec
    data = {"kind": "prop", "class_count": m.class_count, "atoms": atoms,
            "states": [dict(s.items) for s in m.payloads],
            "order_edges": [[int(a), int(b)] for a, b in zip(*np.nonzero(m.leq)) if a != b],
            "layers": layers}
    Path(path).write_text(json.dumps(data, indent=1))


# --------------------------------------------------------------------- rules

def parse_rules(text: str, constants=(), name: str = "rules", top_atom: Formula | None = None) -> RuleSet:
    """One formula per line; ``#`` comments; ``scope: min`` switches scope for later lines.

    ``top: ATOM`` names the atom used to desugar ``true``.

    Several scopes in one file produce a combined RuleSet only when uniform;
    use ``load_rules`` to get one RuleSet per scope.
    """
    sets = parse_rule_sets(text, constants, name, top_atom)
    if len(sets) != 1:
        raise FileFormatError(f"{name}: mixed scopes; use parse_rule_sets")
    return sets[0]


def parse_rule_sets(text: str, constants=(), name: str = "rules",
                    top_atom: Formula | None = None) -> list[RuleSet]:
    scope = "all"
    groups: dict[str, list[Formula]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("scope:"):
            scope = line.split(":", 1)[1].strip()
            if scope not in ("all", "min"):
                raise FileFormatError(f"{name}:{lineno}: bad scope {scope!r}")
            continue
        if line.startswith("name:"):
            name = line.split(":", 1)[1].strip()
            continue
        if line.startswith("top:"):
            top_atom = PropAtom(line.split(":", 1)[1].strip())
            continue
        try:
            f = desugar(parse_formula(line, constants), top_atom)
        except FormulaError as e:
            raise FileFormatError(f"{name}:{lineno}: {e}") from None
        groups.setdefault(scope, []).append(f)
    if not groups:
        return [RuleSet(name, [], "all")]
    return [RuleSet(name if sc == "all" else f"{name}@{sc}", fs, sc) for sc, fs in groups.items()]


def load_rules(path: str | Path, constants=(), top_atom: Formula | None = None) -> list[RuleSet]:
    path = Path(path)
    return parse_rule_sets(path.read_text(), constants, path.stem, top_atom)


# ------------------------------------------------------------------- queries

@dataclass
class QuerySpec:
    """A parsed query file."""

    name: str
    query: Query
    models: list[str] = field(default_factory=list)
    generate: dict[str, Any] | None = None
    background: list[str] = field(default_factory=list)
    principles: list[str] = field(default_factory=list)
    expect: bool | None = None
    claim: str = ""
    constants: tuple[str, ...] = ()
    base: Path | None = None

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() or self.base is None else self.base / p


_KEYS = {"name", "mode", "op", "discourse", "conclude", "background", "principles", "models",
         "generate", "expect", "claim", "constants", "top"}


def parse_query(text: str, base: Path | None = None, name: str = "query") -> QuerySpec:
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise FileFormatError(f"{name}:{lineno}: expected 'key: value'")
        key, value = (x.strip() for x in line.split(":", 1))
        if key not in _KEYS:
            raise FileFormatError(f"{name}:{lineno}: unknown key {key!r}")
        fields[key] = value
    for required in ("mode", "discourse", "conclude"):
        if required not in fields:
            raise FileFormatError(f"{name}: missing '{required}:'")
    mode = fields["mode"]
    if mode not in MODES:
        raise FileFormatError(f"{name}: mode must be one of {', '.join(MODES)}")
    try:
        op = OpType.parse(fields.get("op", "+u"))
    except ValueError as e:
        raise FileFormatError(f"{name}: {e}") from None
    constants = tuple(c.strip() for c in fields.get("constants", "").split(",") if c.strip())
    top = PropAtom(fields["top"]) if "top" in fields else None
    try:
        d = parse_discourse(fields["discourse"], op, constants)
        d = Discourse(tuple(desugar(s, top) for s in d), op)
        conclusion = desugar(parse_formula(fields["conclude"], constants), top)
    except FormulaError as e:
        raise FileFormatError(f"{name}: {e}") from None
    expect = None
    if "expect" in fields:
        word = fields["expect"].lower()
        if word not in ("holds", "fails"):
            raise FileFormatError(f"{name}: expect must be 'holds' or 'fails'")
        expect = word == "holds"
    generate = None
    if "generate" in fields:
        generate = parse_bounds(fields["generate"])
    split = lambda key: [x.strip() for x in fields.get(key, "").split(",") if x.strip()]
    return QuerySpec(fields.get("name", name), Query(mode, d, conclusion, op), split("models"),
                     generate, split("background"), split("principles"), expect,
                     fields.get("claim", ""), constants, base)


def parse_bounds(text: str) -> dict[str, Any]:
    """``atoms=3,states=27,count=500,seed=1`` -> dict of ints (unknown keys kept)."""
    out: dict[str, Any] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise FileFormatError(f"bad bound {part!r}; expected key=value")
        k, v = (x.strip() for x in part.split("=", 1))
        try:
            out[k] = int(v)
        except ValueError:
            out[k] = v
    return out


def load_query(path: str | Path) -> QuerySpec:
    path = Path(path)
    return parse_query(path.read_text(), path.parent, path.stem)


__all__ = [
    "FileFormatError", "QuerySpec", "load_model", "load_query", "load_rules", "model_from_json",
    "parse_bounds", "parse_query", "parse_rule_sets", "parse_rules", "save_prop_model",
]

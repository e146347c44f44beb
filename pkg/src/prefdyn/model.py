"""Finite information models with layered interpretations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .formula import (
    ATOMIC, And, Bottom, Equality, FOAtom, Formula, NegLiteral, Or, PropAtom,
    Term, is_static, max_class_index, subformulas, substitute, terms_of,
)


class ModelError(ValueError):
    """Raised when a formula cannot be interpreted in a model."""


@dataclass(frozen=True)
class Finding:
    """One diagnostic produced by a validator or principle checker."""

    kind: str
    location: str
    detail: str

    def __str__(self):
        return f"{self.kind} {self.location} {self.detail}"


@dataclass
class RuleSet:
    """Named background formulas.

    ``scope`` is ``"all"`` (the formula must hold at every state) or
    ``"min"`` (only at the minimal states).
    """

    name: str
    formulas: list[Formula] = field(default_factory=list)
    scope: str = "all"

    def __post_init__(self):
        if self.scope not in ("all", "min"):
            raise ValueError(f"bad rule scope {self.scope!r}")

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)


# ------------------------------------------------------------------ helpers

def to_mask(n: int, ids: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    ids = list(ids)
    if ids:
        mask[np.asarray(ids, dtype=np.intp)] = True
    return mask


def to_ids(mask: np.ndarray) -> frozenset[int]:
    return frozenset(int(i) for i in np.flatnonzero(mask))


def transitive_closure(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    leq = np.eye(n, dtype=bool)
    for s, t in pairs:
        leq[s, t] = True
    for k in range(n):
        leq |= leq[:, k, None] & leq[None, k, :]
    return leq


def _is_metavar(t: Term) -> bool:
    return not t.is_var and len(t.name) == 1 and t.name.isupper()


def _match(pattern: Formula, f: Formula, binding: dict | None = None) -> dict[Term, Term] | None:
    """Bind placeholder terms of ``pattern`` so that it equals ``f``."""
    binding = {} if binding is None else binding
    if type(pattern) is not type(f):
        return None
    if isinstance(pattern, (And, Or)):
        if _match(pattern.left, f.left, binding) is None:
            return None
        return _match(pattern.right, f.right, binding)
    if isinstance(pattern, FOAtom):
        if pattern.predicate != f.predicate or len(pattern.terms) != len(f.terms):
            return None
        pairs = zip(pattern.terms, f.terms)
    elif isinstance(pattern, Equality):
        pairs = zip((pattern.left, pattern.right), (f.left, f.right))
    else:
        return binding if pattern == f else None
    for p, t in pairs:
        if _is_metavar(p):
            if binding.setdefault(p, t) != t:
                return None
        elif p != t:
            return None
    return binding


class Layer:
    """Defeasible interpretation of the static language for one class.

    ``entries`` maps static formulas to either an explicit collection of
    state ids or a defining formula, evaluated indefeasibly.  ``templates``
    are (pattern, definition) pairs where single uppercase letters in the
    pattern are placeholders for terms.  Atoms covered by neither use
    ``fallback``: ``"strict"`` refuses them, ``"indefeasible"`` reuses
    layer 0.  Conjunctions, disjunctions and bottom not listed explicitly are
    lifted compositionally.
    """

    def __init__(self, entries: Mapping[Formula, Any] | None = None,
                 templates: Sequence[tuple[Formula, Formula]] = (),
                 fallback: str = "strict"):
        if fallback not in ("strict", "indefeasible"):
            raise ValueError(f"bad layer fallback {fallback!r}")
        self.entries = dict(entries or {})
        self.templates = list(templates)
        self.fallback = fallback
        for key in self.entries:
            if not is_static(key):
                raise ModelError(f"layer entry {key} is not a static formula")

    def definition(self, f: Formula):
        """Explicit entry, template expansion, or None."""
        if f in self.entries:
            return self.entries[f]
        for pattern, definition in self.templates:
            binding = _match(pattern, f)
            if binding is not None:
                out = definition
                for meta, term in binding.items():
                    out = substitute(out, meta, term)
                return out
        return None

    def covers(self, atom: Formula) -> bool:
        return self.fallback == "indefeasible" or self.definition(atom) is not None

    def __repr__(self):
        return (f"Layer({len(self.entries)} entries, {len(self.templates)} templates, "
                f"fallback={self.fallback})")


class InformationModel:
    """A finite information model <S, leq, <0[[.]], ..., m[[.]]>>.

    ``leq`` is an n x n boolean matrix with ``leq[s, t]`` meaning s is below
    t in the growth order.  ``interpret`` gives the indefeasible meaning of
    an atomic formula as a boolean mask and raises KeyError for undeclared
    vocabulary.  ``layers`` maps each class index 1..m to a Layer.
    Models are treated as immutable once built; evaluation results are
    cached on the instance.
    """

    def __init__(self, leq: np.ndarray, interpret: Callable[[Formula], np.ndarray],
                 layers: Mapping[int, Layer] | None = None, class_count: int | None = None,
                 payloads: Sequence[Any] | None = None, kind: str = "generic",
                 names: Sequence[str] | None = None, atoms: Sequence[Formula] = (),
                 meta: Mapping[str, Any] | None = None):
        leq = np.asarray(leq, dtype=bool)
        if leq.ndim != 2 or leq.shape[0] != leq.shape[1] or leq.shape[0] == 0:
            raise ModelError("order must be a nonempty square matrix")
        self.n = leq.shape[0]
        self.leq = leq
        self.strict = leq & ~leq.T
        self._interpret = interpret
        self.layers = dict(layers or {})
        self.class_count = class_count if class_count is not None else max(self.layers, default=0)
        self.payloads = list(payloads) if payloads is not None else None
        self.kind = kind
        self.names = list(names) if names is not None else [str(i) for i in range(self.n)]
        self.atoms = list(atoms)
        self.meta = dict(meta or {})
        self.cache: dict = {}
        if self.payloads is not None and len(self.payloads) != self.n:
            raise ModelError("one payload per state required")

    @classmethod
    def from_sets(cls, n: int, order_pairs: Iterable[tuple[int, int]],
                  layer0: Mapping[Formula, Iterable[int]],
                  layers: Mapping[int, Mapping[Formula, Iterable[int]]] | None = None,
                  class_count: int | None = None, names: Sequence[str] | None = None,
                  close: bool = True, fallback: str = "strict") -> "InformationModel":
        """Generic model from explicit atom -> state-set tables."""
        if close:
            leq = transitive_closure(n, order_pairs)
        else:
            leq = np.zeros((n, n), dtype=bool)
            for s, t in order_pairs:
                leq[s, t] = True
        table = {a: to_mask(n, ids) for a, ids in layer0.items()}

        def interpret(atom: Formula) -> np.ndarray:
            return table[atom]

        built = {i: Layer({a: frozenset(ids) for a, ids in spec.items()}, fallback=fallback)
                 for i, spec in (layers or {}).items()}
        return cls(leq, interpret, built, class_count=class_count, names=names,
                   atoms=list(table))

    @property
    def states(self) -> range:
        return range(self.n)

    def atom_mask(self, atom: Formula) -> np.ndarray:
        key = ("atom", atom)
        hit = self.cache.get(key)
        if hit is None:
            try:
                hit = np.asarray(self._interpret(atom), dtype=bool)
            except KeyError:
                raise ModelError(f"undeclared vocabulary: {atom}") from None
            self.cache[key] = hit
        return hit

    def min_mask(self) -> np.ndarray:
        hit = self.cache.get("min")
        if hit is None:
            hit = ~self.strict.any(axis=0)
            self.cache["min"] = hit
        return hit

    def name(self, s: int) -> str:
        return self.names[s]

    def describe(self, s: int) -> str:
        if self.payloads is not None and str(self.payloads[s]) != self.names[s]:
            return f"{self.names[s]}:{self.payloads[s]}"
        return self.names[s]

    def __repr__(self):
        return f"InformationModel(kind={self.kind}, states={self.n}, classes={self.class_count})"


# --------------------------------------------------------------- operations

def validate_preorder(m: InformationModel | np.ndarray) -> list[Finding]:
    """Reflexivity and transitivity violations of the growth order."""
    leq = m.leq if isinstance(m, InformationModel) else np.asarray(m, dtype=bool)
    names = m.names if isinstance(m, InformationModel) else [str(i) for i in range(len(leq))]
    out = []
    for s in np.flatnonzero(~np.diag(leq)):
        out.append(Finding("reflexivity", names[s], f"({names[s]},{names[s]}) missing"))
    # (s,u) implied by some (s,t),(t,u) but absent
    implied = (leq.astype(np.float32) @ leq.astype(np.float32)) > 0
    for s, u in zip(*np.nonzero(implied & ~leq)):
        out.append(Finding("transitivity", f"{names[s]}->{names[u]}",
                           f"({names[s]},{names[u]}) missing"))
    return out


def minimal_states(m: InformationModel, t: Iterable[int] | None = None) -> frozenset[int]:
    """{x in t | for all s in t: s <= x implies x <= s}."""
    if t is None:
        return to_ids(m.min_mask())
    mask = to_mask(m.n, t)
    idx = np.flatnonzero(mask)
    below = m.strict[np.ix_(idx, idx)].any(axis=0)
    return frozenset(int(i) for i in idx[~below])


def static_vocabulary(m: InformationModel) -> list[Formula]:
    """Atomic formulas of the model's declared vocabulary."""
    return list(m.atoms)


def validate_preferential_model(m: InformationModel,
                                vocab: Iterable[Formula] | None = None) -> list[Finding]:
    """Layer wiring: one layer per class 1..m, each total on the vocabulary."""
    out = []
    if m.class_count < 1:
        out.append(Finding("classes", "model", "class count must be at least 1"))
    for i in range(1, m.class_count + 1):
        if i not in m.layers:
            out.append(Finding("layer", f"layer {i}", "missing interpretation layer"))
    for i in m.layers:
        if not 1 <= i <= m.class_count:
            out.append(Finding("layer", f"layer {i}", f"index outside 1..{m.class_count}"))
    atoms = list(vocab) if vocab is not None else static_vocabulary(m)
    for i, layer in sorted(m.layers.items()):
        missing = [a for a in atoms if not layer.covers(a)]
        if missing:
            out.append(Finding("coverage", f"layer {i}",
                               "uncovered atoms: " + ", ".join(str(a) for a in missing)))
        for key, value in layer.entries.items():
            if not isinstance(value, Formula):
                bad = [s for s in value if not 0 <= s < m.n]
                if bad:
                    out.append(Finding("range", f"layer {i} {key}", f"unknown states {bad}"))
    return out


def supports(m: InformationModel, rules: RuleSet | Iterable[Formula]) -> bool:
    """True iff every rule holds at every state (or every minimal state)."""
    from .semantics import static_mask

    scope = rules.scope if isinstance(rules, RuleSet) else "all"
    where = m.min_mask() if scope == "min" else np.ones(m.n, dtype=bool)
    for f in rules:
        if max_class_index(f) > m.class_count:
            raise ModelError(f"class index in {f} exceeds model class count {m.class_count}")
        if not static_mask(m, f)[where].all():
            return False
    return True


def unsupported(m: InformationModel, rules: RuleSet | Iterable[Formula]) -> list[Finding]:
    """Rules failing somewhere, with the first failing state."""
    from .semantics import static_mask

    scope = rules.scope if isinstance(rules, RuleSet) else "all"
    where = m.min_mask() if scope == "min" else np.ones(m.n, dtype=bool)
    out = []
    for f in rules:
        bad = np.flatnonzero(where & ~static_mask(m, f))
        if len(bad):
            out.append(Finding("support", m.describe(int(bad[0])), f"{f} fails ({len(bad)} states)"))
    return out


def collapsed_layers(m: InformationModel) -> InformationModel:
    """Copy of ``m`` whose defeasible layers all equal layer 0."""
    return InformationModel(m.leq, m._interpret,
                            {i: Layer(fallback="indefeasible") for i in range(1, m.class_count + 1)},
                            class_count=m.class_count, payloads=m.payloads, kind=m.kind,
                            names=m.names, atoms=m.atoms, meta=m.meta)


__all__ = [
    "ATOMIC", "And", "Bottom", "Finding", "InformationModel", "Layer", "ModelError",
    "NegLiteral", "Or", "PropAtom", "RuleSet", "collapsed_layers", "minimal_states",
    "subformulas", "supports", "terms_of", "to_ids", "to_mask", "transitive_closure",
    "unsupported", "validate_preferential_model", "validate_preorder",
]

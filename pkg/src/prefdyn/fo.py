"""First-order instance: quadruple states <D, I_p, I_c, I_v> and closure models.

Individuals are anonymous integers 1..k, printed d1..dk.  Every state is
encoded as a bitmask (domain members, predicate tuples, one-hot constant and
variable assignments) so that the growth order is plain bit inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .formula import (
    Equality, FOAtom, Formula, Term, parse_formula,
)
from .model import Finding, InformationModel, Layer, ModelError, validate_preorder

DEFAULT_CEILING = 20000


def ind(d: int) -> str:
    return f"d{d}"


def parse_ind(text: str | int) -> int:
    if isinstance(text, int):
        return text
    text = text.strip()
    if text.startswith("d") and text[1:].isdigit():
        return int(text[1:])
    raise ModelError(f"bad individual {text!r}")


@dataclass(frozen=True)
class Vocabulary:
    """Finite first-order vocabulary with a domain bound and closure restrictions.

    Restrictions (one per string) prune closure states:
    ``irreflexive P``, ``symmetric P``, ``max_size P N``, ``exclude P d.. ``,
    ``fixed c dN`` (c may only denote dN), ``together c1 c2`` (defined
    jointly or not at all), ``undefined c`` (never defined).
    """

    predicates: tuple[tuple[str, int], ...]
    constants: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()
    max_domain: int = 2
    restrictions: tuple[str, ...] = ()

    def __post_init__(self):
        clash = set(self.constants) & set(self.variables)
        if clash:
            raise ModelError(f"names used as both constants and variables: {sorted(clash)}")
        for r in self.restrictions:
            _parse_restriction(r)

    @property
    def arity(self) -> dict[str, int]:
        return dict(self.predicates)

    @property
    def terms(self) -> list[Term]:
        return [Term("const", c) for c in self.constants] + [Term("var", v) for v in self.variables]

    def atoms(self) -> list[Formula]:
        """All atomic formulas over the declared terms."""
        terms = self.terms
        out: list[Formula] = []
        for p, k in self.predicates:
            out += [FOAtom(p, tup) for tup in product(terms, repeat=k)]
        for i, a in enumerate(terms):
            for b in terms[i:]:
                out.append(Equality(a, b))
        return out

    def to_json(self) -> dict:
        return {"predicates": {p: k for p, k in self.predicates},
                "constants": list(self.constants), "variables": list(self.variables),
                "max_domain": self.max_domain, "restrictions": list(self.restrictions)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Vocabulary":
        preds = data.get("predicates", {})
        if isinstance(preds, Mapping):
            preds = list(preds.items())
        return cls(tuple((str(p), int(k)) for p, k in preds), tuple(data.get("constants", ())),
                   tuple(data.get("variables", ())), int(data.get("max_domain", 2)),
                   tuple(data.get("restrictions", ())))


@dataclass(frozen=True)
class FOState:
    domain: frozenset[int] = frozenset()
    preds: tuple[tuple[str, frozenset[tuple[int, ...]]], ...] = ()
    consts: tuple[tuple[str, int], ...] = ()
    vars: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, domain: Iterable[int] = (), preds: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
           consts: Mapping[str, int] | None = None, vars: Mapping[str, int] | None = None) -> "FOState":
        p = tuple(sorted((k, frozenset(tuple(t) for t in v)) for k, v in (preds or {}).items() if v))
        return cls(frozenset(domain), p, tuple(sorted((consts or {}).items())),
                   tuple(sorted((vars or {}).items())))

    def pred(self, name: str) -> frozenset[tuple[int, ...]]:
        return dict(self.preds).get(name, frozenset())

    def value(self, t: Term) -> int | None:
        return dict(self.vars if t.is_var else self.consts).get(t.name)

    def well_formed(self, vocab: Vocabulary | None = None) -> list[str]:
        errs = []
        arity = vocab.arity if vocab else None
        for name, tuples in self.preds:
            for tup in tuples:
                if not set(tup) <= self.domain:
                    errs.append(f"{name}{tup} outside domain")
                if arity is not None and len(tup) != arity.get(name, -1):
                    errs.append(f"{name}{tup} has wrong arity")
        for name, d in self.consts + self.vars:
            if d not in self.domain:
                errs.append(f"{name} -> d{d} outside domain")
        return errs

    def __str__(self):
        parts = ["D={" + ",".join(ind(d) for d in sorted(self.domain)) + "}"]
        for name, tuples in self.preds:
            items = ",".join("(" + ",".join(ind(d) for d in t) + ")" for t in sorted(tuples))
            parts.append(f"{name}={{{items}}}")
        if self.consts:
            parts.append(",".join(f"{c}={ind(d)}" for c, d in self.consts))
        if self.vars:
            parts.append(",".join(f"{v}={ind(d)}" for v, d in self.vars))
        return "<" + " ".join(parts) + ">"

    def to_json(self) -> dict:
        return {"domain": sorted(self.domain),
                "preds": {k: sorted(list(t) for t in v) for k, v in self.preds},
                "consts": {c: d for c, d in self.consts}, "vars": {v: d for v, d in self.vars}}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "FOState":
        return cls.of(data.get("domain", ()),
                      {k: [tuple(parse_ind(x) for x in t) for t in v]
                       for k, v in data.get("preds", {}).items()},
                      {c: parse_ind(d) for c, d in data.get("consts", {}).items()},
                      {v: parse_ind(d) for v, d in data.get("vars", {}).items()})


def eval_fo_atom(s: FOState, f: Formula, vocab: Vocabulary | None = None) -> bool:
    """Truth of an atom or identity; undefined terms make it false."""
    if isinstance(f, FOAtom):
        if vocab is not None and f.predicate not in vocab.arity:
            raise ModelError(f"undeclared predicate {f.predicate}")
        vals = [s.value(t) for t in f.terms]
        return None not in vals and tuple(vals) in s.pred(f.predicate)
    if isinstance(f, Equality):
        a, b = s.value(f.left), s.value(f.right)
        return a is not None and a == b
    raise ModelError(f"{f} is not a first-order atom")


# ---------------------------------------------------------------- bit layout

def _parse_restriction(text: str) -> tuple[str, list[str]]:
    words = text.split()
    kinds = {"irreflexive": 1, "symmetric": 1, "max_size": 2, "fixed": 2, "together": 2,
             "undefined": 1}
    if not words:
        raise ModelError("empty restriction")
    head, args = words[0], words[1:]
    if head == "exclude":
        if len(args) < 2:
            raise ModelError(f"bad restriction {text!r}")
    elif kinds.get(head) != len(args):
        raise ModelError(f"bad restriction {text!r}")
    return head, args


class Layout:
    """Bit positions for one vocabulary."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        k = vocab.max_domain
        pos = 0
        self.dom = {}
        for d in range(1, k + 1):
            self.dom[d] = pos
            pos += 1
        self.tup: dict[tuple[str, tuple[int, ...]], int] = {}
        for p, ar in vocab.predicates:
            for t in product(range(1, k + 1), repeat=ar):
                self.tup[(p, t)] = pos
                pos += 1
        self.const: dict[tuple[str, int], int] = {}
        for c in vocab.constants:
            for d in range(1, k + 1):
                self.const[(c, d)] = pos
                pos += 1
        self.var: dict[tuple[str, int], int] = {}
        for v in vocab.variables:
            for d in range(1, k + 1):
                self.var[(v, d)] = pos
                pos += 1
        if pos > 63:
            raise ModelError(f"vocabulary needs {pos} bits; at most 63 supported")
        self.width = pos
        self.var_bits = sum(1 << b for b in self.var.values())

    def encode(self, s: FOState) -> int:
        try:
            bits = sum(1 << self.dom[d] for d in s.domain)
            for name, tuples in s.preds:
                bits |= sum(1 << self.tup[(name, t)] for t in tuples)
            bits |= sum(1 << self.const[(c, d)] for c, d in s.consts)
            bits |= sum(1 << self.var[(v, d)] for v, d in s.vars)
        except KeyError as e:
            raise ModelError(f"state {s} outside vocabulary: {e}") from None
        return bits

    def term_bit(self, t: Term, d: int) -> int:
        table = self.var if t.is_var else self.const
        try:
            return table[(t.name, d)]
        except KeyError:
            raise KeyError(t.name) from None


def _bit(codes: np.ndarray, b: int) -> np.ndarray:
    return (codes >> np.uint64(b)) & np.uint64(1) == np.uint64(1)


def growth_order(codes: np.ndarray, chunk: int = 512) -> np.ndarray:
    """leq[s, t] iff the bits of s are contained in the bits of t."""
    n = len(codes)
    leq = np.empty((n, n), dtype=bool)
    for i in range(0, n, chunk):
        block = codes[i:i + chunk, None] & ~codes[None, :]
        leq[i:i + chunk] = block == 0
    return leq


# ------------------------------------------------------------------- models

def fo_model(states: Sequence[FOState], vocab: Vocabulary, leq: np.ndarray | None = None,
             layers: Mapping[int, Layer] | None = None, class_count: int | None = None,
             meta: Mapping[str, Any] | None = None) -> InformationModel:
    """Model over explicit FO states; the order defaults to growth (bit inclusion)."""
    layout = Layout(vocab)
    codes = np.array([layout.encode(s) for s in states], dtype=np.uint64)
    return _model(list(states), codes, layout, leq, layers, class_count, meta)


def _model(states, codes, layout: Layout, leq, layers, class_count, meta) -> InformationModel:
    vocab = layout.vocab
    arity = vocab.arity
    k = vocab.max_domain
    if leq is None:
        leq = growth_order(codes)

    def term_masks(t: Term) -> dict[int, np.ndarray]:
        return {d: _bit(codes, layout.term_bit(t, d)) for d in range(1, k + 1)}

    def interpret(f: Formula) -> np.ndarray:
        out = np.zeros(len(codes), dtype=bool)
        if isinstance(f, FOAtom):
            if arity.get(f.predicate) != len(f.terms):
                raise KeyError(f.predicate)
            masks = [term_masks(t) for t in f.terms]
            for tup in product(range(1, k + 1), repeat=len(f.terms)):
                m = _bit(codes, layout.tup[(f.predicate, tup)])
                for tm, d in zip(masks, tup):
                    m = m & tm[d]
                out |= m
            return out
        if isinstance(f, Equality):
            a, b = term_masks(f.left), term_masks(f.right)
            for d in range(1, k + 1):
                out |= a[d] & b[d]
            return out
        raise KeyError(str(f))

    var_defined = {}
    for v in vocab.variables:
        mask = np.zeros(len(codes), dtype=bool)
        for d in range(1, k + 1):
            mask |= _bit(codes, layout.var[(v, d)])
        var_defined[v] = mask
    info = {"vocab": vocab, "layout": layout, "codes": codes, "var_defined": var_defined,
            "terms": vocab.terms}
    info.update(meta or {})
    names = [f"s{i}" for i in range(len(states))]
    return InformationModel(leq, interpret, layers, class_count=class_count, payloads=states,
                            kind="fo", names=names, atoms=vocab.atoms(), meta=info)


def _pred_options(vocab: Vocabulary, k: int, pred: str, ar: int) -> list[frozenset]:
    tuples = list(product(range(1, k + 1), repeat=ar))
    rules = [_parse_restriction(r) for r in vocab.restrictions]
    mine = [(h, a) for h, a in rules if h in ("irreflexive", "symmetric", "max_size", "exclude")
            and a[0] == pred]
    for h, a in mine:
        if h == "irreflexive":
            tuples = [t for t in tuples if len(set(t)) == len(t)]
        elif h == "exclude":
            bad = tuple(parse_ind(x) for x in a[1:])
            tuples = [t for t in tuples if t != bad]
    cap = min([int(a[1]) for h, a in mine if h == "max_size"], default=len(tuples))
    out = []
    for r in range(min(cap, len(tuples)) + 1):
        for combo in combinations(tuples, r):
            s = frozenset(combo)
            if any(h == "symmetric" and any(tuple(reversed(t)) not in s for t in s) for h, _ in mine):
                continue
            out.append(s)
    return out


def _const_options(vocab: Vocabulary, k: int) -> list[dict[str, int]]:
    rules = [_parse_restriction(r) for r in vocab.restrictions]
    allowed = {c: [None] + list(range(1, k + 1)) for c in vocab.constants}
    for h, a in rules:
        if h == "fixed":
            d = parse_ind(a[1])
            allowed[a[0]] = [None] + ([d] if d <= k else [])
        elif h == "undefined":
            allowed[a[0]] = [None]
    out = []
    for combo in product(*(allowed[c] for c in vocab.constants)):
        assign = dict(zip(vocab.constants, combo))
        if any(h == "together" and (assign[a[0]] is None) != (assign[a[1]] is None)
               for h, a in rules):
            continue
        out.append({c: d for c, d in assign.items() if d is not None})
    return out


def closure_size(vocab: Vocabulary) -> int:
    total = 0
    for k in range(vocab.max_domain + 1):
        size = len(_const_options(vocab, k)) * (k + 1) ** len(vocab.variables)
        for p, ar in vocab.predicates:
            size *= len(_pred_options(vocab, k, p, ar))
        total += size
    return total


def build_fo_closure(vocab: Vocabulary, layers: Mapping[int, Any] | None = None,
                     class_count: int | None = None, ceiling: int = DEFAULT_CEILING,
                     meta: Mapping[str, Any] | None = None) -> InformationModel:
    """Every state over domains {d1..dk}, k <= max_domain, passing the restrictions.

    ``layers`` maps class index to a Layer or to a spec dict understood by
    ``layer_from_spec``.  Missing classes collapse to layer 0.
    """
    count = closure_size(vocab)
    if count > ceiling:
        raise ModelError(f"closure has {count} states, above the ceiling of {ceiling}")
    states: list[FOState] = []
    for k in range(vocab.max_domain + 1):
        dom = frozenset(range(1, k + 1))
        pred_opts = [_pred_options(vocab, k, p, ar) for p, ar in vocab.predicates]
        const_opts = _const_options(vocab, k)
        var_opts = list(product([None] + list(range(1, k + 1)), repeat=len(vocab.variables)))
        for preds in product(*pred_opts):
            pmap = tuple(sorted((p, s) for (p, _), s in zip(vocab.predicates, preds) if s))
            for consts in const_opts:
                ctuple = tuple(sorted(consts.items()))
                for vs in var_opts:
                    vtuple = tuple(sorted((v, d) for v, d in zip(vocab.variables, vs) if d is not None))
                    states.append(FOState(dom, pmap, ctuple, vtuple))
    layout = Layout(vocab)
    codes = np.array([layout.encode(s) for s in states], dtype=np.uint64)
    built = {}
    for i, spec in (layers or {}).items():
        built[int(i)] = spec if isinstance(spec, Layer) else layer_from_spec(spec, vocab)
    if class_count is None:
        class_count = max(built, default=1)
    for i in range(1, class_count + 1):
        built.setdefault(i, Layer(fallback="indefeasible"))
    info = {"closure": True}
    info.update(meta or {})
    return _model(states, codes, layout, None, built, class_count, info)


def layer_from_spec(spec: Mapping[str, Any], vocab: Vocabulary) -> Layer:
    """Layer from {"fallback": ..., "templates": {pattern: def}, "entries": {f: def or ids}}."""
    consts = vocab.constants
    templates = [(parse_formula(p, consts), parse_formula(d, consts))
                 for p, d in spec.get("templates", {}).items()]
    entries = {}
    for key, value in spec.get("entries", {}).items():
        f = parse_formula(key, consts)
        entries[f] = parse_formula(value, consts) if isinstance(value, str) else frozenset(value)
    return Layer(entries, templates, fallback=spec.get("fallback", "strict"))


def validate_fo_model(m: InformationModel, vocab: Vocabulary | None = None) -> list[Finding]:
    """Growth, fresh-variable freedom and empty minimal states."""
    out = list(validate_preorder(m))
    vocab = vocab or m.meta.get("vocab")
    if vocab is None or m.payloads is None:
        return out + [Finding("payload", "model", "not a first-order model")]
    states: list[FOState] = m.payloads
    for i, s in enumerate(states):
        for e in s.well_formed(vocab):
            out.append(Finding("wellformed", m.names[i], e))
    layout = Layout(vocab)
    codes = np.array([layout.encode(s) for s in states], dtype=np.uint64)
    # (i) growth: along the order every component only grows
    src, dst = np.nonzero(m.leq)
    lost = (codes[src] & ~codes[dst]) != 0
    for s, t in zip(src[lost], dst[lost]):
        out.append(Finding("growth", f"{m.names[s]}->{m.names[t]}", "information lost along the order"))
    # (ii) fresh variables range over the whole later domain
    order = np.argsort(codes)
    sorted_codes = codes[order]
    for v in vocab.variables:
        v_any = sum(1 << layout.var[(v, d)] for d in range(1, vocab.max_domain + 1))
        fresh = (codes[src] & np.uint64(v_any)) == 0
        for d in range(1, vocab.max_domain + 1):
            in_dom = _bit(codes[dst], layout.dom[d])
            pick = fresh & in_dom
            want = ((codes[dst[pick]] & ~np.uint64(layout.var_bits))
                    | (codes[src[pick]] & np.uint64(layout.var_bits))
                    | np.uint64(1 << layout.var[(v, d)]))
            pos = np.searchsorted(sorted_codes, want)
            pos = np.minimum(pos, len(codes) - 1)
            found = sorted_codes[pos] == want
            ok = found.copy()
            ok[found] = m.leq[src[pick][found], order[pos[found]]]
            for s, t in zip(src[pick][~ok], dst[pick][~ok]):
                out.append(Finding("fresh-variable", f"{m.names[s]}->{m.names[t]}",
                                   f"no extension assigning {v} to {ind(d)}"))
                break
    # (iii) minimal states carry no atomic information
    for s in np.flatnonzero(m.min_mask()):
        st = states[s]
        if st.preds or st.consts or st.vars:
            out.append(Finding("minimality", m.names[s], "minimal state has atomic content"))
    return out


__all__ = [
    "FOState", "Layout", "Vocabulary", "build_fo_closure", "closure_size", "eval_fo_atom",
    "fo_model", "growth_order", "layer_from_spec", "validate_fo_model",
]

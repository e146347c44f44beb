"""Formula ASTs, concrete syntax and derived connectives.

Concrete grammar (whitespace insensitive)::

    formula := conj ('v' conj)*
    conj    := unary ('&' unary)*
    unary   := '~' unary
             | ('p' | 'pN') unary               preference class N (p = p1)
             | '[' formula ']' OP unary          box
             | '<' formula '>' OP unary          diamond
             | 'forall' VAR '.' unary
             | '(' formula ')'
             | '_|_' | 'true'
             | IDENT '(' term (',' term)* ')'    first-order atom
             | term '=' term
             | IDENT                             propositional atom
    OP      := '+' | '-' | '+u' | '-u'

``~IDENT`` is a primitive negative literal; ``~`` applied to anything else
is the derived first-order negation.  Terms are variables or constants;
a single lowercase letter is a variable unless declared as a constant.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator


class FormulaError(ValueError):
    """Raised on malformed formula text or ill-formed ASTs."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class OpType(enum.Enum):
    EXTEND = "+"
    REDUCE = "-"
    UPDATE = "+u"
    DOWNDATE = "-u"

    @classmethod
    def parse(cls, text: str) -> "OpType":
        aliases = {"+mu": "+u", "-mu": "-u", "extend": "+", "reduce": "-",
                   "update": "+u", "downdate": "-u"}
        text = aliases.get(text.strip().lower(), text.strip())
        for op in cls:
            if op.value == text:
                return op
        raise ValueError(f"unknown operation type {text!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Term:
    kind: str  # "var" | "const"
    name: str

    def __post_init__(self):
        if self.kind not in ("var", "const"):
            raise FormulaError(f"bad term kind {self.kind!r}")

    @property
    def is_var(self) -> bool:
        return self.kind == "var"

    def __str__(self) -> str:
        return self.name


def Var(name: str) -> Term:
    return Term("var", name)


def Const(name: str) -> Term:
    return Term("const", name)


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, repr=False)
class PropAtom(Formula):
    name: str

    def __repr__(self):
        return f"PropAtom({self.name})"


@dataclass(frozen=True, repr=False)
class NegLiteral(Formula):
    name: str

    def __repr__(self):
        return f"NegLiteral({self.name})"


@dataclass(frozen=True, repr=False)
class FOAtom(Formula):
    predicate: str
    terms: tuple[Term, ...]

    def __repr__(self):
        return f"FOAtom({self.predicate},[{','.join(map(str, self.terms))}])"


@dataclass(frozen=True, repr=False)
class Equality(Formula):
    left: Term
    right: Term

    def __repr__(self):
        return f"Equality({self.left},{self.right})"


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    def __repr__(self):
        return "Bottom"


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Pref(Formula):
    class_index: int
    body: Formula

    def __post_init__(self):
        if self.class_index < 1:
            raise FormulaError("preference class index must be >= 1")
        if not is_static(self.body):
            raise FormulaError(f"preference operator applied to non-static formula {self.body}")

    def __repr__(self):
        return f"Pref({self.class_index}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Box(Formula):
    program: Formula
    op: OpType
    body: Formula

    def __repr__(self):
        return f"Box({self.program!r}, {self.op.name}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    program: Formula
    op: OpType
    body: Formula

    def __repr__(self):
        return f"Diamond({self.program!r}, {self.op.name}, {self.body!r})"


# Surface-only constructors, removed by desugar().

@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula

    def __repr__(self):
        return f"Not({self.body!r})"


@dataclass(frozen=True, repr=False)
class Top(Formula):
    def __repr__(self):
        return "Top"


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: Term
    body: Formula

    def __repr__(self):
        return f"Forall({self.var}, {self.body!r})"


SURFACE = (Not, Top, Forall)
ATOMIC = (PropAtom, NegLiteral, FOAtom, Equality)


@dataclass(frozen=True)
class Discourse:
    sentences: tuple[Formula, ...]
    op: OpType = OpType.UPDATE

    def __post_init__(self):
        if not self.sentences:
            raise FormulaError("a discourse needs at least one sentence")
        for s in self.sentences:
            if not isinstance(s, Formula):
                raise FormulaError(f"not a formula: {s!r}")

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __str__(self):
        return "; ".join(to_text(s) for s in self.sentences)


# ---------------------------------------------------------------- traversal

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    if isinstance(f, (Box, Diamond)):
        return (f.program, f.body)
    if isinstance(f, (Pref, Not, Forall)):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from subformulas(c)


def is_static(f: Formula) -> bool:
    """True for formulas of the static language (no p_i, no modalities)."""
    return not any(isinstance(g, (Pref, Box, Diamond, Not, Forall, Top))
                   for g in subformulas(f))


def is_surface_free(f: Formula) -> bool:
    return not any(isinstance(g, SURFACE) for g in subformulas(f))


def terms_of(f: Formula) -> set[Term]:
    out: set[Term] = set()
    for g in subformulas(f):
        if isinstance(g, FOAtom):
            out.update(g.terms)
        elif isinstance(g, Equality):
            out.update((g.left, g.right))
        elif isinstance(g, Forall):
            out.add(g.var)
    return out


def variables_of(f: Formula) -> set[str]:
    return {t.name for t in terms_of(f) if t.is_var}


def constants_of(f: Formula) -> set[str]:
    return {t.name for t in terms_of(f) if not t.is_var}


def max_class_index(f: Formula) -> int:
    return max((g.class_index for g in subformulas(f) if isinstance(g, Pref)), default=0)


def substitute(f: Formula, old: Term, new: Term) -> Formula:
    """Replace every occurrence of term ``old`` by ``new``."""

    def t(x: Term) -> Term:
        return new if x == old else x

    if isinstance(f, FOAtom):
        return FOAtom(f.predicate, tuple(t(x) for x in f.terms))
    if isinstance(f, Equality):
        return Equality(t(f.left), t(f.right))
    if isinstance(f, And):
        return And(substitute(f.left, old, new), substitute(f.right, old, new))
    if isinstance(f, Or):
        return Or(substitute(f.left, old, new), substitute(f.right, old, new))
    if isinstance(f, Pref):
        return Pref(f.class_index, substitute(f.body, old, new))
    if isinstance(f, Box):
        return Box(substitute(f.program, old, new), f.op, substitute(f.body, old, new))
    if isinstance(f, Diamond):
        return Diamond(substitute(f.program, old, new), f.op, substitute(f.body, old, new))
    if isinstance(f, Not):
        return Not(substitute(f.body, old, new))
    if isinstance(f, Forall):
        return Forall(t(f.var), substitute(f.body, old, new))
    return f


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        raise FormulaError("empty conjunction")
    out = fs[0]
    for g in fs[1:]:
        out = And(out, g)
    return out


def boxed(discourse: Discourse, conclusion: Formula) -> Formula:
    """[phi_1]^o ... [phi_n]^o conclusion."""
    out = conclusion
    for s in reversed(discourse.sentences):
        out = Box(s, discourse.op, out)
    return out


# ----------------------------------------------------------------- desugar

def desugar(f: Formula, top_atom: Formula | None = None,
            used_vars: Iterable[str] = ()) -> Formula:
    """Expand ``~phi`` (first-order), ``true`` and ``forall``.

    ``top_atom`` is the atom p used for true = [p]+ p (defaults to the
    propositional atom ``p``); ``used_vars`` lists variables already bound by
    the discourse prefix, which a quantified variable must avoid.
    """
    top_atom = top_atom if top_atom is not None else PropAtom("p")
    used = frozenset(used_vars)

    def go(g: Formula) -> Formula:
        if isinstance(g, Not):
            return Box(go(g.body), OpType.EXTEND, Bottom())
        if isinstance(g, Top):
            return Box(top_atom, OpType.EXTEND, top_atom)
        if isinstance(g, Forall):
            if g.var.name in used:
                raise FormulaError(f"quantified variable {g.var.name} is not fresh")
            return Box(Equality(g.var, g.var), OpType.EXTEND, go(g.body))
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, Pref):
            return Pref(g.class_index, go(g.body))
        if isinstance(g, Box):
            return Box(go(g.program), g.op, go(g.body))
        if isinstance(g, Diamond):
            return Diamond(go(g.program), g.op, go(g.body))
        return g

    return go(f)


# ------------------------------------------------------------------ printing

def _term(t: Term) -> str:
    return t.name


def to_text(f: Formula) -> str:
    return _print(f, 0)


# precedence: 0 = or, 1 = and, 2 = unary / atom
def _print(f: Formula, ctx: int) -> str:
    if isinstance(f, Or):
        s = f"{_print(f.left, 0)} v {_print(f.right, 1)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(f, And):
        s = f"{_print(f.left, 1)} & {_print(f.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(f, PropAtom):
        return f.name
    if isinstance(f, NegLiteral):
        return f"~{f.name}"
    if isinstance(f, FOAtom):
        return f"{f.predicate}({','.join(map(_term, f.terms))})"
    if isinstance(f, Equality):
        return f"{_term(f.left)} = {_term(f.right)}"
    if isinstance(f, Bottom):
        return "_|_"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Pref):
        tag = "p" if f.class_index == 1 else f"p{f.class_index}"
        return f"{tag} {_print(f.body, 2)}"
    if isinstance(f, Box):
        return f"[{_print(f.program, 0)}]{f.op.value} {_print(f.body, 2)}"
    if isinstance(f, Diamond):
        return f"<{_print(f.program, 0)}>{f.op.value} {_print(f.body, 2)}"
    if isinstance(f, Not):
        inner = _print(f.body, 2)
        if isinstance(f.body, PropAtom):
            inner = f"({inner})"
        return f"~{inner}"
    if isinstance(f, Forall):
        return f"forall {f.var.name} . {_print(f.body, 2)}"
    raise FormulaError(f"cannot print {f!r}")


# ------------------------------------------------------------------- parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<bottom>_\|_)
  | (?P<ident>[A-Za-z][A-Za-z0-9_\-]*)
  | (?P<sym>[\[\]<>()&~=,.])
  | (?P<op>[+\-]u?)
""", re.VERBOSE)

_PREF = re.compile(r"p([0-9]+)?$")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, constants: frozenset[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.constants = constants

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value:
            raise FormulaError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def fail(self, msg: str):
        raise FormulaError(msg, self.peek()[2])

    def parse(self) -> Formula:
        f = self.disj()
        if self.peek()[0] != "eof":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "ident" and self.peek()[1] == "v":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def starts_operand(self, k: int) -> bool:
        kind, val, _ = self.peek(k)
        if kind == "bottom":
            return True
        if kind == "ident":
            # bare 'v' is disjunction unless it is a term of an atom
            return val != "v" or self.peek(k + 1)[1] in ("=", "(")
        return val in ("[", "<", "(", "~")

    def op(self) -> OpType:
        kind, val, pos = self.next()
        if kind != "op":
            raise FormulaError("expected operation type (+, -, +u, -u)", pos)
        return OpType.parse(val)

    def term(self) -> Term:
        kind, val, pos = self.next()
        if kind != "ident":
            raise FormulaError("expected a term", pos)
        return self.make_term(val)

    def make_term(self, name: str) -> Term:
        if name in self.constants:
            return Const(name)
        if len(name) == 1 and name.islower():
            return Var(name)
        return Const(name)

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "~":
            self.next()
            k2, v2, _ = self.peek()
            k3, v3, _ = self.peek(1)
            if k2 == "ident" and v3 not in ("(", "=") and not self._is_pref(v2, 1):
                self.next()
                return NegLiteral(v2)
            return Not(self.unary())
        if val == "(":
            self.next()
            f = self.disj()
            self.expect(")")
            return f
        if val in ("[", "<"):
            self.next()
            prog = self.disj()
            self.expect("]" if val == "[" else ">")
            o = self.op()
            body = self.unary()
            return Box(prog, o, body) if val == "[" else Diamond(prog, o, body)
        if kind == "bottom":
            self.next()
            return Bottom()
        if kind == "ident":
            if val == "true":
                self.next()
                return Top()
            if val == "forall":
                self.next()
                k2, name, p2 = self.next()
                if k2 != "ident":
                    raise FormulaError("expected a variable after forall", p2)
                v = self.make_term(name)
                if not v.is_var:
                    raise FormulaError(f"{name} is not a variable", p2)
                self.expect(".")
                return Forall(v, self.unary())
            if self._is_pref(val, 1):
                self.next()
                m = _PREF.match(val)
                idx = int(m.group(1)) if m.group(1) else 1
                if idx == 0:
                    raise FormulaError("class index 0 is the indefeasible reading and cannot be written", pos)
                body = self.unary()
                if not is_static(body):
                    raise FormulaError("preference operator applies only to static formulas", pos)
                return Pref(idx, body)
            nxt = self.peek(1)[1]
            if nxt == "(":
                self.next()
                self.next()
                terms = [self.term()]
                while self.peek()[1] == ",":
                    self.next()
                    terms.append(self.term())
                self.expect(")")
                return FOAtom(val, tuple(terms))
            if nxt == "=":
                left = self.term()
                self.next()
                return Equality(left, self.term())
            self.next()
            return PropAtom(val)
        self.fail(f"unexpected token {val or 'end of input'!r}")

    def _is_pref(self, val: str, ahead: int) -> bool:
        """``p``/``pN`` is the preference operator iff an operand follows."""
        return bool(_PREF.match(val)) and self.starts_operand(ahead)


def parse_formula(text: str, constants: Iterable[str] = ()) -> Formula:
    """Parse formula text into an AST (surface constructors kept)."""
    return _Parser(text, frozenset(constants)).parse()


def parse_discourse(text: str, op: OpType = OpType.UPDATE,
                    constants: Iterable[str] = ()) -> Discourse:
    parts = [p for p in (s.strip() for s in text.split(";")) if p]
    return Discourse(tuple(parse_formula(p, constants) for p in parts), op)


def formula(text: str, constants: Iterable[str] = (), top_atom: Formula | None = None) -> Formula:
    """Parse and desugar in one step."""
    return desugar(parse_formula(text, constants), top_atom)


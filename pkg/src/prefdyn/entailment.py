"""Static, dynamic and preferential entailment over model families."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .formula import Discourse, Formula, OpType, boxed, conj
from .model import InformationModel, RuleSet, supports, to_ids, to_mask
from .semantics import (
    digits_of, preferential_mask, sequence_image, static_mask, source_mask,
)

MODES = ("static", "dynamic", "minimal-dynamic", "preferential", "minimal-preferential")


class EmptyFamilyError(RuntimeError):
    """No model survives background and principle filtering."""


@dataclass
class ModelFamily:
    """A collection of models filtered by background rules and principles.

    ``models`` is either a sequence or a zero-argument callable returning an
    iterable (a generator spec).  ``principles`` names principle checks
    every retained model must pass; ``vocab`` optionally fixes the formulas
    those checks are instantiated over.
    """

    models: Sequence[InformationModel] | Callable[[], Iterable[InformationModel]]
    background: Sequence[RuleSet] = ()
    principles: Sequence[str] = ()
    vocab: Callable[[InformationModel], list[Formula]] | None = None
    name: str = "family"

    def candidates(self) -> Iterator[InformationModel]:
        source = self.models() if callable(self.models) else self.models
        yield from source

    def admits(self, m: InformationModel) -> bool:
        for rules in self.background:
            if not supports(m, rules):
                return False
        if self.principles:
            from .principles import check_principle
            vocab = self.vocab(m) if self.vocab else None
            for p in self.principles:
                if check_principle(m, p, vocab, first_only=True):
                    return False
        return True

    def retained(self) -> Iterator[tuple[int, InformationModel]]:
        """(candidate index, model) for every admitted model."""
        for i, m in enumerate(self.candidates()):
            if self.admits(m):
                yield i, m


@dataclass
class Witness:
    """A model and source state where the query fails."""

    model_index: int
    model: InformationModel = field(repr=False)
    source: int | str
    realized: frozenset[int]
    priority: int | None
    offending: frozenset[int]

    def describe(self) -> str:
        m = self.model
        src = self.source if isinstance(self.source, str) else m.describe(self.source)
        bad = ", ".join(m.describe(s) for s in sorted(self.offending)[:5])
        k = "" if self.priority is None else f" k={self.priority}"
        return f"model #{self.model_index} source {src}{k}: reaches {bad}"


@dataclass
class Verdict:
    holds: bool
    mode: str
    op: OpType | None
    witness: Witness | None = None
    checked_models: int = 0
    # (model index, source, priority index, priority digits) per evaluated source
    winners: list[tuple[int, int | str, int, str]] = field(default_factory=list)

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class Query:
    mode: str
    discourse: Discourse
    conclusion: Formula
    op: OpType = OpType.UPDATE

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown entailment mode {self.mode!r}")

    @property
    def minimal(self) -> bool:
        return self.mode.startswith("minimal")


# ---------------------------------------------------------- per-model checks

def _static_failure(m: InformationModel, assumptions: Discourse, conclusion: Formula):
    inter = static_mask(m, conj(list(assumptions)))
    bad = inter & ~static_mask(m, conclusion)
    if not bad.any():
        return None
    s = int(np.flatnonzero(bad)[0])
    return s, frozenset([s]), None, frozenset([s])


def _dynamic_failure(m: InformationModel, op: OpType, d: Discourse, conclusion: Formula,
                     minimal: bool):
    psi = static_mask(m, conclusion)
    if minimal:
        out = sequence_image(m, m.min_mask(), op, d)
        if (out & ~psi).any():
            return "min", to_ids(out), None, to_ids(out & ~psi)
        return None
    # states whose every run ends in psi are exactly the boxed formula's extension
    good = static_mask(m, boxed(Discourse(tuple(d), op), conclusion))
    if good.all():
        return None
    s = int(np.flatnonzero(~good)[0])
    out = sequence_image(m, to_mask(m.n, [s]), op, d)
    return s, to_ids(out), None, to_ids(out & ~psi)


def _preferential_failure(m: InformationModel, op: OpType, d: Discourse, conclusion: Formula,
                          minimal: bool, winners: list | None = None):
    psi = static_mask(m, conclusion)
    sources = ["min"] if minimal else range(m.n)
    for src in sources:
        k, out = preferential_mask(m, source_mask(m, src), op, d)
        if winners is not None:
            winners.append((src, k))
        if (out & ~psi).any():
            return src, to_ids(out), k, to_ids(out & ~psi)
    return None


def failure(m: InformationModel, q: Query, winners: list | None = None):
    """(source, realized, k, offending) where ``q`` fails in ``m``, else None."""
    if q.mode == "static":
        return _static_failure(m, q.discourse, q.conclusion)
    if q.mode.endswith("dynamic"):
        return _dynamic_failure(m, q.op, q.discourse, q.conclusion, q.minimal)
    return _preferential_failure(m, q.op, q.discourse, q.conclusion, q.minimal, winners)


# ---------------------------------------------------------------- families

def decide(fam: ModelFamily, q: Query) -> Verdict:
    checked = 0
    winners: list = []
    for i, m in fam.retained():
        checked += 1
        local: list = []
        found = failure(m, q, local)
        n, cc = len(q.discourse), m.class_count
        winners.extend((i, src, k, "".join(map(str, digits_of(k, n, cc)))) for src, k in local)
        if found is not None:
            src, realized, k, bad = found
            return Verdict(False, q.mode, None if q.mode == "static" else q.op,
                           Witness(i, m, src, realized, k, bad), checked, winners)
    if checked == 0:
        raise EmptyFamilyError(f"{fam.name}: no model survives filtering")
    return Verdict(True, q.mode, None if q.mode == "static" else q.op, None, checked, winners)


def statically_entails(fam: ModelFamily, assumptions: Discourse, conclusion: Formula) -> Verdict:
    return decide(fam, Query("static", assumptions, conclusion))


def dynamically_entails(fam: ModelFamily, op: OpType, assumptions: Discourse,
                        conclusion: Formula, minimal: bool = False) -> Verdict:
    mode = "minimal-dynamic" if minimal else "dynamic"
    return decide(fam, Query(mode, assumptions, conclusion, op))


def preferentially_entails(fam: ModelFamily, op: OpType, d: Discourse, conclusion: Formula,
                           minimal: bool = False) -> Verdict:
    mode = "minimal-preferential" if minimal else "preferential"
    return decide(fam, Query(mode, d, conclusion, op))


def find_countermodel(fam: ModelFamily, q: Query) -> Witness | None:
    """First retained model (in enumeration order) falsifying ``q``.

    None means no countermodel within the family's bounds, not entailment.
    """
    for i, m in fam.retained():
        found = failure(m, q)
        if found is not None:
            src, realized, k, bad = found
            return Witness(i, m, src, realized, k, bad)
    return None


def reverify(w: Witness, q: Query) -> bool:
    """Re-evaluate a witness on a fresh copy of its model; True if it still fails."""
    m = w.model
    fresh = InformationModel(m.leq, m._interpret, m.layers, class_count=m.class_count,
                             payloads=m.payloads, kind=m.kind, names=m.names, atoms=m.atoms,
                             meta=m.meta)
    return failure(fresh, q) is not None


__all__ = [
    "EmptyFamilyError", "MODES", "ModelFamily", "Query", "Verdict", "Witness", "decide",
    "dynamically_entails", "failure", "find_countermodel", "preferentially_entails",
    "reverify", "statically_entails",
]

"""Checkers for the pragmatic constraints on defeasible layers.

Universally quantified principles are instantiated over a finite formula
vocabulary supplied by the caller (default: the model's declared atoms).
Each checker returns a list of findings, empty iff the principle holds.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

import numpy as np

from .formula import (
    And, Formula, OpType, Pref, Term, constants_of, substitute, terms_of, variables_of,
)
from .model import Finding, InformationModel
from .semantics import layer_mask, static_mask, step_matrix, image

PRINCIPLES = (
    "Realism", "RobustRealism", "MinimalPreference", "PreservationOfEquivalence",
    "CompleteDeterminacy", "MinPrefFreshVars", "RenamingFreshVars", "PreservationOfIdentities",
)
FO_ONLY = ("MinPrefFreshVars", "RenamingFreshVars", "PreservationOfIdentities")

_ALIASES = {
    "p1": "Realism", "realism": "Realism",
    "robust": "RobustRealism", "robustrealism": "RobustRealism", "robust-realism": "RobustRealism",
    "p2": "MinimalPreference", "minimalpreference": "MinimalPreference",
    "minimal-preference": "MinimalPreference",
    "p3": "PreservationOfEquivalence", "preservationofequivalence": "PreservationOfEquivalence",
    "preservation-of-equivalence": "PreservationOfEquivalence",
    "p4": "CompleteDeterminacy", "completedeterminacy": "CompleteDeterminacy",
    "complete-determinacy": "CompleteDeterminacy",
    "p5": "MinPrefFreshVars", "minpreffreshvars": "MinPrefFreshVars",
    "min-pref-fresh-vars": "MinPrefFreshVars",
    "p6": "RenamingFreshVars", "renamingfreshvars": "RenamingFreshVars",
    "renaming-fresh-vars": "RenamingFreshVars",
    "p7": "PreservationOfIdentities", "preservationofidentities": "PreservationOfIdentities",
    "preservation-of-identities": "PreservationOfIdentities",
}


class PrincipleError(ValueError):
    pass


def principle_id(name: str) -> str:
    if name in PRINCIPLES:
        return name
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise PrincipleError(f"unknown principle {name!r}") from None


def default_vocabulary(m: InformationModel, depth: int = 1) -> list[Formula]:
    """Declared atoms, plus pairwise conjunctions when ``depth`` is 2."""
    atoms = list(m.atoms)
    if depth < 2:
        return atoms
    return atoms + [And(a, b) for a, b in combinations(atoms, 2)]


def _layers(m: InformationModel) -> range:
    return range(1, m.class_count + 1)


def _report(out: list, m: InformationModel, which: str, i: int, f: Formula,
            bad: np.ndarray, note: str = "") -> None:
    for s in np.flatnonzero(bad):
        out.append(Finding(which, f"layer {i} state {m.describe(int(s))}", f"{f}{note}"))


class _Stop(Exception):
    pass


def _realism(m, vocab, out, stop, robust=False):
    which = "RobustRealism" if robust else "Realism"
    for i in _layers(m):
        for f in vocab:
            base = static_mask(m, f)
            if robust and not base.any():
                continue
            bad = layer_mask(m, i, f) & ~base
            if bad.any():
                _report(out, m, which, i, f, bad)
                stop()


def _minimal_preference(m, vocab, out, stop):
    mins = m.min_mask()
    for i in _layers(m):
        for f in vocab:
            for op in (OpType.EXTEND, OpType.UPDATE):
                if image(m, mins, op, f).any() and not image(m, mins, op, Pref(i, f)).any():
                    _report(out, m, "MinimalPreference", i, f, mins, f" (o={op})")
                    stop()


def _equivalence(m, vocab, out, stop):
    for a, b in combinations(vocab, 2):
        if not np.array_equal(static_mask(m, a), static_mask(m, b)):
            continue
        for i in _layers(m):
            bad = layer_mask(m, i, a) ^ layer_mask(m, i, b)
            if bad.any():
                _report(out, m, "PreservationOfEquivalence", i, a, bad, f" vs {b}")
                stop()


def _determinacy(m, vocab, out, stop):
    for i in _layers(m):
        for f in vocab:
            counts = step_matrix(m, OpType.UPDATE, Pref(i, f)).sum(axis=1)
            bad = counts > 1
            if bad.any():
                _report(out, m, "CompleteDeterminacy", i, f, bad, " (several +u outcomes)")
                stop()


def _var_defined(m: InformationModel) -> dict[str, np.ndarray]:
    defined = m.meta.get("var_defined")
    if defined is None:
        raise PrincipleError("first-order principle requested on a model without variables")
    return defined


def _fresh_mask(m: InformationModel, names: Iterable[str]) -> np.ndarray:
    defined = _var_defined(m)
    out = np.ones(m.n, dtype=bool)
    for v in names:
        if v not in defined:
            raise PrincipleError(f"variable {v} not declared in model")
        out &= ~defined[v]
    return out


def _min_pref_fresh(m, vocab, out, stop):
    _var_defined(m)
    for f in vocab:
        if constants_of(f):
            continue
        elig = _fresh_mask(m, variables_of(f))
        if not elig.any():
            continue
        # on finite models a +u meaning is nonempty iff the + meaning is
        above = m.leq[elig]
        has = (above & static_mask(m, f)[None, :]).any(axis=1)
        for i in _layers(m):
            pref = (above & layer_mask(m, i, f)[None, :]).any(axis=1)
            bad = np.zeros(m.n, dtype=bool)
            bad[np.flatnonzero(elig)[has & ~pref]] = True
            if bad.any():
                _report(out, m, "MinPrefFreshVars", i, f, bad)
                stop()


def _renaming(m, vocab, out, stop):
    names = sorted(_var_defined(m))
    for f in vocab:
        for x in names:
            for y in names:
                if x == y:
                    continue
                g = substitute(f, Term("var", y), Term("var", x))
                if g == f:
                    continue
                elig = _fresh_mask(m, [x, y])
                for i in _layers(m):
                    bad = elig & (layer_mask(m, i, f) ^ layer_mask(m, i, g))
                    if bad.any():
                        _report(out, m, "RenamingFreshVars", i, f, bad, f" vs {g}")
                        stop()


def _identities(m, vocab, out, stop, terms: list[Term]):
    from .formula import Equality
    for f in vocab:
        for t2 in sorted(terms_of(f), key=str):
            for t1 in terms:
                if t1 == t2:
                    continue
                g = substitute(f, t2, t1)
                same = static_mask(m, Equality(t1, t2))
                for i in _layers(m):
                    bad = same & (layer_mask(m, i, f) ^ layer_mask(m, i, g))
                    if bad.any():
                        _report(out, m, "PreservationOfIdentities", i, f,
                                bad, f" vs {g} where {t1} = {t2}")
                        stop()


def check_principle(m: InformationModel, which: str, vocab: Iterable[Formula] | None = None,
                    first_only: bool = False) -> list[Finding]:
    """Violations of one principle over ``vocab``; empty iff it holds.

    Minimal Preference is checked for both + and +u at the minimal states.
    Preservation of Identities is read as: at states where t1 = t2 holds,
    the class-i readings of f and f[t1/t2] agree.
    """
    which = principle_id(which)
    vocab = list(vocab) if vocab is not None else default_vocabulary(m)
    if which in FO_ONLY and m.kind == "prop":
        raise PrincipleError(f"{which} applies to first-order models only")
    out: list[Finding] = []

    def stop():
        if first_only:
            raise _Stop

    try:
        if which == "Realism":
            _realism(m, vocab, out, stop)
        elif which == "RobustRealism":
            _realism(m, vocab, out, stop, robust=True)
        elif which == "MinimalPreference":
            _minimal_preference(m, vocab, out, stop)
        elif which == "PreservationOfEquivalence":
            _equivalence(m, vocab, out, stop)
        elif which == "CompleteDeterminacy":
            _determinacy(m, vocab, out, stop)
        elif which == "MinPrefFreshVars":
            _min_pref_fresh(m, vocab, out, stop)
        elif which == "RenamingFreshVars":
            _renaming(m, vocab, out, stop)
        else:
            terms = m.meta.get("terms")
            if terms is None:
                raise PrincipleError("first-order principle requested on a model without terms")
            _identities(m, vocab, out, stop, list(terms))
    except _Stop:
        pass
    return out


def check_all(m: InformationModel, which: Iterable[str] = PRINCIPLES,
              vocab: Iterable[Formula] | None = None) -> dict[str, list[Finding]]:
    vocab = list(vocab) if vocab is not None else None
    out = {}
    for p in which:
        p = principle_id(p)
        if p in FO_ONLY and m.kind == "prop":
            continue
        out[p] = check_principle(m, p, vocab)
    return out


__all__ = [
    "FO_ONLY", "PRINCIPLES", "PrincipleError", "check_all", "check_principle",
    "default_vocabulary", "principle_id",
]

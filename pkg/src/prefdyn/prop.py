"""Propositional instance: partial truth assignments as information states."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .formula import Formula, NegLiteral, PropAtom, Pref, subformulas
from .model import (
    Finding, InformationModel, Layer, ModelError, RuleSet, supports,
    validate_preorder,
)


@dataclass(frozen=True)
class PropState:
    """A partial assignment, stored as sorted (atom, value) pairs."""

    items: tuple[tuple[str, bool], ...] = ()

    @classmethod
    def of(cls, assignment: Mapping[str, bool] | None = None, **kw: bool) -> "PropState":
        merged = dict(assignment or {}, **kw)
        return cls(tuple(sorted(merged.items())))

    @property
    def assignment(self) -> dict[str, bool]:
        return dict(self.items)

    def get(self, atom: str) -> bool | None:
        return self.assignment.get(atom)

    def holds(self, literal: Formula) -> bool:
        if isinstance(literal, PropAtom):
            return self.get(literal.name) is True
        if isinstance(literal, NegLiteral):
            return self.get(literal.name) is False
        raise ModelError(f"{literal} is not a propositional literal")

    def __le__(self, other: "PropState") -> bool:
        return set(self.items) <= set(other.items)

    def __len__(self):
        return len(self.items)

    def __str__(self):
        return "{" + ",".join(f"{a}={'t' if v else 'f'}" for a, v in self.items) + "}"


def literals(atoms: Iterable[str]) -> list[Formula]:
    out: list[Formula] = []
    for a in atoms:
        out += [PropAtom(a), NegLiteral(a)]
    return out


def value_matrix(states: Sequence[PropState], atoms: Sequence[str]) -> np.ndarray:
    """int8 matrix: 1 true, -1 false, 0 undefined."""
    vals = np.zeros((len(states), len(atoms)), dtype=np.int8)
    col = {a: j for j, a in enumerate(atoms)}
    for i, s in enumerate(states):
        for a, v in s.items:
            vals[i, col[a]] = 1 if v else -1
    return vals


def _literal_table(vals: np.ndarray, atoms: Sequence[str]) -> dict[Formula, np.ndarray]:
    table = {}
    for j, a in enumerate(atoms):
        table[PropAtom(a)] = vals[:, j] == 1
        table[NegLiteral(a)] = vals[:, j] == -1
    return table


def inclusion_order(states: Sequence[PropState] | np.ndarray, atoms: Sequence[str]) -> np.ndarray:
    vals = states if isinstance(states, np.ndarray) else value_matrix(states, atoms)
    pos, neg = vals == 1, vals == -1
    # s <= t iff every literal of s is a literal of t
    extra = (pos[:, None, :] & ~pos[None, :, :]) | (neg[:, None, :] & ~neg[None, :, :])
    return ~extra.any(axis=2)


def _layer_from_spec(spec: Mapping[Any, Any], states: Sequence[PropState],
                     fallback: str, parse) -> Layer:
    entries = {}
    for key, value in spec.items():
        f = parse(key) if isinstance(key, str) else key
        if isinstance(value, Formula):
            entries[f] = value
        elif isinstance(value, str):
            entries[f] = parse(value)
        elif callable(value):
            entries[f] = frozenset(i for i, s in enumerate(states) if value(s))
        elif isinstance(value, Mapping):
            need = set(value.items())
            entries[f] = frozenset(i for i, s in enumerate(states) if need <= set(s.items))
        else:
            entries[f] = frozenset(value)
    return Layer(entries, fallback=fallback)


def prop_model(states: Sequence[PropState], leq: np.ndarray, atoms: Sequence[str],
               layers: Mapping[int, Layer] | None = None, class_count: int | None = None,
               meta: Mapping[str, Any] | None = None, vals: np.ndarray | None = None,
               names: Sequence[str] | None = None) -> InformationModel:
    """Propositional model whose layer 0 is read off the assignments."""
    atoms = list(atoms)
    table = _literal_table(vals if vals is not None else value_matrix(states, atoms), atoms)

    def interpret(f: Formula) -> np.ndarray:
        return table[f]

    return InformationModel(leq, interpret, layers, class_count=class_count,
                            payloads=list(states), kind="prop",
                            names=names if names is not None else [str(s) for s in states],
                            atoms=literals(atoms), meta=meta)


@lru_cache(maxsize=64)
def _pool(atoms: tuple[str, ...]) -> tuple[list[PropState], list[str], np.ndarray]:
    states = all_assignments(atoms)
    return states, [str(s) for s in states], value_matrix(states, atoms)


def all_assignments(atoms: Sequence[str]) -> list[PropState]:
    out = []
    for vals in product((None, True, False), repeat=len(atoms)):
        out.append(PropState.of({a: v for a, v in zip(atoms, vals) if v is not None}))
    out.sort(key=lambda s: (len(s), str(s)))
    return out


def build_assignment_lattice(atoms: Sequence[str],
                             restriction: Callable[[PropState], bool] | None = None,
                             layers: Mapping[int, Mapping[Any, Any]] | None = None,
                             class_count: int | None = None,
                             fallback: str = "strict") -> InformationModel:
    """All coherent partial assignments passing ``restriction``, ordered by inclusion.

    ``layers`` maps a class index to {literal: spec}; a spec is a set of
    state ids, a required sub-assignment (dict), a predicate on PropState,
    or a defining formula.
    """
    from .formula import parse_formula

    atoms = list(atoms)
    if not atoms:
        raise ModelError("at least one atom required")
    states = [s for s in all_assignments(atoms) if restriction is None or restriction(s)]
    if not states or len(states[0]) != 0:
        raise ModelError("restriction removes the empty assignment")
    built = {i: _layer_from_spec(spec, states, fallback, parse_formula)
             for i, spec in (layers or {}).items()}
    if class_count is None:
        class_count = max(built, default=1)
    for i in range(1, class_count + 1):
        built.setdefault(i, Layer(fallback="indefeasible"))
    return prop_model(states, inclusion_order(states, atoms), atoms, built, class_count)


def validate_prop_model(m: InformationModel) -> list[Finding]:
    """Structural conditions: monotonic, coherent, empty minimal states."""
    out = list(validate_preorder(m))
    if m.payloads is None or not all(isinstance(p, PropState) for p in m.payloads):
        return out + [Finding("payload", "model", "states are not partial assignments")]
    states: list[PropState] = m.payloads
    for s, t in zip(*np.nonzero(m.leq)):
        if not states[s] <= states[t]:
            out.append(Finding("monotonicity", f"{m.names[s]}->{m.names[t]}",
                               "information lost along the order"))
    for lit in m.atoms:
        mask = m.atom_mask(lit)
        bad = m.leq & mask[:, None] & ~mask[None, :]
        for s, t in zip(*np.nonzero(bad)):
            out.append(Finding("persistence", f"{m.names[s]}->{m.names[t]}", f"{lit} not preserved"))
    for lit in m.atoms:
        if isinstance(lit, PropAtom):
            both = m.atom_mask(lit) & m.atom_mask(NegLiteral(lit.name))
            for s in np.flatnonzero(both):
                out.append(Finding("coherence", m.names[s], f"{lit.name} both true and false"))
    for s in np.flatnonzero(m.min_mask()):
        if len(states[s]):
            out.append(Finding("minimality", m.names[s], "minimal state has atomic content"))
    return out


# ----------------------------------------------------------------- generator

def _rule_atoms(rules: Iterable[RuleSet]) -> list[str]:
    seen: dict[str, None] = {}
    for rs in rules:
        for f in rs:
            for g in subformulas(f):
                if isinstance(g, (PropAtom, NegLiteral)):
                    seen.setdefault(g.name, None)
    return list(seen)


def _uses_layers(f: Formula) -> bool:
    return any(isinstance(g, Pref) for g in subformulas(f))


def _random_states(rng: random.Random, vals: np.ndarray, max_states: int) -> np.ndarray:
    """Indices into the assignment pool; index 0 (the empty one) always kept."""
    k = vals.shape[1]
    keep = np.ones(len(vals), dtype=bool)
    lits = [(j, v) for j in range(k) for v in (1, -1)]
    # random implications "l1 => l2" prune the pool
    for _ in range(rng.randint(0, 3)):
        (j1, v1), (j2, v2) = rng.sample(lits, 2)
        if j1 != j2:
            keep &= (vals[:, j1] != v1) | (vals[:, j2] == v2)
    p = rng.uniform(0.4, 1.0)
    idx = [0] + [i for i in np.flatnonzero(keep[1:]) + 1 if rng.random() < p]
    if len(idx) > max_states:
        idx = [0] + sorted(rng.sample(idx[1:], max_states - 1))
    return np.array(idx, dtype=np.intp)


def _random_layer(rng: random.Random, vals: np.ndarray, atoms: list[str],
                  table: dict[Formula, np.ndarray], realism_noise: float) -> Layer:
    entries = {}
    n = len(vals)
    col = {a: j for j, a in enumerate(atoms)}
    for lit, base in table.items():
        wanted = []
        for other in atoms:
            r = rng.random()
            if other != lit.name and r >= 0.2:
                wanted.append((col[other], 1 if r < 0.6 else -1))
        rng.shuffle(wanted)
        # drop consequences until some state realizes them, mostly
        while True:
            mask = base.copy()
            for j, want in wanted:
                mask &= vals[:, j] == want
            if mask.any() or not wanted or rng.random() < 0.1:
                break
            wanted.pop()
        if rng.random() < 0.1 and mask.sum() > 1:
            mask[rng.choice(list(np.flatnonzero(mask)))] = False
        entries[lit] = mask
    if rng.random() < realism_noise:
        lit = rng.choice(list(entries))
        entries[lit][rng.randrange(n)] = True
    return Layer({lit: frozenset(np.flatnonzero(mask).tolist()) for lit, mask in entries.items()})


def generate_models(max_atoms: int = 3, max_states: int = 27, seed: int = 0,
                    background: Sequence[RuleSet] = (), principles: Sequence[str] = (),
                    atoms: Sequence[str] | None = None, class_count: int = 1,
                    limit: int | None = None, max_tries: int | None = None,
                    realism_noise: float = 0.05) -> Iterator[InformationModel]:
    """Seeded stream of propositional models passing ``background`` and ``principles``.

    Atom names come from ``atoms``, else from the background rules, else
    ``a1..ak``.  States are random subsets of the partial assignments (always
    containing the empty one) under inclusion; layers are literal meanings
    narrowed by random consequences.  ``limit`` caps emitted models and
    ``max_tries`` caps candidates drawn.
    """
    from .principles import check_principle

    rng = random.Random(seed)
    fixed = list(atoms) if atoms is not None else _rule_atoms(background)
    plain = [RuleSet(rs.name, [f for f in rs if not _uses_layers(f)], rs.scope) for rs in background]
    emitted = tries = 0
    while limit is None or emitted < limit:
        if max_tries is not None and tries >= max_tries:
            return
        tries += 1
        atoms = fixed or [f"a{i}" for i in range(1, rng.randint(1, max(max_atoms, 1)) + 1)]
        pool, pool_names, pool_vals = _pool(tuple(atoms))
        idx = _random_states(rng, pool_vals, max_states)
        vals = pool_vals[idx]
        states = [pool[i] for i in idx]
        names = [pool_names[i] for i in idx]
        leq = inclusion_order(vals, atoms)
        probe = prop_model(states, leq, atoms, {}, class_count, vals=vals, names=names)
        if not all(supports(probe, rs) for rs in plain):
            continue
        table = _literal_table(vals, atoms)
        # several layer draws per state space, since layer-free rules already pass
        for _ in range(8):
            layers = {i: _random_layer(rng, vals, atoms, table, realism_noise)
                      for i in range(1, class_count + 1)}
            m = prop_model(states, leq, atoms, layers, class_count,
                           meta={"seed": seed, "try": tries}, vals=vals, names=names)
            if not all(supports(m, rs) for rs in background):
                continue
            if any(check_principle(m, p, first_only=True) for p in principles):
                continue
            emitted += 1
            yield m
            break


__all__ = [
    "PropState", "all_assignments", "build_assignment_lattice", "generate_models",
    "inclusion_order", "literals", "prop_model", "validate_prop_model", "value_matrix",
]

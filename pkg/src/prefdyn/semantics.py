"""Static, operational, relational and preferential meanings.

Internally state sets are boolean numpy masks and relations are n x n
boolean matrices; the public functions return frozensets of state ids and
sets of pairs.  Results are memoized on the model (models are immutable).
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .formula import (
    ATOMIC, And, Bottom, Box, Diamond, Discourse, Formula, OpType, Or, Pref,
)
from .model import InformationModel, ModelError, to_ids, to_mask

# Above this many sources an image is computed from the full step matrix.
_LOOP_SOURCES = 48


# ------------------------------------------------------------------ static

def static_mask(m: InformationModel, f: Formula) -> np.ndarray:
    key = ("s", f)
    hit = m.cache.get(key)
    if hit is not None:
        return hit
    if isinstance(f, ATOMIC):
        out = m.atom_mask(f)
    elif isinstance(f, Bottom):
        out = np.zeros(m.n, dtype=bool)
    elif isinstance(f, And):
        out = static_mask(m, f.left) & static_mask(m, f.right)
    elif isinstance(f, Or):
        out = static_mask(m, f.left) | static_mask(m, f.right)
    elif isinstance(f, Pref):
        out = layer_mask(m, f.class_index, f.body)
    elif isinstance(f, Box):
        rel = step_matrix(m, f.op, f.program)
        out = ~(rel & ~static_mask(m, f.body)[None, :]).any(axis=1)
    elif isinstance(f, Diamond):
        rel = step_matrix(m, f.op, f.program)
        out = (rel & static_mask(m, f.body)[None, :]).any(axis=1)
    else:
        raise ModelError(f"cannot evaluate surface form {f!r}; desugar it first")
    out.setflags(write=False)
    m.cache[key] = out
    return out


def layer_mask(m: InformationModel, i: int, f: Formula) -> np.ndarray:
    """The class-i interpretation of a static formula."""
    if i == 0:
        return static_mask(m, f)
    if i > m.class_count:
        raise ModelError(f"class index {i} exceeds model class count {m.class_count}")
    key = ("L", i, f)
    hit = m.cache.get(key)
    if hit is not None:
        return hit
    layer = m.layers.get(i)
    if layer is None:
        raise ModelError(f"model has no interpretation layer {i}")
    definition = layer.definition(f)
    if isinstance(definition, Formula):
        out = static_mask(m, definition)
    elif definition is not None:
        out = to_mask(m.n, definition)
    elif isinstance(f, And):
        out = layer_mask(m, i, f.left) & layer_mask(m, i, f.right)
    elif isinstance(f, Or):
        out = layer_mask(m, i, f.left) | layer_mask(m, i, f.right)
    elif isinstance(f, Bottom):
        out = np.zeros(m.n, dtype=bool)
    elif layer.fallback == "indefeasible":
        out = static_mask(m, f)
    else:
        raise ModelError(f"layer {i} does not interpret {f}")
    out = np.asarray(out, dtype=bool)
    out.setflags(write=False)
    m.cache[key] = out
    return out


def eval_static(m: InformationModel, f: Formula) -> frozenset[int]:
    return to_ids(static_mask(m, f))


# -------------------------------------------------------------- operations

def _select(m: InformationModel, cand: np.ndarray, op: OpType) -> np.ndarray:
    """Rows of ``cand`` reduced to their minimal (+u) or maximal (-u) members."""
    cols = np.flatnonzero(cand.any(axis=0))
    if len(cols) == 0:
        return cand
    sub = m.strict[np.ix_(cols, cols)]
    if op is OpType.DOWNDATE:
        sub = sub.T
    # t is dominated when some other candidate u has u < t (or t < u for -u)
    block = cand[:, cols].astype(np.float32)
    dominated = (block @ sub.astype(np.float32)) > 0
    out = cand.copy()
    out[:, cols] &= ~dominated
    return out


def _raw(m: InformationModel, op: OpType, f: Formula) -> np.ndarray:
    phi = static_mask(m, f)
    if op in (OpType.EXTEND, OpType.UPDATE):
        return m.leq & phi[None, :]
    return m.leq.T & ~phi[None, :]


def step_matrix(m: InformationModel, op: OpType, f: Formula) -> np.ndarray:
    """rel[s, t] iff t is in the o-meaning of f at s."""
    key = ("R", op, f)
    hit = m.cache.get(key)
    if hit is None:
        hit = _raw(m, op, f)
        if op in (OpType.UPDATE, OpType.DOWNDATE):
            hit = _select(m, hit, op)
        hit.setflags(write=False)
        m.cache[key] = hit
    return hit


def image(m: InformationModel, sources: np.ndarray, op: OpType, f: Formula) -> np.ndarray:
    """Union of o-meanings over a mask of source states."""
    idx = np.flatnonzero(sources)
    if len(idx) == 0:
        return np.zeros(m.n, dtype=bool)
    if ("R", op, f) in m.cache or len(idx) > _LOOP_SOURCES:
        return step_matrix(m, op, f)[idx].any(axis=0)
    phi = static_mask(m, f)
    out = np.zeros(m.n, dtype=bool)
    for s in idx:
        if op in (OpType.EXTEND, OpType.UPDATE):
            cand = m.leq[s] & phi
        else:
            cand = m.leq[:, s] & ~phi
        if op in (OpType.UPDATE, OpType.DOWNDATE):
            c = np.flatnonzero(cand)
            sub = m.strict[np.ix_(c, c)]
            dominated = sub.any(axis=0) if op is OpType.UPDATE else sub.any(axis=1)
            out[c[~dominated]] = True
        else:
            out |= cand
    return out


def source_mask(m: InformationModel, source) -> np.ndarray:
    if isinstance(source, str):
        if source != "min":
            raise ValueError(f"unknown source {source!r}")
        return m.min_mask()
    if isinstance(source, (int, np.integer)):
        if not 0 <= source < m.n:
            raise ModelError(f"state {source} not in model")
        return to_mask(m.n, [int(source)])
    ids = list(source)
    if any(not 0 <= s < m.n for s in ids):
        raise ModelError("source states not in model")
    return to_mask(m.n, ids)


def o_meaning(m: InformationModel, source, op: OpType, f: Formula) -> frozenset[int]:
    """o-meaning of f at a state, a collection of states, or ``"min"``."""
    return to_ids(image(m, source_mask(m, source), op, f))


def relational_meaning(m: InformationModel, op: OpType, f: Formula) -> frozenset[tuple[int, int]]:
    rel = step_matrix(m, op, f)
    return frozenset((int(s), int(t)) for s, t in zip(*np.nonzero(rel)))


def sequence_matrix(m: InformationModel, op: OpType, d: Discourse | Iterable[Formula]) -> np.ndarray:
    sentences = list(d)
    rel = step_matrix(m, op, sentences[0])
    for f in sentences[1:]:
        rel = (rel.astype(np.float32) @ step_matrix(m, op, f).astype(np.float32)) > 0
    return rel


def sequence_meaning(m: InformationModel, op: OpType, d: Discourse) -> frozenset[tuple[int, int]]:
    rel = sequence_matrix(m, op, d)
    return frozenset((int(s), int(t)) for s, t in zip(*np.nonzero(rel)))


def sequence_image(m: InformationModel, sources: np.ndarray, op: OpType,
                   sentences: Iterable[Formula]) -> np.ndarray:
    cur = sources
    for f in sentences:
        cur = image(m, cur, op, f)
    return cur


# ------------------------------------------------------------- priorities

def digits_of(k: int, n: int, m: int) -> tuple[int, ...]:
    """Base-(m+1) digits of k, most significant (first sentence) first."""
    base = m + 1
    if not 0 <= k < base ** n:
        raise ValueError(f"priority index {k} out of range for n={n}, m={m}")
    out = []
    for _ in range(n):
        k, r = divmod(k, base)
        out.append(r)
    return tuple(reversed(out))


def index_of(digits: Iterable[int], m: int) -> int:
    k = 0
    for dgt in digits:
        if not 0 <= dgt <= m:
            raise ValueError(f"digit {dgt} outside 0..{m}")
        k = k * (m + 1) + dgt
    return k


def reading_sentence(f: Formula, digit: int) -> Formula:
    return f if digit == 0 else Pref(digit, f)


def _check_static(d: Discourse) -> None:
    from .formula import is_static
    for f in d:
        if not is_static(f):
            raise ModelError(f"preferential readings need static sentences; got {f}")


def iter_readings(m: InformationModel, sources: np.ndarray, op: OpType,
                  d: Discourse) -> Iterator[tuple[int, np.ndarray]]:
    """All (k, reading mask) pairs in increasing k, sharing prefix images."""
    _check_static(d)
    sentences = list(d)
    base = m.class_count + 1

    def walk(pos: int, k: int, cur: np.ndarray):
        if pos == len(sentences):
            yield k, cur
            return
        for dgt in range(base):
            nxt = image(m, cur, op, reading_sentence(sentences[pos], dgt)) if cur.any() else cur
            yield from walk(pos + 1, k * base + dgt, nxt)

    yield from walk(0, 0, sources)


def reading_mask(m: InformationModel, sources: np.ndarray, op: OpType, d: Discourse,
                 k: int) -> np.ndarray:
    _check_static(d)
    digits = digits_of(k, len(d), m.class_count)
    return sequence_image(m, sources, op,
                          [reading_sentence(f, g) for f, g in zip(d, digits)])


def priority_reading(m: InformationModel, source, op: OpType, d: Discourse, k: int) -> frozenset[int]:
    return to_ids(reading_mask(m, source_mask(m, source), op, d, k))


def all_readings(m: InformationModel, source, op: OpType, d: Discourse) -> list[frozenset[int]]:
    """Readings indexed by k; there are exactly (m+1)^n of them."""
    out = [to_ids(r) for _, r in iter_readings(m, source_mask(m, source), op, d)]
    assert len(out) == (m.class_count + 1) ** len(d)
    return out


def preferential_mask(m: InformationModel, sources: np.ndarray, op: OpType,
                      d: Discourse) -> tuple[int, np.ndarray]:
    """Highest nonzero priority with a nonempty reading, else reading 0."""
    _check_static(d)
    sentences = list(d)
    base = m.class_count + 1

    # depth-first from the highest digits down: the first nonempty leaf is the max k
    def search(pos: int, k: int, cur: np.ndarray):
        if pos == len(sentences):
            return (k, cur) if cur.any() and k > 0 else None
        for dgt in range(base - 1, -1, -1):
            nxt = image(m, cur, op, reading_sentence(sentences[pos], dgt))
            if not nxt.any():
                continue
            found = search(pos + 1, k * base + dgt, nxt)
            if found is not None:
                return found
        return None

    found = search(0, 0, sources) if sources.any() else None
    if found is not None:
        return found
    return 0, sequence_image(m, sources, op, sentences)


def preferential_meaning(m: InformationModel, source, op: OpType,
                         d: Discourse) -> tuple[int, frozenset[int]]:
    k, mask = preferential_mask(m, source_mask(m, source), op, d)
    return k, to_ids(mask)


def preferential_relation(m: InformationModel, op: OpType, f: Formula) -> np.ndarray:
    """rel[s, t] iff t is in the single-sentence preferential meaning at s."""
    d = Discourse((f,))
    rows = np.zeros((m.n, m.n), dtype=bool)
    for s in range(m.n):
        rows[s] = preferential_mask(m, to_mask(m.n, [s]), op, d)[1]
    return rows


def naive_composition(m: InformationModel, op: OpType, d: Discourse) -> frozenset[tuple[int, int]]:
    """Composition of per-sentence preferential meanings.

    This is the construction that fails to prefer the best overall reading;
    it is kept as a reference point for the priority-based definition.
    """
    rel = None
    for f in d:
        step = preferential_relation(m, op, f).astype(np.float32)
        rel = step if rel is None else rel @ step
    return frozenset((int(s), int(t)) for s, t in zip(*np.nonzero(rel > 0)))


__all__ = [
    "all_readings", "digits_of", "eval_static", "image", "index_of", "iter_readings",
    "layer_mask", "naive_composition", "o_meaning", "preferential_relation", "preferential_mask", "preferential_meaning",
    "priority_reading", "reading_mask", "relational_meaning", "sequence_image",
    "sequence_matrix", "sequence_meaning", "source_mask", "static_mask", "step_matrix",
]

"""Shipped scenarios: witness models, background rules and expected verdicts."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import chain
from pathlib import Path
from typing import Callable, Iterator

from .entailment import EmptyFamilyError, ModelFamily, Verdict, decide
from .formula import OpType, formula, parse_discourse
from .io import QuerySpec, load_model, load_query, load_rules
from .model import InformationModel, RuleSet
from .prop import generate_models
from .semantics import image, naive_composition, preferential_meaning, source_mask


class ScenarioError(KeyError):
    pass


def data_dir() -> Path:
    return Path(str(resources.files("prefdyn") / "scenarios"))


# canonical name -> (kind, query files, extra checks)
_TABLE: dict[str, tuple[str, tuple[str, ...], tuple[str, ...]]] = {
    "penguin": ("prop", ("penguin-bird", "penguin-bird-penguin"), ()),
    "quaker-Δ": ("prop", ("quaker-delta-qr",), ()),
    "quaker-Δ′": ("prop", ("quaker-delta1-qr", "quaker-delta1-rq"), ()),
    "quaker-Δ″": ("prop", ("quaker-delta2-qr", "quaker-delta2-rq"), ()),
    "compaspref": ("prop", (), ("composition",)),
    "jmb": ("fo", ("jmb",), ()),
    "bmj": ("fo", ("bmj",), ()),
    "jbm": ("fo", ("jbm",), ()),
    "jmbgb": ("fo", ("jmbgb",), ("garden-path",)),
    "hit-F-Δ": ("fo", ("hit-F",), ()),
    "hit-G-Δ′": ("fo", ("hit-G-sch", "hit-G-j"), ()),
    "hit-H-Δ″": ("fo", ("hit-H",), ()),
    "hit-Θ": ("fo", ("hit-theta-F", "hit-theta-G-sch", "hit-theta-G-j", "hit-theta-H"), ()),
}

_ALIASES = {
    "quaker-delta": "quaker-Δ", "quaker-delta1": "quaker-Δ′", "quaker-delta2": "quaker-Δ″",
    "quaker-delta'": "quaker-Δ′", "quaker-delta''": "quaker-Δ″",
    "hit-f": "hit-F-Δ", "hit-f-delta": "hit-F-Δ", "hit-g": "hit-G-Δ′", "hit-g-delta1": "hit-G-Δ′",
    "hit-h": "hit-H-Δ″", "hit-h-delta2": "hit-H-Δ″", "hit-theta": "hit-Θ",
}

SCENARIOS = tuple(_TABLE)
CLAIMS = ("(15)", "(20)", "(22)", "(25)", "(29)", "(30)", "(31)", "(34)", "(36)", "(38)")
PROP_CLAIMS = ("(15)", "(20)", "(22)", "(25)")


def scenario_id(name: str) -> str:
    if name in _TABLE:
        return name
    key = name.strip().lower()
    for canon in _TABLE:
        if canon.lower() == key:
            return canon
    try:
        return _ALIASES[key]
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


@lru_cache(maxsize=None)
def _cached_model(path: str) -> InformationModel:
    return load_model(path)


@dataclass
class Check:
    """A non-entailment claim checked directly against a shipped model."""

    claim: str
    description: str
    run: Callable[[], bool]


@dataclass
class Scenario:
    name: str
    kind: str
    queries: list[QuerySpec]
    checks: list[Check] = field(default_factory=list)

    @property
    def family(self) -> ModelFamily | None:
        return build_family(self.queries[0]) if self.queries else None

    def __iter__(self):
        # allows ``family, queries = build_scenario(name)``
        return iter((self.family, self.queries))


def build_family(spec: QuerySpec, seed: int | None = None,
                 bounds: dict | None = None) -> ModelFamily:
    """Shipped models followed by the generated stream, filtered by background and principles."""
    top = None
    background: list[RuleSet] = []
    for rel in spec.background:
        background += load_rules(spec.resolve(rel), spec.constants, top)
    shipped = [_cached_model(str(spec.resolve(rel))) for rel in spec.models]
    gen = dict(spec.generate or {})
    if bounds:
        gen.update(bounds)
    if seed is not None and gen:
        gen["seed"] = seed

    def stream() -> Iterator[InformationModel]:
        if not gen:
            return iter(shipped)
        key = (tuple(str(spec.resolve(r)) for r in spec.background), tuple(spec.principles),
               tuple(sorted(gen.items())))
        return chain(shipped, _generated(key, tuple(background)))

    return ModelFamily(stream if gen else shipped, background, spec.principles, name=spec.name)


_GENERATED: dict[tuple, tuple[InformationModel, ...]] = {}


def _generated(key, background: tuple[RuleSet, ...]) -> tuple[InformationModel, ...]:
    # key identifies background files, principles and generator settings
    if key in _GENERATED:
        return _GENERATED[key]
    principles, gen = key[1], dict(key[2])
    out = _GENERATED[key] = tuple(generate_models(
        max_atoms=int(gen.get("atoms", 3)), max_states=int(gen.get("states", 27)),
        seed=int(gen.get("seed", 0)), background=background, principles=principles,
        limit=int(gen.get("count", 100))))
    return out


@dataclass
class Outcome:
    name: str
    claim: str
    expected: bool | None
    verdict: Verdict | None
    passed: bool
    seconds: float
    note: str = ""


def run_query(spec: QuerySpec, seed: int | None = None, bounds: dict | None = None) -> Outcome:
    t = time.perf_counter()
    try:
        verdict = decide(build_family(spec, seed, bounds), spec.query)
    except EmptyFamilyError as e:
        # a vacuous family is a failed reproduction, not a pass
        return Outcome(spec.name, spec.claim, spec.expect, None, False,
                       time.perf_counter() - t, str(e))
    expected = spec.expect if spec.expect is not None else True
    return Outcome(spec.name, spec.claim, spec.expect, verdict, verdict.holds == expected,
                   time.perf_counter() - t)


def build_scenario(name: str) -> Scenario:
    canon = scenario_id(name)
    kind, queries, checks = _TABLE[canon]
    base = data_dir() / kind
    specs = [load_query(base / f"{q}.query") for q in queries]
    return Scenario(canon, kind, specs, [_CHECKS[c]() for c in checks])


# ------------------------------------------------------------ direct checks

def compaspref_model() -> InformationModel:
    return _cached_model(str(data_dir() / "prop" / "compaspref.json"))


def _composition_check() -> Check:
    def run() -> bool:
        m = compaspref_model()
        d = parse_discourse("phi1; phi2", OpType.UPDATE)
        k, result = preferential_meaning(m, 0, OpType.UPDATE, d)
        naive = naive_composition(m, OpType.UPDATE, d)
        return k == 3 and result == frozenset({4}) and {(0, 3), (0, 4)} <= naive
    return Check("(15)", "<<phi1,phi2>> from a is {e} at k=3; composing sentence meanings reaches d and e",
                 run)


def _garden_path_check() -> Check:
    def run() -> bool:
        spec = load_query(data_dir() / "fo" / "jmbgb.query")
        d = parse_discourse("x = j & y = b; Meet(x,y); Greet(u,v)", OpType.UPDATE, spec.constants)
        greet_xu = formula("Greet(x,u)", spec.constants)
        for _, m in build_family(spec).retained():
            _, states = preferential_meaning(m, "min", OpType.UPDATE, d)
            if not states:
                return False
            for s in states:
                if image(m, source_mask(m, [s]), OpType.UPDATE, greet_xu).any():
                    return False
        return True
    return Check("(31)", "Greet(x,u) has no +u outcome at any preferred state of the jmb discourse",
                 run)


_CHECKS = {"composition": _composition_check, "garden-path": _garden_path_check}


# -------------------------------------------------------------------- repro

@dataclass
class ReproRow:
    claim: str
    passed: bool
    outcomes: list[Outcome]


def repro(only: str | None = None, seed: int | None = None,
          bounds: dict | None = None) -> list[ReproRow]:
    """One row per numbered claim, PASS iff every query and check behind it passes."""
    names = SCENARIOS
    if only:
        if only in ("prop", "fo"):
            names = tuple(n for n in SCENARIOS if _TABLE[n][0] == only)
        else:
            names = (scenario_id(only),)
    outcomes: list[Outcome] = []
    for n in names:
        sc = build_scenario(n)
        for spec in sc.queries:
            outcomes.append(run_query(spec, seed, bounds))
        for c in sc.checks:
            t = time.perf_counter()
            ok = c.run()
            outcomes.append(Outcome(f"{n}:{c.description}", c.claim, True, None, ok,
                                    time.perf_counter() - t))
    rows = []
    for claim in CLAIMS:
        mine = [o for o in outcomes if o.claim == claim]
        if mine:
            rows.append(ReproRow(claim, all(o.passed for o in mine), mine))
    return rows


__all__ = [
    "CLAIMS", "Check", "Outcome", "PROP_CLAIMS", "ReproRow", "SCENARIOS", "Scenario",
    "ScenarioError", "build_family", "build_scenario", "compaspref_model", "data_dir", "repro",
    "run_query", "scenario_id",
]

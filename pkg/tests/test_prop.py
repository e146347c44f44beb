import time

import numpy as np
import pytest

from prefdyn.formula import NegLiteral, PropAtom, formula
from prefdyn.model import ModelError, RuleSet, supports, validate_preferential_model
from prefdyn.prop import (
    PropState, all_assignments, build_assignment_lattice, generate_models, inclusion_order,
    literals, prop_model, validate_prop_model,
)

from conftest import PENGUIN_ATOMS


def test_propstate_basics():
    s = PropState.of(bird=True, canfly=False)
    assert s.get("bird") is True and s.get("penguin") is None
    assert s.holds(PropAtom("bird")) and s.holds(NegLiteral("canfly"))
    assert not s.holds(PropAtom("canfly"))
    assert PropState.of(bird=True) <= s and not s <= PropState.of(bird=True)
    assert str(s) == "{bird=t,canfly=f}"


def test_assignment_count():
    assert len(all_assignments(PENGUIN_ATOMS)) == 27
    assert literals(["a"]) == [PropAtom("a"), NegLiteral("a")]


def test_single_atom_lattice():
    m = build_assignment_lattice(["b"])
    assert m.n == 3
    assert [str(s) for s in m.payloads] == ["{}", "{b=f}", "{b=t}"]
    empty = 0
    assert m.leq[empty].all() and m.leq.sum() == 5


def test_full_lattice_valid():
    m = build_assignment_lattice(PENGUIN_ATOMS, fallback="indefeasible")
    assert validate_prop_model(m) == []


def test_reversed_edge_breaks_monotonicity():
    m = build_assignment_lattice(PENGUIN_ATOMS, fallback="indefeasible")
    leq = m.leq.copy()
    empty = next(i for i, s in enumerate(m.payloads) if len(s) == 0)
    bird = next(i for i, s in enumerate(m.payloads) if s.assignment == {"bird": True})
    leq[empty, bird], leq[bird, empty] = False, True
    bad = prop_model(m.payloads, leq, PENGUIN_ATOMS, m.layers, 1)
    kinds = {f.kind for f in validate_prop_model(bad)}
    assert "monotonicity" in kinds


def test_restricted_penguin_lattice_valid(penguin):
    assert validate_prop_model(penguin) == []
    assert validate_preferential_model(penguin) == []
    assert all(s.get("bird") is True for s in penguin.payloads if s.get("penguin") is True)


def test_restriction_must_keep_empty():
    with pytest.raises(ModelError):
        build_assignment_lattice(["b"], lambda s: len(s) > 0)


def test_incoherent_minimal_content_reported():
    states = [PropState.of(b=True), PropState.of(b=True, c=False)]
    m = prop_model(states, inclusion_order(states, ["b", "c"]), ["b", "c"], {}, 1)
    assert [f.kind for f in validate_prop_model(m)] == ["minimality"]


def test_lattice_witness_supports_gamma(penguin, gamma):
    assert supports(penguin, gamma)


def test_quaker_lattice_supports_delta1():
    m = build_assignment_lattice(
        ["quaker", "republican", "pacifist"],
        layers={1: {"quaker": {"quaker": True, "pacifist": True},
                    "republican": {"republican": True, "pacifist": False}}},
        fallback="indefeasible")
    base = RuleSet("d", [formula("[p quaker]+u pacifist"), formula("[p republican]+u ~pacifist")])
    diamonds = [formula("[quaker]+u <p republican>+u true", top_atom=PropAtom("quaker")),
                formula("[republican]+u <p quaker>+u true", top_atom=PropAtom("quaker"))]
    assert supports(m, base)
    assert supports(m, RuleSet("dm", diamonds, "min"))
    # globally the diamonds fail above a normal quaker
    assert not supports(m, RuleSet("dg", diamonds))


def test_generator_small_bounds_contains_three_state_lattice():
    seen = set()
    for m in generate_models(max_atoms=1, max_states=3, seed=0, limit=40):
        seen.add(tuple(str(s) for s in m.payloads))
    assert ("{}", "{a1=f}", "{a1=t}") in seen


def test_generator_deterministic():
    a = [tuple(map(str, m.payloads)) for m in generate_models(seed=7, limit=25)]
    b = [tuple(map(str, m.payloads)) for m in generate_models(seed=7, limit=25)]
    assert a == b
    la = [{str(f): sorted(v) for f, v in m.layers[1].entries.items()}
          for m in generate_models(seed=7, limit=25)]
    lb = [{str(f): sorted(v) for f, v in m.layers[1].entries.items()}
          for m in generate_models(seed=7, limit=25)]
    assert la == lb


def test_generator_respects_background(gamma):
    rule = formula("[penguin]+u bird")
    for m in generate_models(seed=2, background=[gamma], limit=60):
        assert validate_prop_model(m) == []
        assert supports(m, RuleSet("r", [rule]))
        assert supports(m, gamma)


def test_generator_bounds():
    for m in generate_models(max_atoms=2, max_states=5, seed=4, limit=30):
        assert m.n <= 5
        assert len({lit.name for lit in m.atoms}) <= 2


def test_penguin_family_speed(gamma):
    t = time.perf_counter()
    ms = list(generate_models(seed=1, background=[gamma], principles=["Realism", "MinimalPreference"],
                              limit=500))
    assert len(ms) == 500
    assert time.perf_counter() - t < 30

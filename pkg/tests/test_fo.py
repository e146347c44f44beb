import itertools
import time

import numpy as np
import pytest

from prefdyn.fo import (
    FOState, Vocabulary, build_fo_closure, closure_size, eval_fo_atom, fo_model, growth_order,
    Layout, validate_fo_model,
)
from prefdyn.formula import (
    Const, Equality, FOAtom, OpType, Pref, Var, formula, parse_discourse, parse_formula,
)
from prefdyn.io import load_model, load_rules
from prefdyn.model import ModelError, RuleSet, supports
from prefdyn.scenarios import data_dir
from prefdyn.semantics import image, o_meaning, preferential_meaning, sequence_image

U = OpType.UPDATE
J, B = Const("j"), Const("b")
X, Y = Var("x"), Var("y")


@pytest.fixture(scope="module")
def gamma_model():
    return load_model(data_dir() / "fo" / "gamma-closure.json")


def test_eval_atoms():
    v = Vocabulary((("Meet", 2),), ("j",), ("x", "y"), 2)
    s = FOState.of({1, 2}, {"Meet": [(1, 2)]}, {"j": 1}, {"x": 1, "y": 2})
    assert eval_fo_atom(s, Equality(J, J), v)
    assert eval_fo_atom(s, FOAtom("Meet", (X, Y)), v)
    assert not eval_fo_atom(s, FOAtom("Meet", (Y, X)), v)
    t = FOState.of({1, 2}, {}, {"j": 1}, {"y": 2})
    assert eval_fo_atom(t, Equality(X, Y), v) is False
    with pytest.raises((ModelError, KeyError)):
        eval_fo_atom(s, FOAtom("Greet", (X, Y)), v)


def test_state_json_round_trip():
    s = FOState.of({1, 2}, {"Meet": [(1, 2), (2, 1)]}, {"j": 1}, {"x": 2})
    assert FOState.from_json(s.to_json()) == s
    v = Vocabulary((("Meet", 2), ("B", 1)), ("j",), ("x",), 2, ("symmetric Meet",))
    assert Vocabulary.from_json(v.to_json()) == v


def test_well_formed():
    v = Vocabulary((("Meet", 2),), ("j",), ("x",), 2)
    bad = FOState.of({1}, {"Meet": [(1, 2)]}, {"j": 3}, {})
    assert len(bad.well_formed(v)) == 2


def _brute_closure(k_max, with_b=True):
    out = []
    for k in range(k_max + 1):
        dom = range(1, k + 1)
        for bset in itertools.chain.from_iterable(
                itertools.combinations(dom, r) for r in range(k + 1)):
            for x in [None, *dom]:
                out.append((k, frozenset(bset), x))
    return out


def test_tiny_closure_matches_enumeration():
    v = Vocabulary((("B", 1),), (), ("x",), 1)
    m = build_fo_closure(v)
    assert m.n == len(_brute_closure(1)) == 5
    assert validate_fo_model(m) == []


def test_degenerate_vocab():
    m = build_fo_closure(Vocabulary((), (), (), 0))
    assert m.n == 1 and validate_fo_model(m) == []


def test_single_empty_state_valid():
    v = Vocabulary((("Meet", 2),), (), ("x",), 2)
    m = fo_model([FOState.of()], v)
    assert validate_fo_model(m) == []


def test_dropped_tuple_is_growth_violation():
    v = Vocabulary((("Meet", 2),), (), (), 2)
    s0 = FOState.of()
    s1 = FOState.of({1, 2}, {"Meet": [(1, 2)]})
    s2 = FOState.of({1, 2})
    leq = np.eye(3, dtype=bool)
    leq[0, 1] = leq[0, 2] = leq[1, 2] = True
    m = fo_model([s0, s1, s2], v, leq)
    assert "growth" in {f.kind for f in validate_fo_model(m)}


def test_fresh_variable_freedom_violation():
    v = Vocabulary((), (), ("x",), 2)
    states = [FOState.of(), FOState.of({1, 2}), FOState.of({1, 2}, vars={"x": 1})]
    m = fo_model(states, v)
    kinds = {f.kind for f in validate_fo_model(m)}
    assert "fresh" in kinds or any("fresh" in k for k in kinds)


def test_ceiling():
    v = Vocabulary((("R", 2), ("S", 2)), ("a", "b"), ("x", "y", "z"), 3)
    with pytest.raises(ModelError, match=str(closure_size(v))):
        build_fo_closure(v, ceiling=1000)


def test_growth_order_is_bit_inclusion():
    codes = np.array([0b000, 0b001, 0b011, 0b010], dtype=np.uint64)
    leq = growth_order(codes, chunk=2)
    want = np.array([[(int(a) & ~int(b)) == 0 for b in codes] for a in codes])
    assert np.array_equal(leq, want)


# ---------------------------------------------------------- jmb closure

def test_gamma_model_valid_and_supports(gamma_model):
    t = time.perf_counter()
    assert validate_fo_model(gamma_model) == []
    rules = load_rules(data_dir() / "fo" / "gamma.rules", ("j", "b"))
    assert all(supports(gamma_model, r) for r in rules)
    assert time.perf_counter() - t < 30


def test_meet_symmetric_greet_irreflexive(gamma_model):
    for s in gamma_model.payloads:
        meet = s.pred("Meet")
        assert all((b, a) in meet for a, b in meet)
        assert all(a != b for a, b in s.pred("Greet"))


def test_parallelism_from_min(gamma_model):
    m = gamma_model
    d = [formula("p Meet(x,y)"), formula("p Greet(u,v)")]
    out = sequence_image(m, m.min_mask(), U, d)
    assert out.any()
    for s in np.flatnonzero(out):
        st = m.payloads[s]
        assert st.value(Var("u")) == st.value(X) and st.value(Var("v")) == st.value(Y)


def test_renaming_symmetry(gamma_model):
    m = gamma_model
    index = {s: i for i, s in enumerate(m.payloads)}

    def swap(s):
        vars_ = dict(s.vars)
        x, y = vars_.pop("x", None), vars_.pop("y", None)
        if y is not None:
            vars_["x"] = y
        if x is not None:
            vars_["y"] = x
        return FOState(s.domain, s.preds, s.consts, tuple(sorted(vars_.items())))

    perm = np.array([index[swap(s)] for s in m.payloads])
    assert np.array_equal(m.leq[np.ix_(perm, perm)], m.leq)
    fresh = ~(m.meta["var_defined"]["x"] | m.meta["var_defined"]["y"])
    for f in [parse_formula("p Greet(u,v)", ("j", "b")), parse_formula("p Meet(u,j)", ("j", "b"))]:
        from prefdyn.semantics import static_mask
        mask = static_mask(m, f)
        assert np.array_equal(mask[perm] & fresh, mask & fresh)


def test_jmb_bindings(gamma_model):
    m = gamma_model
    c = ("j", "b")
    for text, u, v in [("x = j & y = b; Meet(x,y); Greet(u,v)", 1, 2),
                       ("x = b & y = j; Meet(x,y); Greet(u,v)", 2, 1)]:
        t = time.perf_counter()
        k, out = preferential_meaning(m, "min", U, parse_discourse(text, U, c))
        assert time.perf_counter() - t < 30
        assert out
        assert {(m.payloads[s].value(Var("u")), m.payloads[s].value(Var("v"))) for s in out} == {(u, v)}


def test_garden_path_fact(gamma_model):
    m = gamma_model
    c = ("j", "b")
    _, out = preferential_meaning(m, "min", U,
                                  parse_discourse("x = j & y = b; Meet(x,y); Greet(u,v)", U, c))
    g = formula("Greet(x,u)", c)
    for s in out:
        assert o_meaning(m, s, U, g) == frozenset()

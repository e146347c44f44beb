import numpy as np
import pytest

from prefdyn.entailment import (
    EmptyFamilyError, ModelFamily, Query, Verdict, decide, dynamically_entails,
    find_countermodel, preferentially_entails, reverify, statically_entails,
)
from prefdyn.formula import (
    And, Discourse, NegLiteral, OpType, PropAtom, boxed, formula, parse_discourse,
)
from prefdyn.io import load_model, load_rules
from prefdyn.model import RuleSet
from prefdyn.prop import generate_models
from prefdyn.scenarios import data_dir

U = OpType.UPDATE
QUAKER = ["quaker", "republican", "pacifist"]


def disc(text, op=U):
    return parse_discourse(text, op)


@pytest.fixture(scope="module")
def fam(penguin, gamma):
    return ModelFamily([penguin], [gamma], ["Realism", "MinimalPreference"])


def test_static_reflexive_and_conjunction(fam):
    assert statically_entails(fam, disc("bird"), PropAtom("bird")).holds
    assert statically_entails(fam, disc("bird; canfly"),
                              And(PropAtom("bird"), PropAtom("canfly"))).holds
    v = statically_entails(fam, disc("bird"), PropAtom("canfly"))
    assert not v.holds and v.witness is not None


def test_static_pref_bird(fam):
    assert statically_entails(fam, Discourse((formula("p bird"),), U), formula("[bird]+ bird")).holds


def test_dynamic_trivial(fam):
    assert dynamically_entails(fam, OpType.EXTEND, disc("canfly"), PropAtom("canfly")).holds


def test_penguins_are_birds(fam):
    assert dynamically_entails(fam, U, disc("penguin"), PropAtom("bird"), minimal=True).holds


def test_penguin_preferential(fam):
    assert preferentially_entails(fam, U, disc("bird"), PropAtom("canfly"), minimal=True).holds
    assert preferentially_entails(fam, U, disc("bird; penguin"), NegLiteral("canfly"),
                                  minimal=True).holds
    v = preferentially_entails(fam, U, disc("bird; penguin"), PropAtom("canfly"), minimal=True)
    assert not v.holds and v.witness.priority == 1


def test_empty_family_is_error(penguin):
    impossible = RuleSet("no", [formula("_|_")])
    with pytest.raises(EmptyFamilyError):
        decide(ModelFamily([penguin], [impossible]), Query("static", disc("bird"), PropAtom("bird")))


def test_failing_verdict_needs_witness():
    with pytest.raises(ValueError):
        Verdict(False, "static", None)


def test_boxed_equivalence_on_witness(penguin):
    fam = ModelFamily([penguin])
    for op in OpType:
        for text, concl in [("bird", "canfly"), ("bird; penguin", "~canfly"), ("penguin", "bird")]:
            d = disc(text, op)
            c = formula(concl)
            dyn = dynamically_entails(fam, op, d, c).holds
            st = statically_entails(fam, Discourse((formula("true", top_atom=PropAtom("bird")),), op),
                                    boxed(d, c)).holds
            assert dyn == st


def test_quaker_delta_countermodel():
    base = data_dir() / "prop"
    m = load_model(base / "quaker-delta.json")
    rules = load_rules(base / "quaker-delta.rules")
    fam = ModelFamily([m], rules, ["Realism", "MinimalPreference"])
    q = Query("minimal-preferential", disc("quaker; republican"), PropAtom("pacifist"))
    v = decide(fam, q)
    assert not v.holds and reverify(v.witness, q)
    # the model blocks normal quakers above republicans
    from prefdyn.semantics import eval_static
    (root,) = np.flatnonzero(m.min_mask())
    assert root in eval_static(m, formula("[republican]+u [p quaker]+u _|_"))


def test_find_countermodel_generated_quaker():
    base = data_dir() / "prop"
    rules = load_rules(base / "quaker-delta.rules")
    principles = ["Realism", "MinimalPreference"]
    fam = ModelFamily(lambda: generate_models(seed=3, background=rules, principles=principles,
                                              limit=200), rules, principles)
    q = Query("minimal-preferential", disc("quaker; republican"), PropAtom("pacifist"))
    w = find_countermodel(fam, q)
    assert w is not None and reverify(w, q)
    # a valid conclusion has no countermodel within bounds
    assert find_countermodel(ModelFamily(list(generate_models(seed=3, limit=30, atoms=QUAKER))),
                             Query("minimal-dynamic", disc("quaker"), PropAtom("quaker"))) is None


def test_family_monotonicity(penguin, gamma):
    ms = list(generate_models(seed=5, background=[gamma], principles=["Realism", "MinimalPreference"], limit=40))
    q = Query("minimal-preferential", disc("bird; penguin"), NegLiteral("canfly"))
    assert decide(ModelFamily(ms, [gamma]), q).holds
    for part in (ms[:1], ms[:10], ms[::3]):
        assert decide(ModelFamily(part, [gamma]), q).holds


def test_collapsed_layers_degenerate(penguin):
    from prefdyn.model import collapsed_layers
    c = ModelFamily([collapsed_layers(penguin)])
    for text, concl in [("bird", "canfly"), ("bird; penguin", "~canfly"), ("penguin", "bird")]:
        for minimal in (False, True):
            a = preferentially_entails(c, U, disc(text), formula(concl), minimal).holds
            b = dynamically_entails(c, U, disc(text), formula(concl), minimal).holds
            assert a == b


def test_winners_have_digits(fam):
    v = preferentially_entails(fam, U, disc("bird; penguin"), NegLiteral("canfly"), minimal=True)
    assert v.winners == [(0, "min", 1, "01")]

import pytest
from hypothesis import given, settings, strategies as st

from prefdyn.formula import (
    And, Bottom, Box, Const, Diamond, Discourse, Equality, FOAtom, Forall, FormulaError, Not,
    OpType, Or, Pref, PropAtom, NegLiteral, Term, Top, Var, boxed, desugar, formula,
    is_static, max_class_index, parse_discourse, parse_formula, substitute, subformulas, to_text,
    variables_of, constants_of,
)


def test_atom():
    assert parse_formula("bird") == PropAtom("bird")


def test_penguin_rule():
    f = parse_formula("[p penguin]+u ~canfly")
    assert f == Box(Pref(1, PropAtom("penguin")), OpType.UPDATE, NegLiteral("canfly"))


def test_nested_hit_rule():
    f = parse_formula("[p1 Hit(x,y)]+u [p1 Injured(v)]+u v = x")
    assert isinstance(f, Box) and f.program == Pref(1, FOAtom("Hit", (Var("x"), Var("y"))))
    inner = f.body
    assert isinstance(inner, Box) and inner.program == Pref(1, FOAtom("Injured", (Var("v"),)))
    assert inner.body == Equality(Var("v"), Var("x"))


def test_operation_suffixes():
    for text, op in [("+", OpType.EXTEND), ("-", OpType.REDUCE), ("+u", OpType.UPDATE),
                     ("-u", OpType.DOWNDATE)]:
        assert parse_formula(f"<bird>{text} canfly").op is op


def test_precedence_and_binds_tighter():
    f = parse_formula("a1 & a2 v a3")
    assert f == Or(And(PropAtom("a1"), PropAtom("a2")), PropAtom("a3"))


def test_bare_p_is_class_one_and_pn():
    assert parse_formula("p bird") == Pref(1, PropAtom("bird"))
    assert parse_formula("p2 bird") == Pref(2, PropAtom("bird"))
    # without an operand p is an ordinary atom
    assert parse_formula("p") == PropAtom("p")


def test_constants_and_variables():
    f = parse_formula("Meet(x, john)")
    assert f.terms == (Var("x"), Const("john"))
    g = parse_formula("Meet(x, j)", constants=["j"])
    assert g.terms == (Var("x"), Const("j"))
    assert variables_of(g) == {"x"} and constants_of(g) == {"j"}


@pytest.mark.parametrize("text", ["p0 bird", "[bird canfly", "bird &", "Meet(x", "bird $"])
def test_syntax_errors_have_positions(text):
    with pytest.raises(FormulaError) as e:
        parse_formula(text)
    assert e.value.position is not None


def test_p0_reserved():
    with pytest.raises(FormulaError, match="indefeasible"):
        parse_formula("p0 bird")


def test_pref_nesting_rejected_at_parse_time():
    with pytest.raises(FormulaError):
        parse_formula("p (p bird)")
    with pytest.raises(FormulaError):
        parse_formula("p [bird]+ canfly")


def test_desugar_fo_negation():
    assert formula("~Greet(x,x)") == Box(FOAtom("Greet", (Var("x"), Var("x"))), OpType.EXTEND, Bottom())


def test_desugar_top_default_and_hint():
    assert formula("true") == Box(PropAtom("p"), OpType.EXTEND, PropAtom("p"))
    assert formula("true", top_atom=PropAtom("bird")) == Box(PropAtom("bird"), OpType.EXTEND,
                                                            PropAtom("bird"))


def test_desugar_forall():
    f = parse_formula("forall z . Bird(z)")
    assert isinstance(f, Forall)
    assert desugar(f) == Box(Equality(Var("z"), Var("z")), OpType.EXTEND, FOAtom("Bird", (Var("z"),)))
    with pytest.raises(FormulaError, match="fresh"):
        desugar(f, used_vars=["z"])


def test_prop_negation_is_primitive():
    assert parse_formula("~canfly") == NegLiteral("canfly")
    assert isinstance(parse_formula("~Meet(x,y)"), Not)


def test_discourse_split_and_boxed():
    d = parse_discourse("bird; penguin")
    assert d.op is OpType.UPDATE and len(d) == 2
    b = boxed(d, NegLiteral("canfly"))
    assert b == Box(PropAtom("bird"), OpType.UPDATE,
                    Box(PropAtom("penguin"), OpType.UPDATE, NegLiteral("canfly")))
    with pytest.raises((ValueError, FormulaError)):
        Discourse((), OpType.UPDATE)


def test_helpers():
    f = parse_formula("[p2 Hit(x,y)]+u [Injured(v)]+u v = y")
    assert max_class_index(f) == 2
    assert not is_static(f)
    assert is_static(parse_formula("Hit(x,y) & x = y v _|_"))
    g = substitute(parse_formula("Hit(x,y)"), Var("y"), Var("x"))
    assert g == FOAtom("Hit", (Var("x"), Var("x")))
    assert PropAtom("bird") in set(subformulas(parse_formula("[bird]+ canfly")))


# ------------------------------------------------------------- round trip

_PROP = st.sampled_from([PropAtom("bird"), PropAtom("penguin"), NegLiteral("canfly"),
                         NegLiteral("bird")])
_TERMS = st.sampled_from([Var("x"), Var("y"), Const("j"), Const("bob")])
_FO = st.one_of(
    st.builds(lambda a, b: FOAtom("Meet", (a, b)), _TERMS, _TERMS),
    st.builds(lambda a: FOAtom("Injured", (a,)), _TERMS),
    st.builds(Equality, _TERMS, _TERMS),
)


def _static(atoms):
    return st.recursive(
        st.one_of(atoms, st.just(Bottom())),
        lambda inner: st.one_of(st.builds(And, inner, inner), st.builds(Or, inner, inner)),
        max_leaves=6,
    )


def _dynamic(atoms):
    static = _static(atoms)
    prog = st.one_of(static, st.builds(Pref, st.integers(1, 3), static))
    return st.recursive(
        prog,
        lambda inner: st.one_of(
            st.builds(And, inner, inner), st.builds(Or, inner, inner),
            st.builds(Box, inner, st.sampled_from(list(OpType)), inner),
            st.builds(Diamond, inner, st.sampled_from(list(OpType)), inner),
        ),
        max_leaves=8,
    )


@settings(max_examples=300, deadline=None)
@given(_dynamic(_PROP))
def test_round_trip_prop(f):
    assert parse_formula(to_text(f)) == f


@settings(max_examples=300, deadline=None)
@given(_dynamic(_FO))
def test_round_trip_fo(f):
    assert parse_formula(to_text(f), constants=["j", "bob"]) == f


@settings(max_examples=100, deadline=None)
@given(_dynamic(_FO))
def test_desugared_has_no_surface_forms(f):
    g = desugar(Box(f, OpType.EXTEND, Not(Top())))
    assert not any(isinstance(h, (Not, Top, Forall)) for h in subformulas(g))

import json

import pytest

from prefdyn.cli import main
from prefdyn.io import (
    FileFormatError, load_model, model_from_json, parse_bounds, parse_query, parse_rule_sets,
    parse_rules, save_prop_model,
)
from prefdyn.model import validate_preferential_model
from prefdyn.prop import validate_prop_model
from prefdyn.scenarios import data_dir

PROP = data_dir() / "prop"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ------------------------------------------------------------------ parsing

def test_rule_scopes():
    sets = parse_rule_sets("name: d\n[p a]+u b\nscope: min\n[a]+u <p c>+u true  # comment\n",
                           top_atom=None)
    assert [(r.name, r.scope, len(r.formulas)) for r in sets] == [("d", "all", 1), ("d@min", "min", 1)]
    with pytest.raises(FileFormatError):
        parse_rules("a\nscope: min\nb\n")
    with pytest.raises(FileFormatError, match=":2:"):
        parse_rules("a\n[p a +u b\n")
    with pytest.raises(FileFormatError, match="scope"):
        parse_rules("scope: most\n")


def test_query_parse():
    q = parse_query("mode: minimal-preferential\ndiscourse: a; b\nconclude: c\nexpect: fails\n"
                    "generate: count=5, seed=2\nprinciples: Realism, p2\n")
    assert q.expect is False and q.generate == {"count": 5, "seed": 2}
    assert q.principles == ["Realism", "p2"] and len(q.query.discourse) == 2


@pytest.mark.parametrize("text,needle", [
    ("discourse: a\nconclude: b\n", "mode"),
    ("mode: weird\ndiscourse: a\nconclude: b\n", "mode"),
    ("mode: static\ndiscourse: a\nconclude: b\nfoo: 1\n", "foo"),
    ("mode: static\ndiscourse: a &\nconclude: b\n", "query"),
    ("mode: static\ndiscourse: a\nconclude: b\nexpect: maybe\n", "expect"),
    ("mode: static\nno colon here\n", "key"),
])
def test_query_errors(text, needle):
    with pytest.raises(FileFormatError, match=needle):
        parse_query(text)


def test_bounds():
    assert parse_bounds("atoms=3, states=27,mode=x") == {"atoms": 3, "states": 27, "mode": "x"}
    with pytest.raises(FileFormatError):
        parse_bounds("atoms")


def test_prop_save_load_round_trip(tmp_path):
    m = load_model(PROP / "penguin.json")
    save_prop_model(m, tmp_path / "w.json")
    back = load_model(tmp_path / "w.json")
    assert back.n == m.n and (back.leq == m.leq).all()
    assert validate_prop_model(back) == [] and validate_preferential_model(back) == []
    for i, layer in m.layers.items():
        assert {str(f): set(v) for f, v in back.layers[i].entries.items()} == \
            {str(f): set(v) for f, v in layer.entries.items()}


def test_unknown_kind():
    with pytest.raises(FileFormatError):
        model_from_json({"kind": "modal"})


# ---------------------------------------------------------------------- CLI

def bad_order_file(tmp_path):
    # chain {} <= {a=t} <= {a=t,b=t} with the transitive edge missing
    data = {"kind": "prop", "atoms": ["a", "b"], "close_order": False,
            "states": [{}, {"a": True}, {"a": True, "b": True}],
            "order_edges": [[0, 1], [1, 2]], "layers": {}}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(data))
    return p


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", str(PROP / "penguin.json"), str(data_dir() / "fo" / "hit-F.json"))
    assert code == 0 and out.count(" ok") == 2


def test_validate_reports_transitivity(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", str(bad_order_file(tmp_path)))
    assert code == 1 and "transitiv" in out


def test_missing_file_is_input_error(capsys, tmp_path):
    assert run(capsys, "validate", str(tmp_path / "nope.json"))[0] == 2
    assert run(capsys, "entail", str(tmp_path / "nope.query"))[0] == 2
    assert run(capsys, "entail", "no-such-scenario")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_entail_expected_failure_prints_witness(capsys):
    code, out, _ = run(capsys, "entail", "quaker-delta")
    assert code == 0 and "fails" in out.lower()


def test_entail_penguin(capsys):
    code, out, _ = run(capsys, "entail", "penguin")
    assert code == 0 and "holds" in out.lower()


def test_entail_json_digits(capsys):
    code, out, _ = run(capsys, "entail", "hit-H", "--json")
    data = json.loads(out)
    assert code == 0 and data["matches"] is True
    assert {w["digits"] for w in data["winners"]} == {"212"}


def test_entail_mismatch_is_exit_1(capsys, tmp_path):
    q = tmp_path / "wrong.query"
    q.write_text(f"mode: minimal-preferential\ndiscourse: bird\nconclude: ~canfly\n"
                 f"models: {PROP / 'penguin.json'}\nexpect: holds\n")
    assert run(capsys, "entail", str(q))[0] == 1


def test_empty_family_exit_3(capsys, tmp_path):
    (tmp_path / "never.rules").write_text("_|_\n")
    q = tmp_path / "empty.query"
    q.write_text(f"mode: static\ndiscourse: bird\nconclude: bird\n"
                 f"models: {PROP / 'penguin.json'}\nbackground: never.rules\n")
    code, _, err = run(capsys, "entail", str(q))
    assert code == 3 and err


def test_witness_replay(capsys, tmp_path):
    w = tmp_path / "w.json"
    code, _, _ = run(capsys, "entail", str(PROP / "quaker-delta-qr.query"), "--save-witness", str(w))
    assert code == 0 and w.exists()
    code, out, _ = run(capsys, "entail", str(PROP / "quaker-delta-qr.query"), "--model", str(w), "--json")
    assert code == 0 and json.loads(out)["holds"] is False
    assert run(capsys, "validate", str(w))[0] == 0


def test_repro_prop(capsys):
    code, out, _ = run(capsys, "repro", "--only", "prop")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 4
    assert all("PASS" in line for line in lines)
    code, out, _ = run(capsys, "repro", "--only", "compaspref", "--json")
    assert code == 0 and json.loads(out)[0]["pass"] is True


def test_repro_unknown_scenario(capsys):
    assert run(capsys, "repro", "--only", "nothing")[0] == 2

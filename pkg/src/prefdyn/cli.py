"""Command line front end.

Exit codes: 0 success or expected verdict, 1 findings / mismatch / FAIL,
2 malformed input or IO error, 3 empty model family.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .entailment import EmptyFamilyError, Verdict
from .formula import FormulaError
from .io import FileFormatError, QuerySpec, load_model, load_query, parse_bounds, save_prop_model
from .model import Finding, ModelError, validate_preferential_model, validate_preorder

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_EMPTY = 0, 1, 2, 3


def _validate_one(path: str) -> list[Finding]:
    m = load_model(path)
    if m.kind == "prop":
        from .prop import validate_prop_model
        out = validate_prop_model(m)
    elif m.kind == "fo":
        from .fo import validate_fo_model
        out = validate_fo_model(m)
    else:
        out = validate_preorder(m)
    return out + validate_preferential_model(m)


def cmd_validate(args) -> int:
    status = EXIT_OK
    report: list[dict[str, str]] = []
    for path in args.paths:
        try:
            findings = _validate_one(path)
        except (OSError, FileFormatError, ModelError, FormulaError) as e:
            print(f"{path}: error: {e}", file=sys.stderr)
            return EXIT_INPUT
        for f in findings:
            report.append({"file": path, "kind": f.kind, "location": f.location, "detail": f.detail})
            if not args.json:
                print(f"{path} {f.kind} {f.location} {f.detail}")
        if findings:
            status = EXIT_FAIL
        elif not args.json:
            print(f"{path} ok")
    if args.json:
        print(json.dumps({"valid": status == EXIT_OK, "findings": report}, indent=1))
    return status


def _verdict_json(spec: QuerySpec, v: Verdict, passed: bool) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": spec.name, "mode": v.mode, "op": None if v.op is None else v.op.value,
        "holds": v.holds, "expected": spec.expect, "matches": passed,
        "checked_models": v.checked_models,
        "winners": [{"model": i, "source": str(src), "k": k, "digits": dg}
                    for i, src, k, dg in v.winners],
    }
    w = v.witness
    if w is not None:
        m = w.model
        out["witness"] = {
            "model": w.model_index, "model_file": m.meta.get("path"),
            "source": w.source if isinstance(w.source, str) else m.describe(w.source),
            "priority": w.priority,
            "realized": [m.describe(s) for s in sorted(w.realized)],
            "offending": [m.describe(s) for s in sorted(w.offending)],
        }
    return out


def _print_verdict(spec: QuerySpec, v: Verdict, passed: bool, limit: int = 10) -> None:
    word = "holds" if v.holds else "does not hold"
    exp = "" if spec.expect is None else f" (expected {'holds' if spec.expect else 'fails'})"
    print(f"{spec.name}: {word}{exp} over {v.checked_models} model(s) -> "
          f"{'OK' if passed else 'MISMATCH'}")
    for i, src, k, dg in v.winners[:limit]:
        print(f"  model #{i} source {src}: k={k} digits {dg}")
    if len(v.winners) > limit:
        print(f"  ... {len(v.winners) - limit} more sources")
    if v.witness is not None:
        w = v.witness
        m = w.model
        where = m.meta.get("path") or "generated"
        print(f"  witness: {w.describe()} [{where}]")


def _specs_for(target: str) -> list[QuerySpec]:
    if Path(target).exists():
        return [load_query(target)]
    from .scenarios import ScenarioError, build_scenario
    try:
        return build_scenario(target).queries
    except ScenarioError:
        raise FileFormatError(f"{target}: no such query file or scenario") from None


def cmd_entail(args) -> int:
    from .scenarios import build_family
    try:
        bounds = parse_bounds(args.bounds) if args.bounds else None
        specs = _specs_for(args.query)
        if args.model:
            for spec in specs:
                spec.models = [str(Path(p).resolve()) for p in args.model]
                spec.generate = None
    except (OSError, FileFormatError, FormulaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    from .entailment import decide
    status = EXIT_OK
    results = []
    for spec in specs:
        try:
            fam = build_family(spec, args.seed, bounds)
            v = decide(fam, spec.query)
        except EmptyFamilyError as e:
            print(f"{spec.name}: {e}", file=sys.stderr)
            return EXIT_EMPTY
        except (OSError, FileFormatError, ModelError, FormulaError) as e:
            print(f"{spec.name}: error: {e}", file=sys.stderr)
            return EXIT_INPUT
        expected = spec.expect if spec.expect is not None else True
        passed = v.holds == expected
        if not passed:
            status = EXIT_FAIL
        if args.save_witness and v.witness is not None and v.witness.model.kind == "prop":
            save_prop_model(v.witness.model, args.save_witness)
        if args.json:
            results.append(_verdict_json(spec, v, passed))
        else:
            _print_verdict(spec, v, passed)
    if args.json:
        print(json.dumps(results if len(results) != 1 else results[0], indent=1))
    return status


def cmd_repro(args) -> int:
    from .scenarios import ScenarioError, repro
    try:
        bounds = parse_bounds(args.bounds) if args.bounds else None
        rows = repro(args.only, args.seed, bounds)
    except (ScenarioError, FileFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        print(json.dumps([{"claim": r.claim, "pass": r.passed,
                           "queries": [{"name": o.name, "pass": o.passed,
                                        "seconds": round(o.seconds, 3)} for o in r.outcomes]}
                          for r in rows], indent=1))
    else:
        for r in rows:
            names = ", ".join(o.name.split(":")[0] for o in r.outcomes)
            secs = sum(o.seconds for o in r.outcomes)
            print(f"{r.claim:6} {'PASS' if r.passed else 'FAIL'}  {secs:6.2f}s  {names}")
    return EXIT_OK if rows and all(r.passed for r in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prefdyn", description="Preferential dynamic logic workbench")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--seed", type=int, default=None, help="generator seed")
    gen.add_argument("--bounds", default=None, help="generator bounds, e.g. atoms=3,states=27")

    v = sub.add_parser("validate", parents=[common], help="validate model files")
    v.add_argument("paths", nargs="+")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("entail", parents=[common, gen], help="decide a query file or scenario")
    e.add_argument("query", help="query file or scenario name")
    e.add_argument("--model", action="append", help="replace the family by these model files")
    e.add_argument("--save-witness", default=None, help="write a propositional witness model here")
    e.set_defaults(func=cmd_entail)

    r = sub.add_parser("repro", parents=[common, gen], help="run every shipped claim")
    r.add_argument("--only", default=None, help="'prop', 'fo' or a scenario name")
    r.set_defaults(func=cmd_repro)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands wrap the library one-to-one: parse/eval for the file formats,
reduce for the two past eliminations, fuzz for the differential tester,
sat for the bounded model search, size for the reduction size comparison,
and vectors for the expressiveness word families.

Exit codes are stable: 0 ok/sat/holds, 1 unsat/violated/distinguished,
2 usage or parse error, 3 internal invariant failure.  User input never
produces a traceback.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path
from typing import Optional

from mtlkit import harness, semantics
from mtlkit.core import (
    InternalError,
    MtlError,
    TimedWord,
    classify_fragment,
    is_future_only,
    is_mitl,
    modal_count,
    node_count,
    propositions_of,
)
from mtlkit.elim_os import OS_CONJUNCTS, reduce_os
from mtlkit.elim_sp import SP_CONJUNCTS, reduce_sp
from mtlkit.syntax import (
    format_formula,
    format_timed_word,
    parse_formula,
    parse_timed_word,
)

OK, DISTINGUISHED, USAGE, INTERNAL = 0, 1, 2, 3

_METHODS = {"simple": reduce_sp, "oversample": reduce_os}
_EXPECTED_VECTORS = {"i": (True, False), "ii": (False, True), "iii": (True, False)}


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise MtlError(f"cannot read {path}: {exc.strerror}") from exc


def _formula_at(path: str):
    return parse_formula(_read(path))


def _word_at(path: str) -> TimedWord:
    return parse_timed_word(_read(path))


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines:
            print(line)


def cmd_parse(args) -> int:
    if args.path.endswith(".tw"):
        word = _word_at(args.path)
        payload = {
            "kind": "word",
            "length": len(word),
            "span": str(word.times[-1] - word.times[0]),
            "strict": word.strict,
            "alphabet": sorted(word.propositions()),
        }
        lines = [
            f"timed word: {len(word)} points over {sorted(word.propositions())}",
            f"span {payload['span']}, strict: {word.strict}",
        ]
    else:
        phi = _formula_at(args.path)
        payload = {
            "kind": "formula",
            "fragment": classify_fragment(phi),
            "alphabet": sorted(propositions_of(phi)),
            "nodes": node_count(phi),
            "modal": modal_count(phi),
            "future_only": is_future_only(phi),
            "mitl": is_mitl(phi),
        }
        lines = [
            f"formula over {payload['alphabet']}: fragment {payload['fragment']}",
            f"{payload['nodes']} nodes, {payload['modal']} modal operators,"
            f" future-only: {payload['future_only']}, MITL: {payload['mitl']}",
        ]
    _emit(args, payload, lines)
    return OK


def cmd_eval(args) -> int:
    phi = _formula_at(args.formula)
    word = _word_at(args.word)
    value = semantics.eval(word, args.pos, phi)
    _emit(args, {"holds": value, "pos": args.pos}, ["true" if value else "false"])
    return OK if value else DISTINGUISHED


def cmd_reduce(args) -> int:
    phi = _formula_at(args.formula)
    res = _METHODS[args.method](phi)
    text = format_formula(res.formula)
    manifest = [
        {"name": p.name, "role": p.role, "owner": p.owner} for p in res.fresh
    ]
    if args.out:
        Path(args.out).write_text(text + "\n")
        Path(args.out + ".manifest").write_text(
            "".join(f"{p.name}\t{p.role}\t{p.owner}\n" for p in res.fresh)
        )
    payload = {
        "method": args.method,
        "formula": text,
        "fragment": classify_fragment(res.formula),
        "future_only": is_future_only(res.formula),
        "fresh": manifest,
    }
    lines = [text, ""]
    lines += [f"{p.name}\t{p.role}\t{p.owner}".rstrip() for p in res.fresh]
    _emit(args, payload, lines)
    return OK


def cmd_fuzz(args) -> int:
    phi = _formula_at(args.formula)
    kind = "simple" if args.method == "simple" else "oversampled"
    report = harness.fuzz_equisat(
        phi, kind, args.trials, seed=args.seed, drop=frozenset(args.drop)
    )
    if args.records:
        Path(args.records).write_text(
            "".join(f"{t}\t{fam}\t{outcome}\n" for t, fam, outcome in report.rows)
        )
    payload = asdict(report)
    payload["method"] = args.method
    _emit(args, payload, report.summary_lines())
    return OK if not report.failures else DISTINGUISHED


def cmd_sat(args) -> int:
    phi = _formula_at(args.formula)
    model = semantics.bounded_sat(
        phi,
        max_len=args.max_len,
        grid=Fraction(args.grid),
        horizon=Fraction(args.horizon),
    )
    if model is None:
        _emit(args, {"sat": False}, ["UNSAT at scale"])
        return DISTINGUISHED
    _emit(args, {"sat": True, "model": format_timed_word(model)},
          [format_timed_word(model)])
    return OK


def cmd_size(args) -> int:
    phi = _formula_at(args.formula)
    report = harness.size_report(phi)
    _emit(args, asdict(report), report.summary_lines())
    return OK


def cmd_vectors(args) -> int:
    frac: dict[str, Optional[Fraction]] = {
        key: Fraction(value) if value is not None else None
        for key, value in (
            ("delta", args.delta), ("kappa", args.kappa), ("epsilon", args.epsilon),
        )
    }
    phi, w1, w2 = harness.lemma10_vectors(
        args.case, args.n, delta=frac["delta"], kappa=frac["kappa"],
        epsilon=frac["epsilon"], i=args.i,
    )
    got = (semantics.satisfies(w1, phi), semantics.satisfies(w2, phi))
    want = _EXPECTED_VECTORS[args.case]
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"case_{args.case}.mtl").write_text(format_formula(phi) + "\n")
        (out / f"case_{args.case}_w1.tw").write_text(format_timed_word(w1) + "\n")
        (out / f"case_{args.case}_w2.tw").write_text(format_timed_word(w2) + "\n")
    payload = {
        "case": args.case,
        "formula": format_formula(phi),
        "w1": got[0],
        "w2": got[1],
        "expected": list(want),
    }
    verdict = "ok" if got == want else "MISMATCH"
    lines = [
        format_formula(phi),
        f"w1: {str(got[0]).lower()}  w2: {str(got[1]).lower()}"
        f"  expected: {str(want[0]).lower()}/{str(want[1]).lower()}  {verdict}",
    ]
    _emit(args, payload, lines)
    return OK if got == want else DISTINGUISHED


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="mtlkit",
        description="metric temporal logic toolkit over finite timed words",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="structured output")

    p = sub.add_parser("parse", help="check a .mtl or .tw file")
    p.add_argument("path")
    common(p)
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("eval", help="evaluate a formula on a timed word")
    p.add_argument("formula")
    p.add_argument("word")
    p.add_argument("--pos", type=int, default=1)
    common(p)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("reduce", help="eliminate past operators")
    p.add_argument("formula")
    p.add_argument("--method", choices=sorted(_METHODS), required=True)
    p.add_argument("--out", help="write the formula here and the fresh-prop"
                   " manifest beside it")
    common(p)
    p.set_defaults(run=cmd_reduce)

    p = sub.add_parser("fuzz", help="differential-test a reduction")
    p.add_argument("formula")
    p.add_argument("--method", choices=sorted(_METHODS), required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop", action="append", default=[],
                   choices=sorted(set(OS_CONJUNCTS) | set(SP_CONJUNCTS)),
                   help="weaken the marking by one named conjunct")
    p.add_argument("--records", help="write one line per trial outcome")
    common(p)
    p.set_defaults(run=cmd_fuzz)

    p = sub.add_parser("sat", help="bounded satisfiability search")
    p.add_argument("formula")
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--grid", default="1/2")
    p.add_argument("--horizon", default="4")
    common(p)
    p.set_defaults(run=cmd_sat)

    p = sub.add_parser("size", help="compare reduction sizes")
    p.add_argument("formula")
    common(p)
    p.set_defaults(run=cmd_size)

    p = sub.add_parser("vectors", help="expressiveness separation words")
    p.add_argument("--case", choices=sorted(_EXPECTED_VECTORS), required=True)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--delta")
    p.add_argument("--kappa")
    p.add_argument("--epsilon")
    p.add_argument("--i", type=int)
    p.add_argument("--out-dir", help="write .mtl/.tw vector files here")
    common(p)
    p.set_defaults(run=cmd_vectors)

    return top


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.run(args)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL
    except MtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

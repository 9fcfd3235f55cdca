"""Command-line front end: classify, oracle, sweep, witness."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

from . import linalg
from .classifier import Answer, Verdict, classify, trace_json
from .flags import FlagShape, ProductSpec, all_shapes, dim_product, expected_stab_dim
from .notation import ParseError, parse_product
from .oracle import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DegenerateSample,
    InvalidParameters,
    OracleReport,
    OracleVerdict,
    oracle_density,
    special_witness,
    witness_formula,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNKNOWN = 3
EXIT_SPARSE_EVIDENCE = 4
EXIT_DEGENERATE = 6
EXIT_DISAGREEMENT = 7

SEED_ENV = "FLAG_ORBIT_SEED"


def resolve_seed(flag: int | None) -> int:
    """Command-line flag, then FLAG_ORBIT_SEED, then the built-in default."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return DEFAULT_SEED


def _parse(text: str, out) -> ProductSpec | None:
    try:
        return parse_product(text)
    except ParseError as exc:
        print(f"parse error: {exc}", file=out)
        return None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def verdict_json(verdict: Verdict, text: str, report: OracleReport | None = None) -> dict:
    spec = verdict.spec
    doc = {
        "input": text,
        "normalized": str(verdict.normalized),
        "verdict": verdict.answer.value,
        "rule": verdict.rule.id if verdict.rule else None,
        "citation": verdict.rule.citation if verdict.rule else None,
        "trace": trace_json(verdict),
        "dims": {
            "n": spec.n,
            "m": spec.m,
            "dim_product": dim_product(spec),
            "expected_stab": expected_stab_dim(spec),
        },
    }
    if report is not None:
        doc["oracle"] = report.to_json()
    return doc


# -- classify ------------------------------------------------------------------------


def cmd_classify(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    text = args.expr.strip()
    as_json = args.json
    # tolerate the flag being quoted together with the expression
    if text.endswith("--json"):
        text = text[: -len("--json")].strip()
        as_json = True
    spec = _parse(text, err)
    if spec is None:
        return EXIT_PARSE
    verdict = classify(spec)
    report = None
    if args.oracle:
        report = oracle_density(spec, args.prime, args.trials, resolve_seed(args.seed))
    if as_json:
        print(_dump(verdict_json(verdict, text, report)), file=out)
    else:
        print(verdict.summary(), file=out)
        for step in verdict.steps:
            print(f"  {step.rule}: {step.before} -> {step.after}", file=out)
        if verdict.rule is not None:
            print(f"  {verdict.rule.id} on {verdict.decided_on}: {verdict.rule.citation}", file=out)
        if report is not None:
            print(f"  oracle: {report.verdict.value} (min nullity {report.min_nullity}, expected {report.expected_nullity})", file=out)
    return EXIT_OK if verdict.decisive else EXIT_UNKNOWN


# -- oracle ----------------------------------------------------------------------------


def cmd_oracle(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    spec = _parse(args.expr, err)
    if spec is None:
        return EXIT_PARSE
    try:
        report = oracle_density(spec, args.prime, args.trials, resolve_seed(args.seed))
    except DegenerateSample as exc:
        print(f"degenerate sample: {exc}", file=err)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"bad parameters: {exc}", file=err)
        return EXIT_PARSE
    print(_dump(report.to_json()), file=out)
    if report.verdict is OracleVerdict.DENSE_CERTIFIED:
        return EXIT_OK
    return EXIT_SPARSE_EVIDENCE


# -- sweep -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    spec: str
    n: int
    m: int
    dim_product: int
    expected_stab: int
    classifier_verdict: str
    rule_fired: str
    oracle_min_nullity: int | str
    oracle_verdict: str
    agree: bool


SWEEP_COLUMNS = [f.name for f in fields(SweepRow)]


def sweep_specs(max_n: int, max_m: int, self_only: bool) -> list[ProductSpec]:
    """Self-products of every shape, or all multisets of shapes with
    expected_stab >= 0 together with every trivially sparse self-product."""
    specs = set()
    for n in range(2, max_n + 1):
        shapes = all_shapes(n)
        for m in range(1, max_m + 1):
            for shape in shapes:
                specs.add(ProductSpec.power(shape, m))
            if self_only:
                continue
            for combo in itertools.combinations_with_replacement(shapes, m):
                spec = ProductSpec(n, combo)
                if expected_stab_dim(spec) >= 0:
                    specs.add(spec)
    return sorted(specs, key=str)


def _agrees(answer: Answer, oracle: OracleVerdict | None) -> bool:
    if oracle is None or answer is Answer.UNKNOWN:
        return True
    return (answer is Answer.DENSE) == (oracle is OracleVerdict.DENSE_CERTIFIED)


def sweep_row(spec: ProductSpec, with_oracle: bool, prime: int, trials: int, seed: int) -> SweepRow:
    verdict = classify(spec)
    report = oracle_density(spec, prime, trials, seed) if with_oracle else None
    return SweepRow(
        spec=str(spec),
        n=spec.n,
        m=spec.m,
        dim_product=dim_product(spec),
        expected_stab=expected_stab_dim(spec),
        classifier_verdict=verdict.answer.value,
        rule_fired=verdict.rule.id if verdict.rule else "",
        oracle_min_nullity=report.min_nullity if report else "",
        oracle_verdict=report.verdict.value if report else "",
        agree=_agrees(verdict.answer, report.verdict if report else None),
    )


def _row_task(job):
    return sweep_row(*job)


def run_sweep(specs, with_oracle, prime, trials, seed, jobs=1) -> list[SweepRow]:
    work = [(s, with_oracle, prime, trials, seed) for s in specs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row_task, work, chunksize=16))
    else:
        rows = [_row_task(w) for w in work]
    return sorted(rows, key=lambda r: r.spec)


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(astuple(row))
    return buf.getvalue()


def cmd_sweep(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if args.max_n < 2 or args.max_m < 1:
        print("bounds must be positive (max-n >= 2, max-m >= 1)", file=err)
        return EXIT_PARSE
    specs = sweep_specs(args.max_n, args.max_m, args.self_only)
    rows = run_sweep(specs, args.oracle, args.prime, args.trials, resolve_seed(args.seed), args.jobs)
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    bad = [r for r in rows if not r.agree]
    unknown = sum(r.classifier_verdict == Answer.UNKNOWN.value for r in rows)
    print(f"rows: {len(rows)}", file=err)
    print(f"unknown: {unknown} ({unknown / max(1, len(rows)):.1%})", file=err)
    print(f"disagreements: {len(bad)}", file=err)
    for r in bad:
        print(f"  {r.spec}: classifier {r.classifier_verdict} ({r.rule_fired}), oracle {r.oracle_verdict}", file=err)
    return EXIT_DISAGREEMENT if bad else EXIT_OK


# -- witness ---------------------------------------------------------------------------


def cmd_witness(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    t, n = args.t, args.n
    if t < 3 or n < 2 * t + 1:
        print(f"need t >= 3 and n >= 2t+1; got t={t}, n={n}", file=err)
        return EXIT_PARSE
    try:
        linalg.check_prime(args.prime)
    except ValueError as exc:
        print(f"bad parameters: {exc}", file=err)
        return EXIT_PARSE
    spec = ProductSpec.power(FlagShape(n, (t, n - 1)), t + 1)
    if n >= t * (t + 1):
        try:
            res = special_witness(t, n, args.prime)
        except InvalidParameters as exc:
            print(f"bad parameters: {exc}", file=err)
            return EXIT_PARSE
        doc = {
            "spec": str(spec),
            "branch": "witness",
            "t": t,
            "n": n,
            "nullity": res.nullity,
            "stabilizer_dim": res.nullity - 1,
            "formula": res.formula,
            "matches": res.matches,
        }
    else:
        report = oracle_density(spec, args.prime, args.trials, resolve_seed(args.seed))
        doc = {
            "spec": str(spec),
            "branch": "sparse",
            "t": t,
            "n": n,
            "claim": f"sparse since n < t(t+1) = {t * (t + 1)}",
            "oracle": report.to_json(),
        }
    if args.json:
        print(_dump(doc), file=out)
    elif doc["branch"] == "witness":
        status = "matched" if doc["matches"] else "MISMATCH"
        print(f"{spec}: nullity {doc['nullity']}, formula {witness_formula(t, n)} + 1, {status}", file=out)
    else:
        rep = doc["oracle"]
        print(f"{spec}: {doc['claim']}; oracle {rep['verdict']} (min nullity {rep['min_nullity']}, expected {rep['expected_nullity']})", file=out)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def _add_oracle_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prime", type=int, default=linalg.DEFAULT_PRIME, help="field size (prime, at most 2^31-1)")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="random configurations per product")
    p.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or {DEFAULT_SEED})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flag-orbit", description="Density of diagonal PGL(n) actions on products of flag varieties")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="decide density by rules and rewriting")
    p.add_argument("expr", help='product expression, e.g. "F(1,2;4)^3" or "Gr(2,4) x F(1;4)"')
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.add_argument("--oracle", action="store_true", help="attach an oracle run to the report")
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="randomized exact nullity check over F_p")
    p.add_argument("expr")
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="enumerate products and cross-check")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--max-m", type=int, required=True)
    p.add_argument("--self-only", action="store_true", help="only powers of a single shape")
    p.add_argument("--oracle", action="store_true", help="fill the oracle columns")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("witness", help="explicit configuration for F(t,n-1;n)^(t+1)")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    _add_oracle_flags(p)
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

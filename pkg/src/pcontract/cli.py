"""Command-line interface.

Exit codes: 0 success, 1 self-test failure, 2 invalid representation,
3 search window or budget exhausted, 4 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import FormatError, InvalidRep, ResourceExhausted
from .families import FAMILIES, generate
from .group import nilpotency_class
from .io import dumps, instance_to_dict, load_instance, result_to_dict
from .rep import phi_minus_id, validate
from .series import SeriesVector, parse_poly
from .solver import SolveOptions, oracle_fixed_vector, solve

EXIT_OK, EXIT_SELFTEST, EXIT_INVALID, EXIT_EXHAUSTED, EXIT_FORMAT = 0, 1, 2, 3, 4


def format_series(z: SeriesVector) -> str:
    terms = [f"{list(z.coefficient(n))}*t^{n}" for n in sorted(z.coeffs)]
    body = " + ".join(terms) if terms else "0"
    return body if z.prec is None else f"{body} + O(t^{z.prec})"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    inst = load_instance(args.file)
    report = validate(inst.rep)
    lo, hi = report.commute_range or (None, None)
    print(f"instance: {inst.name} (p={inst.rep.p}, d={inst.rep.d}, {len(inst.rep.A0.blocks)} blocks)")
    if report.commute_range is not None:
        print(f"commutation checked for r in [{lo}, {hi}]")
    if report.valid:
        print("valid")
        return EXIT_OK
    print(f"invalid: {report.reason}")
    if report.failure:
        f = report.failure
        print(f"counterexample: check={f.get('check')} r={f.get('r')} block={f.get('block')}")
    return EXIT_INVALID


def cmd_solve(args) -> int:
    inst = load_instance(args.file)
    opts = SolveOptions(precision=args.prec, oracle_window=tuple(args.window), max_len=args.budget)
    start = time.perf_counter()
    res = solve(inst.rep, opts)
    elapsed = time.perf_counter() - start
    timings = {"solve_seconds": round(elapsed, 6)} if args.timings else None
    _emit(dumps(result_to_dict(res, timings)), args.out)
    if args.out:
        print(f"xi = {format_series(res.xi)}")
        print(f"residuals {'pass' if res.ok else 'FAIL'}; oracle agrees: {res.oracle_agrees}")
    return EXIT_OK if res.ok else EXIT_EXHAUSTED


def cmd_oracle(args) -> int:
    inst = load_instance(args.file)
    L, R = args.window
    xi = oracle_fixed_vector(inst.rep, L, R)
    if xi is None:
        print("none in window")
        return EXIT_EXHAUSTED
    print(format_series(xi))
    return EXIT_OK


def cmd_nilpotency(args) -> int:
    inst = load_instance(args.file)
    if args.sweep:
        lo, hi = args.sweep
        for n in range(lo, hi + 1):
            print(nilpotency_class(inst.rep, precision=n, max_class=args.max_class).describe())
        return EXIT_OK
    rep = nilpotency_class(inst.rep, precision=args.prec, max_class=args.max_class)
    print(rep.describe())
    print(f"dimensions of gamma_2, gamma_3, ...: {rep.dims}")
    print(f"twist precision: {rep.twist_precision}")
    return EXIT_OK


def cmd_blocks(args) -> int:
    inst = load_instance(args.file)
    try:
        f = parse_poly(args.f, inst.rep.p)
    except ValueError as exc:
        raise FormatError(str(exc), "--f") from exc
    B = phi_minus_id(inst.rep, f)
    L, R = args.window
    shown = [(i, j) for (i, j) in B.support() if L <= i < R and L <= j < R]
    print(f"phi({args.f}) - I: {len(B.blocks)} nonzero blocks, {len(shown)} in window [{L}, {R})")
    for i, j in shown:
        print(f"({i}, {j}): {B.block(i, j).tolist()}")
    return EXIT_OK


def cmd_gen(args) -> int:
    inst = generate(args.family, args.p, args.d, args.seed)
    _emit(dumps(instance_to_dict(inst)), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run_acceptance

    checks = run_acceptance()
    for c in checks:
        print(c.line())
    failed = [c.number for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} criteria passed")
    return EXIT_SELFTEST if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcontract", description="Fixed vectors and nilpotency for p-power contraction groups.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check that an instance defines a representation")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="find a nonzero vector fixed by every phi(f)")
    p.add_argument("file")
    p.add_argument("--prec", type=int, default=16, help="target precision for non-exact answers")
    p.add_argument("--window", type=int, nargs=2, default=[-8, 8], metavar=("L", "R"), help="oracle degree window")
    p.add_argument("--budget", type=int, default=None, metavar="LEN", help="longest generator word to explore")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings in the result")
    p.add_argument("--out", help="write the result file here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force fixed vector with support in a window")
    p.add_argument("file")
    p.add_argument("--window", type=int, nargs=2, default=[-8, 8], metavar=("L", "R"))
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("nilpotency", help="nilpotency class of the semidirect product at finite precision")
    p.add_argument("file")
    p.add_argument("--prec", type=int, default=16)
    p.add_argument("--max-class", type=int, default=8)
    p.add_argument("--sweep", type=int, nargs=2, metavar=("LO", "HI"), help="report the class at every precision in [LO, HI]")
    p.set_defaults(func=cmd_nilpotency)

    p = sub.add_parser("blocks", help="block table of phi(f) - I")
    p.add_argument("file")
    p.add_argument("--f", required=True, metavar="POLY", help='Laurent polynomial such as "1+t^-1"')
    p.add_argument("--window", type=int, nargs=2, default=[-4, 4], metavar=("L", "R"))
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("gen", help="generate a valid instance")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except InvalidRep as exc:
        print(f"invalid representation: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceExhausted as exc:
        print(f"budget exhausted in {exc.stage or 'search'}: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(exc.diagnostics, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_EXHAUSTED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

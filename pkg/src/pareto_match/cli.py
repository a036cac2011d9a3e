"""Command-line front end.

Exit codes: 0 success or all checks passed, 1 a property violation was
found, 2 usage or input error.  Set ``PARETO_MATCH_LOG`` to a logging level
name (``DEBUG``, ``INFO``, ...) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import functools
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .generate import gen
from .market import build_market, man_optimal
from .mechanism import (
    PriorityAssignment,
    college_from_dict,
    college_matching_to_dict,
    matching_from_dict,
    matching_to_dict,
    solve,
    solve_college,
)
from .model import UNMATCHED, UNMATCHED_TOKEN, Instance, InstanceError, instance_to_dict, parse_instance
from .verifier import (
    AuditReport,
    Property,
    SizeLimit,
    audit_strategyproofness,
    ir_violations,
    is_pareto_stable,
    strongly_blocking_pairs,
)

log = logging.getLogger("pareto_match")


class UsageError(Exception):
    pass


def _read_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from exc


def _read_instance(path: str) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_instance(text)


def _priorities(text: str | None, n_men: int) -> PriorityAssignment | None:
    if text is None:
        return None
    try:
        pi = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--pi expects comma-separated integers, got {text!r}") from exc
    if len(pi) != n_men:
        raise UsageError(f"--pi lists {len(pi)} priorities for {n_men} men")
    return PriorityAssignment(pi)


def _emit(doc: object, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    inst = _read_instance(args.input)
    mu = solve(inst, _priorities(args.pi, inst.n_men))
    _emit(matching_to_dict(inst, mu), args.out)
    return 0


def cmd_solve_college(args) -> int:
    ci = college_from_dict(_read_json(args.input))
    if args.pi is not None:
        raise UsageError("--pi is not supported for college instances")
    _emit(college_matching_to_dict(ci, solve_college(ci)), args.out)
    return 0


def cmd_verify(args) -> int:
    inst = _read_instance(args.input)
    if args.matching:
        mu = matching_from_dict(inst, _read_json(args.matching))
    else:
        mu = solve(inst, _priorities(args.pi, inst.n_men))
    ir = AuditReport(Property.IR, [{"pair": list(p)} for p in ir_violations(inst, mu)], 1)
    weak = AuditReport(Property.WEAK_STABILITY, [{"pair": list(p)} for p in strongly_blocking_pairs(inst, mu)], 1)
    pareto = is_pareto_stable(inst, mu)
    reports = [ir, weak, pareto]
    passed = all(r.passed for r in reports)
    doc = matching_to_dict(inst, mu) | {"passed": passed, "reports": [r.to_dict() for r in reports]}
    _emit(doc, args.out)
    return 0 if passed else 1


def cmd_audit(args) -> int:
    inst = _read_instance(args.input)
    mechanism = None if args.pi is None else functools.partial(solve, pr=_priorities(args.pi, inst.n_men))
    report = audit_strategyproofness(
        inst,
        max_coalition=args.coalition,
        budget=args.budget,
        seed=args.seed,
        mechanism=mechanism,
        strong=args.strong,
        parallel=args.parallel,
    )
    log.info("checked %d misreport profiles", report.profiles_checked)
    _emit(report.to_dict(), args.out)
    return 0 if report.passed else 1


def cmd_gen(args) -> int:
    inst = gen(args.seed, args.men, args.women, args.tie_density, args.incompleteness)
    _emit(instance_to_dict(inst), args.out)
    return 0


def cmd_trace(args) -> int:
    inst = _read_instance(args.input)
    lines = []

    def item_name(item) -> str:
        return UNMATCHED_TOKEN if isinstance(item, tuple) or item is None else inst.woman_names[item]

    def record(event: dict) -> None:
        doc = dict(event)
        doc["man"] = inst.man_names[event["multibidder"]]
        doc["item"] = None if event["item"] is None else item_name(event["item"])
        lines.append(json.dumps(doc))

    mu = solve(inst, _priorities(args.pi, inst.n_men), policy=args.policy, trace=record)
    lines.append(json.dumps({"final": matching_to_dict(inst, mu)["matching"]}))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle(args) -> int:
    inst = _read_instance(args.input)
    m = build_market(inst, _priorities(args.pi, inst.n_men))
    result = man_optimal(m, cap=args.oracle_cap, parallel=args.parallel)
    o = result.outcome
    names = {
        "matching": matching_to_dict(inst, o.matching)["matching"],
        "u": dict(zip(inst.man_names, o.to_dict()["u"])),
        "v": dict(zip(inst.woman_names, o.to_dict()["v"])),
    }
    doc = {
        "N": m.N,
        "lambda": m.lam,
        "outcome": o.to_dict(),
        "named": names,
        "man_optimal_matchings": [
            {inst.man_names[i]: None if j == UNMATCHED else inst.woman_names[j] for i, j in enumerate(mu.assignment)}
            for mu in result.man_optimal_matchings
        ],
    }
    _emit(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pareto-match", description="Pareto-stable matching with ties")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--pi", help="comma-separated priority per man, a permutation of 1..n")
    common.add_argument("--parallel", type=int, default=1, help="worker processes for audit and oracle")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str, with_input: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        if with_input:
            p.add_argument("input", help="instance JSON file")
        p.set_defaults(func=func)
        return p

    add("solve", cmd_solve, "run the mechanism on an instance")
    add("solve-college", cmd_solve_college, "run the mechanism on a college admissions instance")
    p = add("verify", cmd_verify, "check IR, weak stability and Pareto-stability")
    p.add_argument("--matching", help="matching JSON to check (default: the mechanism's output)")
    p = add("audit", cmd_audit, "search for profitable misreports by men")
    p.add_argument("--coalition", type=int, choices=(1, 2), default=1)
    p.add_argument("--budget", type=int, help="sample size when misreports are not enumerated")
    p.add_argument("--strong", action="store_true", help="audit the strong group variant")
    p = add("gen", cmd_gen, "generate a seeded random instance", with_input=False)
    p.add_argument("--men", type=int, required=True)
    p.add_argument("--women", type=int, required=True)
    p.add_argument("--tie-density", type=float, default=0.0)
    p.add_argument("--incompleteness", type=float, default=0.0)
    p = add("trace", cmd_trace, "emit reveal records as JSON lines")
    p.add_argument("--policy", choices=("fifo", "reverse"), default="fifo")
    p = add("oracle", cmd_oracle, "man-optimal outcome of the tiered-slope market (tiny instances)")
    p.add_argument("--oracle-cap", type=int, default=3)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = getattr(logging, os.environ.get("PARETO_MATCH_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr)
    log.setLevel(level)
    args = build_parser().parse_args(argv)
    if args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, InstanceError, SizeLimit, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

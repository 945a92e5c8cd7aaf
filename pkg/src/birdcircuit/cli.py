"""Command-line surface: reduce, solve, play, oracle, verify, export.

Exit codes: 0 success / answer is yes, 1 answer is no (unsatisfiable,
unsolvable, lost game, sweep mismatch), 2 usage error, 3 state cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import List, Optional

from .errors import BirdCircuitError, CapExceeded, ParseError
from .export import (
    circuit_to_dot,
    circuit_to_text,
    gadget_tables_text,
    reduction_report,
)
from .engine import (
    load_strategy_file,
    run_strategy,
    script_strategy,
    solve_always,
    solve_deterministic,
    winning_existential_policy,
)
from .formula import parse_cnf, parse_g2, parse_qbf, g2_oracle, sat_oracle, tqbf_oracle
from .gates import SeededResolver
from .reducer import PhysicsParams, Variant, annotate_geometry, reduce_problem
from .verify import fit_power_law, measure_scaling, problems_for, sweep

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


def _detect_and_parse(text: str):
    stripped = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("c ")]
    if any(ln.split()[0] in ("e", "a") for ln in stripped if ln):
        return parse_qbf(text)
    if any(ln.startswith("p cnf") for ln in stripped):
        return parse_cnf(text)
    return parse_g2(text)


def _parse_for(variant: Variant, text: str):
    if variant is Variant.ABPD:
        return parse_cnf(text)
    if variant in (Variant.ABED, Variant.ABPS):
        return parse_qbf(text)
    return parse_g2(text)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        _write(args.out, text)
    else:
        sys.stdout.write(text)


def _reduction(args):
    variant = Variant(args.variant)
    problem = _parse_for(variant, _read(args.input))
    reduction = reduce_problem(variant, problem)
    if args.max_birds_override is not None:
        reduction.bird_budget = args.max_birds_override
    return reduction


def cmd_reduce(args) -> int:
    reduction = _reduction(args)
    if args.format == "structured":
        _emit(args, json.dumps(reduction_report(reduction), indent=2, sort_keys=True) + "\n")
    elif args.format == "dot":
        _emit(args, circuit_to_dot(reduction.circuit, name=reduction.variant.value))
    else:
        chunks = [
            circuit_to_text(reduction.circuit),
            f"bird_budget {reduction.bird_budget}\n",
            "manifest\n" + reduction.manifest(),
        ]
        _emit(args, "".join(chunks))
    if args.figure:
        from .viz import render_level

        render_level(annotate_geometry(reduction, PhysicsParams()), args.figure)
    return EXIT_OK


def cmd_solve(args) -> int:
    reduction = _reduction(args)
    try:
        if reduction.variant in (Variant.ABPD, Variant.ABED):
            solvable, witness = solve_deterministic(reduction, state_cap=args.state_cap)
        else:
            solvable = solve_always(reduction, state_cap=args.state_cap)
            witness = None
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}")
        return EXIT_CAP
    if args.format == "structured":
        payload = {
            "variant": reduction.variant.value,
            "solvable": solvable,
            "bird_budget": str(reduction.bird_budget),
            "witness": witness,
        }
        _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        print("solvable" if solvable else "unsolvable")
        if witness:
            print(f"witness ({len(witness)} shots):")
            for shot in witness:
                print(f"  {shot}")
    return EXIT_OK if solvable else EXIT_NO


def cmd_play(args) -> int:
    reduction = _reduction(args)
    if args.strategy:
        strategy = load_strategy_file(_read(args.strategy))
    elif args.policy == "oracle":
        if reduction.variant is Variant.ABPD:
            assignment = sat_oracle(reduction.source)
            if assignment is None:
                print("source formula is unsatisfiable; no oracle strategy")
                return EXIT_NO
            strategy = script_strategy(reduction, assignment)
        elif reduction.variant in (Variant.ABED, Variant.ABPS):
            strategy = script_strategy(reduction, winning_existential_policy(reduction.source))
        else:
            print("no built-in policy for this variant; pass --strategy")
            return EXIT_USAGE
    else:
        print("pass --strategy FILE or --policy oracle")
        return EXIT_USAGE
    resolver = SeededResolver(args.seed if args.seed is not None else 0)
    transcript: List = []
    outcome = run_strategy(reduction, strategy, resolver, transcript)
    for shot, bird, digest in transcript:
        print(f"{shot}  ->  {bird.kind.value}{'' if bird.label is None else ':' + bird.label}  [{digest}]")
    print(f"{outcome.result} after {outcome.shots_used} shots "
          f"({outcome.final.birds_remaining} birds left)")
    return EXIT_OK if outcome.result == "win" else EXIT_NO


def cmd_oracle(args) -> int:
    problem = _detect_and_parse(_read(args.input))
    from .formula import CnfFormula, QbfFormula

    if isinstance(problem, QbfFormula):
        answer = tqbf_oracle(problem)
        print("true" if answer else "false")
    elif isinstance(problem, CnfFormula):
        assignment = sat_oracle(problem)
        answer = assignment is not None
        if answer:
            model = " ".join(f"{v}={int(assignment[v])}" for v in sorted(assignment))
            print(f"satisfiable: {model}")
        else:
            print("unsatisfiable")
    else:
        answer = g2_oracle(problem)
        print("player 1 forces victory" if answer else "player 1 cannot force victory")
    return EXIT_OK if answer else EXIT_NO


def cmd_verify(args) -> int:
    variant = Variant(args.variant)
    problems = problems_for(variant, args.max_vars, args.max_clauses)
    if args.limit:
        import itertools

        problems = itertools.islice(problems, args.limit)
    result = sweep(variant, problems, state_cap=args.state_cap)
    print(f"{result.checked} instances checked, {len(result.mismatches)} mismatches, "
          f"{result.cap_hits} cap hits")
    for record in result.mismatches[:20]:
        print(f"  mismatch: {record.description}  oracle={record.oracle} solved={record.solved}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"verify_{variant.value}.csv"), "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["variant", "instance", "oracle", "solved", "agree"])
            for r in result.records:
                writer.writerow([r.variant, r.description, int(r.oracle),
                                 "" if r.solved is None else int(r.solved), int(r.agree)])
        from .viz import render_scaling, render_sweep_summary

        render_sweep_summary(result.records, os.path.join(args.out, f"verify_{variant.value}.png"),
                             title=f"{variant.value} oracle equivalence")
        if variant is Variant.ABED:
            rows = measure_scaling((4, 8, 16, 32))
            fit = fit_power_law([(n, g) for n, g, _ in rows])
            render_scaling(rows, os.path.join(args.out, "scaling_abed.png"), fit)
    if result.cap_hits:
        return EXIT_CAP
    return EXIT_OK if not result.mismatches else EXIT_NO


def cmd_export(args) -> int:
    reduction = _reduction(args)
    if args.format == "dot":
        _emit(args, circuit_to_dot(reduction.circuit, name=reduction.variant.value))
    elif args.format == "circuit":
        _emit(args, circuit_to_text(reduction.circuit))
    elif args.format == "level":
        _emit(args, annotate_geometry(reduction, PhysicsParams()).to_text())
    elif args.format == "tables":
        seen = {}
        for gid, bp in reduction.gadgets:
            seen.setdefault(bp.kind, bp)
        _emit(args, gadget_tables_text(list(seen.values())))
    elif args.format == "png":
        if not args.out:
            print("png export needs --out FILE")
            return EXIT_USAGE
        from .viz import render_circuit

        render_circuit(reduction.circuit, args.out, title=reduction.variant.value)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="birdcircuit",
        description="compile Boolean decision problems into slingshot-puzzle "
                    "circuits, solve them, and verify oracle equivalence",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_variant=True):
        p.add_argument("input", help="source problem file")
        if needs_variant:
            p.add_argument("--variant", required=True, choices=[v.value for v in Variant])
        p.add_argument("--seed", type=int, default=None, help="resolver seed for stochastic replay")
        p.add_argument("--max-birds-override", type=int, default=None)
        p.add_argument("--state-cap", type=int, default=2_000_000)
        p.add_argument("--format", choices=["text", "structured", "dot"], default="text")
        p.add_argument("--out", default=None, help="write output to this file")

    p_reduce = sub.add_parser("reduce", help="compile a problem into a circuit")
    common(p_reduce)
    p_reduce.add_argument("--figure", default=None, help="also render the level layout to this image file")
    p_reduce.set_defaults(func=cmd_reduce)

    p_solve = sub.add_parser("solve", help="decide solvability of the compiled level")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_play = sub.add_parser("play", help="replay a strategy and print the transcript")
    common(p_play)
    p_play.add_argument("--strategy", default=None, help="strategy file, one shot target per line")
    p_play.add_argument("--policy", choices=["oracle"], default=None)
    p_play.set_defaults(func=cmd_play)

    p_oracle = sub.add_parser("oracle", help="run the brute-force source-problem oracle")
    p_oracle.add_argument("input")
    p_oracle.set_defaults(func=cmd_oracle)

    p_verify = sub.add_parser("verify", help="sweep instances and check oracle equivalence")
    p_verify.add_argument("--variant", required=True, choices=[v.value for v in Variant])
    p_verify.add_argument("--max-vars", type=int, default=2)
    p_verify.add_argument("--max-clauses", type=int, default=2)
    p_verify.add_argument("--limit", type=int, default=None, help="check at most this many instances")
    p_verify.add_argument("--state-cap", type=int, default=2_000_000)
    p_verify.add_argument("--out", default=None, help="directory for the CSV report and figures")
    p_verify.set_defaults(func=cmd_verify)

    p_export = sub.add_parser("export", help="export circuit/level/tables")
    common(p_export)
    p_export.set_defaults(func=cmd_export)
    # export reuses --format with more choices
    for action in p_export._actions:
        if action.dest == "format":
            action.choices = ["dot", "circuit", "level", "tables", "png"]
            action.default = "circuit"
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"no such file: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BirdCircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream pager/head closed the stream
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

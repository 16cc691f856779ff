"""Command-line surface: verify | reverse | refute | distinguish | check-family.

Exit codes: 0 for a passing/consistent verdict, 1 for a failing one, 2 for
usage errors (bad arguments, unknown protocol names, unreadable scenarios).
"""

from __future__ import annotations

import argparse
import sys
import time

from . import locc, suite
from .errors import LoccKitError
from .report import (Report, VERDICT_CONSISTENT, VERDICT_CONTRADICTION,
                     VERDICT_CONTRADICTION_HYPOTHESIS, VERDICT_FAIL,
                     VERDICT_INCONCLUSIVE, VERDICT_NOT_APPLICABLE,
                     VERDICT_PASS, render)
from .scenario import Scenario, load_scenario, save_scenario
from .states import check_family


def cmd_verify(scenario: Scenario, protocol_name: str, tol: float) -> tuple[Report, int]:
    protocol = scenario.protocol(protocol_name)
    result = locc.verify_distinguishing(protocol, scenario.family, tol)
    report = Report(
        command="verify",
        scenario_id=scenario.scenario_id,
        verdict=VERDICT_PASS if result.passed else VERDICT_FAIL,
        tolerances={"deviation": tol},
        per_label={label: dev for label, (dev, _) in result.per_label.items()},
        details={
            "protocol": protocol_name,
            "max_deviation": result.max_deviation,
            "failing_labels": list(result.failing_labels),
        })
    return report, 0 if result.passed else 1


def cmd_reverse(scenario: Scenario, protocol_name: str, tol: float,
                out_path: str | None) -> tuple[Report, int]:
    protocol = scenario.protocol(protocol_name)
    reversed_protocol = locc.reverse_protocol(protocol)
    flags = {
        "original_normalised": locc.protocol_is_normalised(protocol, tol),
        "original_unital": locc.protocol_is_unital(protocol, tol),
        "reversed_normalised": locc.protocol_is_normalised(reversed_protocol, tol),
        "reversed_unital": locc.protocol_is_unital(reversed_protocol, tol),
    }
    if out_path:
        out = Scenario(
            scenario_id=scenario.scenario_id,
            partition=scenario.partition,
            family=scenario.family,
            protocols={protocol_name: reversed_protocol},
            metadata={**scenario.metadata, "reversed_from": protocol_name})
        save_scenario(out, out_path)
    report = Report(
        command="reverse",
        scenario_id=scenario.scenario_id,
        verdict=VERDICT_PASS,
        tolerances={"normalisation": tol},
        details={"protocol": protocol_name, "out": out_path or "", **flags})
    return report, 0


def cmd_refute(scenario: Scenario, suite_size: int, seed: int,
               tol: float) -> tuple[Report, int]:
    result = suite.run_refutation(scenario.family, suite_size, seed, tol)
    if not result.applicable:
        report = Report(
            command="refute",
            scenario_id=scenario.scenario_id,
            verdict=VERDICT_NOT_APPLICABLE,
            tolerances={"deviation": tol},
            details={"reason": "family contains no entangled member"})
        return report, 0
    passing = result.passing_candidates
    verdict = VERDICT_CONTRADICTION if passing else VERDICT_PASS
    candidates = [
        {
            "name": c.name,
            "kind": c.kind,
            "verdict": c.verdict,
            "max_deviation": c.max_deviation,
            "success": c.success,
            "optimal_assignment_success": c.optimal_assignment_success,
        }
        for c in result.candidates
    ]
    report = Report(
        command="refute",
        scenario_id=scenario.scenario_id,
        verdict=verdict,
        tolerances={"deviation": tol},
        details={
            "suite_size": suite_size,
            "seed": seed,
            "entangled_labels": list(result.entangled_labels),
            "num_candidates": len(result.candidates),
            "passing_candidates": list(passing),
            "max_success": result.max_success,
            "max_projective_optimal_success": result.max_projective_optimal_success,
            "candidates": candidates,
        })
    return report, 0 if verdict == VERDICT_PASS else 1


def cmd_distinguish(scenario: Scenario, tol: float,
                    out_path: str | None) -> tuple[Report, int]:
    family_report = check_family(scenario.family, tol)
    entangled = family_report.entangled_labels
    if entangled:
        evidence = {
            m.label: list(m.sequential_cut_ranks)
            for m in family_report.members if not m.product
        }
        report = Report(
            command="distinguish",
            scenario_id=scenario.scenario_id,
            verdict=VERDICT_CONTRADICTION_HYPOTHESIS,
            tolerances={"deviation": tol},
            details={
                "entangled_labels": list(entangled),
                "sequential_cut_ranks": evidence,
                "reason": "entangled members admit no perfect LOCC distinguisher",
            })
        return report, 1
    protocol = locc.build_product_distinguisher(scenario.family, tol)
    check = locc.theorem_check(protocol, scenario.family, tol)
    if out_path:
        out = Scenario(
            scenario_id=scenario.scenario_id,
            partition=scenario.partition,
            family=scenario.family,
            protocols={"product_distinguisher": protocol},
            metadata=dict(scenario.metadata))
        save_scenario(out, out_path)
    verdict = check.verdict if check.verdict in (
        VERDICT_CONSISTENT, VERDICT_CONTRADICTION) else VERDICT_INCONCLUSIVE
    report = Report(
        command="distinguish",
        scenario_id=scenario.scenario_id,
        verdict=verdict,
        tolerances={"deviation": tol},
        per_label={label: dev
                   for label, (dev, _) in check.distinguishing.per_label.items()},
        details={
            "max_deviation": check.distinguishing.max_deviation,
            "unital": locc.protocol_is_unital(protocol, tol),
            "normalised": locc.protocol_is_normalised(protocol, tol),
            "out": out_path or "",
        })
    return report, 0 if verdict == VERDICT_CONSISTENT else 1


def cmd_check_family(scenario: Scenario, tol: float) -> tuple[Report, int]:
    result = check_family(scenario.family, tol)
    report = Report(
        command="check-family",
        scenario_id=scenario.scenario_id,
        verdict=VERDICT_PASS if result.valid else VERDICT_FAIL,
        tolerances={"gram": tol},
        per_label={m.label: 0.0 if m.product else 1.0 for m in result.members},
        details={
            "complete": result.complete,
            "cardinality": result.cardinality,
            "expected_cardinality": result.expected_cardinality,
            "orthonormal": result.orthonormal,
            "max_gram_deviation": result.max_gram_deviation,
            "entangled_labels": list(result.entangled_labels),
        })
    return report, 0 if result.valid else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locckit",
        description="Verify, reverse, and refute LOCC distinguishing protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, protocol=False, out=False, refute=False):
        p.add_argument("--scenario", required=True,
                       help="scenario file path or bundled scenario name")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--report", choices=("text", "machine"), default="text")
        if protocol:
            p.add_argument("--protocol", required=True,
                           help="protocol name within the scenario")
        if out:
            p.add_argument("--out", default=None,
                           help="write the produced protocol as a scenario file")
        if refute:
            p.add_argument("--suite", type=int, default=100,
                           help="number of random candidate protocols")
            p.add_argument("--seed", type=int, default=0)

    common(sub.add_parser("verify", help="check a protocol distinguishes the family"),
           protocol=True)
    common(sub.add_parser("reverse", help="time-reverse a protocol"),
           protocol=True, out=True)
    common(sub.add_parser("refute", help="run the candidate suite against the family"),
           refute=True)
    common(sub.add_parser("distinguish",
                          help="build and verify the product distinguisher"),
           out=True)
    common(sub.add_parser("check-family", help="validate the state family"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        scenario = load_scenario(args.scenario, tol=args.tol)
        if args.command == "verify":
            report, code = cmd_verify(scenario, args.protocol, args.tol)
        elif args.command == "reverse":
            report, code = cmd_reverse(scenario, args.protocol, args.tol, args.out)
        elif args.command == "refute":
            report, code = cmd_refute(scenario, args.suite, args.seed, args.tol)
        elif args.command == "distinguish":
            report, code = cmd_distinguish(scenario, args.tol, args.out)
        else:
            report, code = cmd_check_family(scenario, args.tol)
    except LoccKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.wall_time_s = time.perf_counter() - started
    print(render(report, args.report))
    return code


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Regenerate the bundled scenario files under src/locckit/scenarios/."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from locckit import corpus, locc, suite
from locckit.scenario import Scenario, save_scenario

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "locckit" / "scenarios"


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    comp = corpus.computational_basis((2, 2))
    save_scenario(Scenario(
        scenario_id="computational_2x2",
        partition=comp.partition,
        family=comp,
        protocols={
            "product_distinguisher": locc.build_product_distinguisher(comp),
            "zz_measure": suite.computational_candidate((2, 2), comp.size),
        },
        metadata={"description": "two-qubit computational product basis"},
    ), OUT / "computational_2x2.json")

    bell = corpus.bell_basis()
    best_success, tuned = suite.optimal_assignment_success(
        suite.computational_candidate((2, 2), bell.size), bell)
    save_scenario(Scenario(
        scenario_id="bell_basis",
        partition=bell.partition,
        family=bell,
        protocols={
            "zz_measure": suite.computational_candidate((2, 2), bell.size),
            "zz_best_assignment": tuned,
        },
        metadata={
            "description": "the four two-qubit Bell states (all entangled)",
            "zz_best_assignment_success": f"{best_success!r}",
        },
    ), OUT / "bell_basis.json")

    four = corpus.four_state_basis()
    _, four_tuned = suite.optimal_assignment_success(
        suite.computational_candidate((2, 2), four.size), four)
    save_scenario(Scenario(
        scenario_id="four_state_basis",
        partition=four.partition,
        family=four,
        protocols={
            "zz_measure": suite.computational_candidate((2, 2), four.size),
            "zz_best_assignment": four_tuned,
        },
        metadata={
            "description": "{00, 11, 01+10, 01-10}: two product members, "
                           "two entangled members",
        },
    ), OUT / "four_state_basis.json")

    domino = corpus.domino_basis()
    save_scenario(Scenario(
        scenario_id="domino_basis",
        partition=domino.partition,
        family=domino,
        protocols={},
        metadata={
            "description": "nine bipartite-qutrit product states (dominoes); "
                           "all product, famously hard for normalised LOCC",
        },
    ), OUT / "domino_basis.json")

    print(f"wrote scenarios to {OUT}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Run every fixture pipeline and print its query answers.

Usage:
    python scripts/run_pipelines.py [--provenance unit|minmaxprob|topkproofs]

Each pipeline is a .scl program under programs/ with its mock-model
fixtures alongside; all of them run offline and deterministically.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from relog import api  # noqa: E402

PROGRAMS = [
    ("animals", "animals/animals.scl"),
    ("date reasoning", "date_reasoning/date_reasoning.scl"),
    ("shuffled objects", "shuffled_objects/shuffled_objects.scl"),
    ("kinship", "kinship/kinship.scl"),
    ("math steps", "math_steps/math_steps.scl"),
    ("soft join", "soft_join/soft_join.scl"),
    ("scene QA", "clevr/clevr.scl"),
]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--provenance", default="topkproofs",
                        choices=["unit", "minmaxprob", "topkproofs"])
    parser.add_argument("--top-k", type=int, default=3)
    args = parser.parse_args()

    base = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir,
                        "programs")
    for title, rel_path in PROGRAMS:
        path = os.path.join(base, rel_path)
        compiled = api.compile_program(path=path)
        _, results = api.run_program(compiled, provenance=args.provenance,
                                     top_k=args.top_k)
        print(f"== {title} ({rel_path})")
        for query, facts in results.items():
            for prob, values in facts:
                shown = ", ".join(str(v) for v in values)
                tag = "" if prob is None else f"  p={prob:.6g}"
                print(f"   {query}({shown}){tag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

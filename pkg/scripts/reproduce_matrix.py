#!/usr/bin/env python3
"""Reproduce the architecture evaluation matrix end to end.

Runs the twelve-type sweep at the reproduction settings (seed 42, seven
maintainers), writes per-type reports plus the matrix in both formats,
and exits nonzero on any cell that disagrees with the reference.
"""

import argparse
import os
import sys

from w3sim.archetypes import SimConfig
from w3sim.evaluation import (
    compare,
    diff_against_reference,
    matrix_json,
    matrix_markdown,
    report_json,
    run_sweep,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--nodes", type=int, default=7)
    parser.add_argument("--out", default="out/matrix")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    reports = run_sweep(seed=args.seed, sim=SimConfig(seed=args.seed, n_nodes=args.nodes),
                        jobs=args.jobs)
    matrix = compare(reports, reports[1])
    mismatches = diff_against_reference(matrix)

    os.makedirs(args.out, exist_ok=True)
    for type_id, report in sorted(reports.items()):
        with open(os.path.join(args.out, f"report_type{type_id}.json"), "w") as fh:
            fh.write(report_json(report))
    with open(os.path.join(args.out, "matrix.json"), "w") as fh:
        fh.write(matrix_json(matrix))
    with open(os.path.join(args.out, "matrix.md"), "w") as fh:
        fh.write(matrix_markdown(matrix))

    print(matrix_markdown(matrix))
    if mismatches:
        print(f"{len(mismatches)} mismatch(es):")
        for m in mismatches:
            print(f"  {m}")
        return 1
    print(f"all rows match the reference evaluation; outputs in {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""End-to-end synthetic study: stream generation, both control modes across
the default cost grid, a universe ablation, the tree-vs-direct-search check,
and the latency benchmark. Results land in ./results as CSV.

Usage: python scripts/reproduce_synthetic.py [--quick]
"""

import argparse
import sys
from pathlib import Path

from costcap.cli import main as cli_main

RESULTS = Path("results")


def run(args: list[str]) -> None:
    print(f"\n$ costcap {' '.join(args)}")
    code = cli_main(args)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="small sizes for a fast pass")
    opts = parser.parse_args()

    RESULTS.mkdir(exist_ok=True)
    stream = RESULTS / "stream.csv"
    n_test, burn_in, seeds = (3000, 1000, "0,1,2,3,4,5,6,7,8,9")
    if opts.quick:
        n_test, burn_in, seeds = (600, 200, "0,1,2")
    n_rows = n_test * len(seeds.split(","))

    run(["generate", "--n", str(n_rows), "--classes", "10", "--base-rate", "0.4",
         "--heterogeneity", "1.0", "--seed", "20240401", "--out", str(stream)])

    common = ["--stream", str(stream), "--seeds", seeds, "--n-test", str(n_test),
              "--burn-in", str(burn_in), "--classes", "10"]
    # the CI bands are calibrated for the full-size protocol
    gate = [] if opts.quick else ["--assert"]

    # expected-cost control, plain and severity-weighted false positives
    run(["run", *common, "--mode", "expected", "--value-kind", "tpc",
         "--cost-kind", "fp", "--out", str(RESULTS / "expected_fp.csv"), *gate])
    run(["run", *common, "--mode", "expected", "--value-kind", "tp",
         "--cost-kind", "fpc", "--out", str(RESULTS / "expected_fpc.csv"), *gate])

    # violation control at the usual 10% level
    run(["run", *common, "--mode", "violation", "--delta", "0.1", "--value-kind", "tpc",
         "--cost-kind", "fp", "--out", str(RESULTS / "violation_fp.csv"), *gate])

    # universe ablation: candidate-family choice at fixed value/cost functions
    for universe in ("ratio", "prob", "value"):
        run(["run", *common, "--mode", "expected", "--universe", universe,
             "--value-kind", "tp", "--cost-kind", "fpc",
             "--out", str(RESULTS / f"ablation_{universe}.csv")])

    # threshold equivalence against the direct search
    run(["oracle-check", *common, "--mode", "expected", "--targets", "23.7",
         "--value-kind", "tp", "--cost-kind", "fpc", "--checkpoints", "20",
         "--out", str(RESULTS / "oracle_check.csv")])

    # per-update latency scaling
    grid = "1000,10000,100000" if opts.quick else "1000,10000,100000,1000000"
    run(["bench", "--n-grid", grid, "--out", str(RESULTS / "bench.csv")])

    print(f"\nall results written under {RESULTS}/")


if __name__ == "__main__":
    main()

"""Update probability under Gaussian noise over an (l, sigma) grid, with Monte Carlo check."""
import argparse
import sys

from stallguard.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--out", default="out/prob")
    args = ap.parse_args()
    return cli_main([
        "prob",
        "--l-grid", "0.01,0.02,0.03,0.04,0.05",
        "--sigma-grid", "0.005,0.015,0.03,0.05,0.1",
        "--e-ratio", "0.3333333333333333",
        "--mc-samples", str(args.samples),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())

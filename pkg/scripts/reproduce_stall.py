"""Stall and anti-stall on the ten-lag deterministic AR signal.

Runs infinite LMS, fixed-point LMS and AN-LMS on configs/fig2_ar10.cfg, prints the
stall report per algorithm and writes curves plus a trace of the running
threshold error to the output directory.

    python scripts/reproduce_stall.py [--out out/stall] [--seed 0]
"""
import argparse
from pathlib import Path

import numpy as np

from stallguard.analysis import detect_stall, running_threshold
from stallguard.cli import write_csv, write_run_outputs
from stallguard.experiment import load_config, run_experiment
from stallguard.filters import split_members

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/stall")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()

    cfg = load_config(ROOT / "configs" / "fig2_ar10.cfg", args.seed)
    res = run_experiment(cfg)
    out = Path(args.out)
    write_run_outputs(cfg, out, res)

    fixed = split_members(res["lms_fixed"].trajectory)[0]
    e_t = running_threshold(fixed, cfg.fmt, cfg.mu)
    write_csv(out / "threshold_lms_fixed.csv", ("iteration", "abs_error", "threshold"),
              zip(fixed.iterations.tolist(), np.abs(fixed.errors), e_t))
    for algo, r in res.items():
        traj = split_members(r.trajectory)[0]
        rep = detect_stall(traj)
        tail = np.abs(traj.errors[-100:]).mean()
        print(f"{algo:10s} {str(rep).strip().replace(chr(10), '  ')}  last-100 mean|e|={tail:.4e}")
    print(f"outputs in {out}")


if __name__ == "__main__":
    main()

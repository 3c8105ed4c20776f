"""Ensemble learning curves on the eleven-lag AR signal: AN-LMS against infinite LMS.

    python scripts/learning_curves.py [--config configs/eq21_ar11_uniform.cfg] [--runs 200]
"""
import argparse
from pathlib import Path

import numpy as np

from stallguard.cli import write_run_outputs
from stallguard.experiment import load_config, run_experiment, with_overrides

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "eq21_ar11_uniform.cfg"))
    ap.add_argument("--runs", type=int)
    ap.add_argument("--out", default="out/learning_curves")
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.runs:
        cfg = with_overrides(cfg, ensemble_size=args.runs)
    res = run_experiment(cfg, record_weights=False)
    write_run_outputs(cfg, Path(args.out), res)

    ref = res["lms_inf"].curve.mean_abs_error
    for algo, r in res.items():
        c = r.curve.mean_abs_error
        gap = np.abs(c - ref).sum() / ref.sum()
        print(f"{algo:10s} final mean|e|={c[-200:].mean():.4e}  area gap vs lms_inf={gap:.4f}")


if __name__ == "__main__":
    main()

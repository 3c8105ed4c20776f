"""Command line entry point: ``stallguard {run,stall-demo,prob,verify}``.

Exit codes: 0 success, 1 verification failed, 2 bad configuration or usage,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    UpdateGeometry,
    detect_stall,
    mc_update_frequency,
    update_probability_gaussian,
    update_probability_uniform,
    verify_theorem1,
    verify_theorem2,
)
from .experiment import ConfigError, ExperimentConfig, load_config, run_experiment
from .filters import split_members
from .noise import NoiseSpec
from .svgplot import line_chart

SEED_ENV = "STALLGUARD_SEED"
PROB_COLUMNS = ("l", "sigma", "e", "P_analytic", "P_uniform", "P_montecarlo", "stderr")


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) if not isinstance(v, (int, np.integer)) else str(v) for v in row)
              for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv` into ``{column: np.ndarray}``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    data = np.array(rows).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _resolve_seed(cli_seed):
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(SEED_ENV, f"not an integer: {env!r}") from None
    return None


def write_run_outputs(config: ExperimentConfig, out: Path, results) -> None:
    out.mkdir(parents=True, exist_ok=True)
    curves = {}
    for algo, res in results.items():
        c = res.curve
        write_csv(out / f"curve_{algo}.csv", ("iteration", "mean_abs_error"),
                  zip(c.iterations.tolist(), c.mean_abs_error))
        reports = [detect_stall(t) for t in split_members(res.trajectory)]
        text = str(reports[0])
        text += f"stalled_members: {sum(r.stalled for r in reports)}/{len(reports)}\n"
        (out / f"stall_{algo}.txt").write_text(text)
        curves[algo] = (c.iterations, c.mean_abs_error)
    (out / "curves.svg").write_text(line_chart(
        curves, title="Learning curves", xlabel="iteration", ylabel="mean |e(i)|", log_y=True))
    noise = config.noise
    manifest = [
        f"tool: stallguard {__version__}",
        f"config_sha256: {config.digest()}",
        f"seed: {config.seed}",
        f"noise: kind={noise.kind} scale={noise.scale!r} seed={noise.seed}",
        f"ensemble_size: {config.ensemble_size}",
        "member_seeds: signal=seed^k, noise=noise.seed^k",
    ]
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n")


def demo_config(seed: int = 0) -> ExperimentConfig:
    """Ten-lag deterministic AR, 12 fractional bits, mu = 0.01, Gaussian injected noise."""
    return ExperimentConfig(signal_preset="fig2_ar10", taps=10, mu=0.01, iterations=2000,
                            seed=seed, noise=NoiseSpec.gaussian(0.05, seed)).validate()


def cmd_run(args) -> int:
    try:
        seed = _resolve_seed(args.seed)
        if args.config is None:
            config = demo_config(0 if seed is None else seed)
        else:
            config = load_config(args.config, seed)
    except ConfigError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    out = Path(args.out or config.out)
    results = run_experiment(config, record_weights=False)
    try:
        write_run_outputs(config, out, results)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 3
    for algo, res in results.items():
        rep = detect_stall(split_members(res.trajectory)[0])
        tail = float(np.mean(res.curve.mean_abs_error[-100:]))
        print(f"{algo:10s} final mean|e|={tail:.3e}  {'stalled at ' + str(rep.stall_iteration) if rep.stalled else 'no stall'}")
    return 0


def _grid(text):
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals or any(v <= 0 for v in vals):
        raise ValueError("grid values must be positive")
    return vals


def prob_rows(l_grid, sigma_grid, e=None, e_ratio=None, mc_samples=100_000, seed=0):
    rows = []
    for i, l in enumerate(l_grid):
        e_val = e if e is not None else e_ratio * l
        geom = UpdateGeometry(l, e_val)
        for j, sigma in enumerate(sigma_grid):
            p = update_probability_gaussian(geom, sigma)
            if mc_samples > 0:
                f, se = mc_update_frequency(geom, sigma, mc_samples, seed=seed ^ (i << 16 | j))
            else:
                f, se = float("nan"), float("nan")
            rows.append((l, sigma, e_val, p, update_probability_uniform(geom), f, se))
    return rows


def cmd_prob(args) -> int:
    try:
        l_grid, sigma_grid = _grid(args.l_grid), _grid(args.sigma_grid)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if (args.e is None) == (args.e_ratio is None):
        print("error: give exactly one of --e or --e-ratio", file=sys.stderr)
        return 2
    if args.e is not None and not 0 < args.e < min(l_grid):
        print("error: --e must satisfy 0 < e < min(l grid)", file=sys.stderr)
        return 2
    if args.e_ratio is not None and not 0 < args.e_ratio < 1:
        print("error: --e-ratio must lie in (0, 1)", file=sys.stderr)
        return 2
    seed = _resolve_seed(args.seed) or 0
    rows = prob_rows(l_grid, sigma_grid, args.e, args.e_ratio, args.mc_samples, seed)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "prob_surface.csv", PROB_COLUMNS, rows)
        series = {}
        for l in l_grid:
            sel = [r for r in rows if r[0] == l]
            series[f"l={l:g}"] = ([r[1] for r in sel], [r[3] for r in sel])
        (out / "prob_surface.svg").write_text(line_chart(
            series, title="Update probability, Gaussian noise", xlabel="sigma", ylabel="P"))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 3
    bad = [r for r in rows if abs(r[3] - r[5]) > 3 * r[6]]
    print(f"{len(rows)} grid points, {len(bad)} outside 3 standard errors")
    return 0


def cmd_verify(args) -> int:
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return 2
    seed = _resolve_seed(args.seed) or 0
    if args.theorem == 1:
        r = verify_theorem1(args.trials, seed)
        print(f"theorem 1: {r.trials} tuples, {r.updates} updates, {r.mismatches} mismatches, "
              f"{r.wrong_sign} wrong-sign, {r.oversized} oversized")
        return 0 if r.passed else 1
    r = verify_theorem2(args.trials, seed)
    print(f"theorem 2: mean update {r.mean_update:.6e}, mu*u*e {r.expected:.6e}, "
          f"deviation {r.z:.2f} standard errors")
    return 0 if r.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stallguard", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.set_defaults(func=cmd_run)

    demo = sub.add_parser("stall-demo", help="run the built-in fig2_ar10 experiment")
    demo.add_argument("--out", default="out/stall-demo")
    demo.add_argument("--seed", type=int)
    demo.set_defaults(func=cmd_run, config=None)

    prob = sub.add_parser("prob", help="update probability surface under Gaussian noise")
    prob.add_argument("--l-grid", required=True)
    prob.add_argument("--sigma-grid", required=True)
    prob.add_argument("--e", type=float)
    prob.add_argument("--e-ratio", type=float, help="use e = ratio * l at every grid point")
    prob.add_argument("--mc-samples", type=int, default=100_000)
    prob.add_argument("--seed", type=int)
    prob.add_argument("--out", default="out/prob")
    prob.set_defaults(func=cmd_prob)

    ver = sub.add_parser("verify", help="Monte Carlo checks of the update theorems")
    ver.add_argument("--theorem", type=int, choices=(1, 2), required=True)
    ver.add_argument("--trials", type=int, default=1_000_000)
    ver.add_argument("--seed", type=int)
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

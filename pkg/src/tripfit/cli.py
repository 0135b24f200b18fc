"""Command line entry points: validate, fit, grid, mae, sweep.

Each verb reads one JSON project config and writes its artifacts (CSV and
JSON, plot-ready) under the configured output directory.  Every output file
embeds the materialized config and seed, so reruns at a fixed seed reproduce
files byte for byte.  Exit codes: 0 success, 1 fit did not converge,
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ProjectConfig, load_config
from .evaluation import (
    UncertaintySpec,
    mae,
    matrix_csv,
    sweep_long_csv,
    sweep_summary_csv,
    uncertainty_matrix,
    uncertainty_sweep,
)
from .protection import TAU_MAX, V_MAX, grid_evaluate
from .regression import fit, harden, model_from_jsonable
from .sampling import sample_training

DEFAULT_GRID_RESOLUTION = 101


def _echo_json(cfg: ProjectConfig) -> str:
    return json.dumps(cfg.echo, sort_keys=True)


def _comment_lines(cfg: ProjectConfig, **extra) -> list[str]:
    lines = [f"{key}: {value}" for key, value in extra.items()]
    lines.append(f"seed: {cfg.seed}")
    lines.append(f"config: {_echo_json(cfg)}")
    return lines


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _fit_result_path(cfg: ProjectConfig, target: str) -> Path:
    return cfg.output_dir / f"fit_{target}.json"


def _load_fitted_model(cfg: ProjectConfig, target: str):
    path = _fit_result_path(cfg, target)
    if not path.is_file():
        raise ConfigError(f"no fit result at {path}; run `tripfit fit --motor {target}` first")
    return model_from_jsonable(json.loads(path.read_text())["model"])


def cmd_validate(cfg: ProjectConfig) -> int:
    print(f"protection library: {cfg.library_source} "
          f"({len(cfg.library.schemes)} schemes)")
    print(f"targets: {', '.join(cfg.targets())}")
    for target in cfg.targets():
        comp = cfg.composite_for(target)
        pairs = ", ".join(f"{name}={pi:g}" for name, pi in zip(comp.names, comp.fractions))
        print(f"  {target}: {pairs}")
    print("effective config:")
    print(json.dumps(cfg.echo, indent=2, sort_keys=True))
    return 0


def cmd_fit(cfg: ProjectConfig, target: str) -> int:
    comp = cfg.composite_for(target)
    data = sample_training(comp, cfg.sampler)
    result = fit(data, cfg.smoothing, cfg.fit)
    report = mae(harden(result.model), comp, cfg.sampler.m_eval, cfg.seed)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    data.to_csv(cfg.output_dir / f"train_{target}.csv",
                comments=_comment_lines(cfg, target=target))
    doc = {
        "kind": "fit_result",
        "target": target,
        **result.to_jsonable(),
        "mae": report.epsilon,
        "mae_m_points": report.m_points,
        "seed": cfg.seed,
        "config": cfg.echo,
    }
    _write_json(_fit_result_path(cfg, target), doc)

    m = result.model
    print(f"fit {target}: pi=({m.pi1:.4f}, {m.pi2:.4f}) "
          f"tau*=({m.tau1_star:.4f}, {m.tau2_star:.4f}) s "
          f"v*=({m.v1_star:.3f}, {m.v2_star:.3f}) % "
          f"cost={result.final_cost:.3e} mae={report.epsilon:.4f}")
    if not result.converged:
        print(f"warning: fit for {target} did not reach the gradient tolerance "
              f"(budget {cfg.fit.max_iters} iterations/start)", file=sys.stderr)
        return 1
    return 0


def cmd_grid(cfg: ProjectConfig, target: str, grid_target: str, resolution: int) -> int:
    comp = cfg.composite_for(target)
    if grid_target == "true":
        evaluand = comp
    else:
        evaluand = harden(_load_fitted_model(cfg, target))
    tau_grid = np.linspace(0.0, TAU_MAX, resolution)
    v_grid = np.linspace(0.0, V_MAX, resolution)
    matrix = grid_evaluate(evaluand, tau_grid, v_grid)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.output_dir / f"grid_{target}_{grid_target}.csv"
    with open(path, "w", newline="") as fh:
        for line in _comment_lines(cfg, target=target, grid_target=grid_target,
                                   rows="tau_f_s", columns="v_f_pct"):
            fh.write(f"# {line}\n")
        fh.write("tau_s," + ",".join(repr(float(v)) for v in v_grid) + "\n")
        for i, tau in enumerate(tau_grid):
            fh.write(repr(float(tau)) + "," + ",".join(repr(float(x)) for x in matrix[i]) + "\n")
    print(f"grid {target}/{grid_target}: {resolution}x{resolution} -> {path}")
    return 0


def cmd_mae(cfg: ProjectConfig, target: str) -> int:
    comp = cfg.composite_for(target)
    model = _load_fitted_model(cfg, target)
    report = mae(harden(model), comp, cfg.sampler.m_eval, cfg.seed)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_json(cfg.output_dir / f"mae_{target}.json", {
        "kind": "mae_report",
        "target": target,
        "epsilon": report.epsilon,
        "m_points": report.m_points,
        "seed": cfg.seed,
        "config": cfg.echo,
    })
    print(f"mae {target}: epsilon={report.epsilon:.4f} over {report.m_points} points")
    return 0


def cmd_sweep(cfg: ProjectConfig, target: str) -> int:
    comp = cfg.composite_for(target)
    model = _load_fitted_model(cfg, target)
    spec = cfg.uncertainty
    report = uncertainty_sweep(comp, model, spec,
                               sampler=cfg.sampler, smoothing=cfg.smoothing,
                               fit_config=cfg.fit)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    comments = _comment_lines(cfg, target=target, nominal_mae=repr(report.nominal_mae))
    sweep_long_csv(report, cfg.output_dir / f"sweep_{target}_long.csv", comments)
    sweep_summary_csv(report, cfg.output_dir / f"sweep_{target}_summary.csv", comments)
    for stats in report.levels:
        print(f"sweep {target} level {stats.level:g}: mean={stats.mean:.4f} "
              f"[{stats.p12_5:.4f}, {stats.p87_5:.4f}] skipped={stats.skipped}")

    if cfg.matrix_targets is not None:
        names = set(comp.names)
        if set(cfg.matrix_targets) <= names:
            mspec = dataclasses.replace(spec, targets=cfg.matrix_targets)
            mreport = uncertainty_matrix(comp, model, mspec)
            matrix_csv(mreport, cfg.output_dir / f"sweep_{target}_matrix.csv", comments)
            print(f"sweep {target} matrix over {cfg.matrix_targets[0]} x "
                  f"{cfg.matrix_targets[1]} written")
        else:
            print(f"warning: matrix targets {cfg.matrix_targets} not all present in "
                  f"composite {target}; matrix sweep skipped", file=sys.stderr)
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tripfit",
        description="Composite motor-protection modeling: trip-zone evaluation, "
                    "two-block regression, accuracy and uncertainty reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_motor=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="project config JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        if needs_motor:
            p.add_argument("--motor", required=True,
                           help="motor class letter or named composite")
        return p

    add("validate", "parse and validate the config, print effective values",
        needs_motor=False)
    add("fit", "sample training data, fit the two-block model, report MAE")
    grid = add("grid", "emit a CSV heatmap of a composite or fitted model")
    grid.add_argument("--target", choices=("true", "fitted"), default="true",
                      help="evaluate the true composite or the fitted model")
    grid.add_argument("--resolution", type=int, default=DEFAULT_GRID_RESOLUTION,
                      help="grid points per axis")
    add("mae", "recompute the MAE report for an existing fit")
    add("sweep", "Monte Carlo MAE sweep over load-fraction uncertainty levels")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed, out_override=args.out)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "fit":
            return cmd_fit(cfg, args.motor)
        if args.command == "grid":
            if args.resolution < 2:
                raise ConfigError("--resolution must be >= 2")
            return cmd_grid(cfg, args.motor, args.target, args.resolution)
        if args.command == "mae":
            return cmd_mae(cfg, args.motor)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.motor)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

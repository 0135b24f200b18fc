"""Approximation accuracy (MAE) and load-fraction uncertainty studies.

The accuracy metric is the mean absolute difference between two composite
protection functions over Latin hypercube evaluation points, drawn from a
stream disjoint from the training data.  The uncertainty study perturbs the
nominal load fractions by random relative factors (1 + gamma), rebuilds the
"actual" composite, and tracks how the MAE of a fixed fitted model degrades
as the perturbation level grows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .protection import CompositeProtection
from .regression import FitConfig, SimplifiedModel, SmoothingConfig, fit, harden
from .rng import rng_stream
from .sampling import SamplerConfig, lhs_box, sample_training


@dataclass(frozen=True)
class MaeReport:
    """Mean absolute error between two composites over m_points LHS points."""

    epsilon: float
    m_points: int
    seed: int
    errors: np.ndarray | None = None  # per-point |difference|, kept on request

    def __post_init__(self):
        if self.errors is not None:
            err = np.asarray(self.errors, dtype=float)
            err.setflags(write=False)
            object.__setattr__(self, "errors", err)
            if abs(float(err.mean()) - self.epsilon) > 1e-12:
                raise ValueError("epsilon must equal the mean of the retained errors")


@dataclass(frozen=True)
class UncertaintySpec:
    """Monte Carlo sweep over relative fraction-perturbation levels.

    gamma_levels are the maximum relative perturbations (level 0 is allowed
    and reproduces the nominal composite exactly); targets names the schemes
    to perturb (empty tuple = all).  With refit=False the nominal fit is
    scored against each perturbed truth; refit=True refits per trial.
    """

    gamma_levels: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    targets: tuple[str, ...] = ()
    trials: int = 200
    refit: bool = False
    seed: int = 0
    m_eval: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "gamma_levels", tuple(float(g) for g in self.gamma_levels))
        object.__setattr__(self, "targets", tuple(self.targets))
        for g in self.gamma_levels:
            if not (0.0 <= g < 1.0):
                raise ValueError(f"gamma levels must lie in [0, 1), got {g}")
        if self.trials < 30:
            raise ValueError("need at least 30 trials per level for interval reporting")
        if self.m_eval < 1:
            raise ValueError("m_eval must be >= 1")


@dataclass(frozen=True)
class LevelStats:
    level: float
    mean: float
    p12_5: float
    p87_5: float
    maes: np.ndarray
    skipped: int


@dataclass(frozen=True)
class SweepReport:
    levels: tuple[LevelStats, ...]
    nominal_mae: float
    targets: tuple[str, ...]
    seed: int
    m_eval: int
    trials: int


@dataclass(frozen=True)
class MatrixReport:
    """Mean MAE over pairs of perturbation levels for two target schemes."""

    target_a: str
    target_b: str
    levels: tuple[float, ...]
    mean_mae: np.ndarray  # (len(levels), len(levels)); rows follow target_a
    seed: int
    m_eval: int
    trials: int


def mae(
    approx: CompositeProtection,
    truth: CompositeProtection,
    m: int,
    seed: int,
    keep_errors: bool = False,
) -> MaeReport:
    """MAE between two composites over m Latin hypercube fault points."""
    if m < 1:
        raise ValueError("m must be >= 1")
    tau, v = lhs_box(rng_stream(seed, "eval"), m)
    errors = np.abs(approx.evaluate(tau, v) - truth.evaluate(tau, v))
    return MaeReport(float(errors.mean()), m, seed, errors if keep_errors else None)


def perturb_fractions(
    c: CompositeProtection,
    gammas: Mapping[str, float],
    renormalize: bool = True,
) -> CompositeProtection:
    """Scale targeted fractions by (1 + gamma); unnamed schemes keep gamma = 0.

    With renormalize the perturbed vector is rescaled to sum to 1.  Without
    it, the raw vector is kept but must stay in the [0.5, 1.5] sanity band.
    A gamma of exactly -1 (fraction becomes 0) is allowed; below -1 is not.
    An all-zero gamma map returns the composite unchanged.
    """
    unknown = set(gammas) - set(c.names)
    if unknown:
        raise ValueError(f"gamma targets not in composite: {sorted(unknown)}")
    if all(g == 0.0 for g in gammas.values()):
        return c
    scaled = []
    for scheme, pi in c.entries:
        g = float(gammas.get(scheme.name, 0.0))
        if g < -1.0:
            raise ValueError(f"gamma {g} for {scheme.name!r} would push its fraction below 0")
        scaled.append((scheme, pi * (1.0 + g)))
    total = sum(pi for _, pi in scaled)
    if renormalize:
        if total <= 0.0:
            raise ValueError("perturbed fractions sum to 0; cannot renormalize")
        return CompositeProtection(tuple((s, pi / total) for s, pi in scaled))
    if not (0.5 <= total <= 1.5):
        raise ValueError(
            f"perturbed fractions sum to {total:.6g}, outside the [0.5, 1.5] sanity band"
        )
    return CompositeProtection(tuple(scaled), require_unit_sum=False)


def _trial_mae(
    c_nominal: CompositeProtection,
    approx_vals: np.ndarray,
    tau: np.ndarray,
    v: np.ndarray,
    gammas: Mapping[str, float],
    refit_ctx: tuple[SamplerConfig, SmoothingConfig, FitConfig] | None,
    trial_rng: np.random.Generator,
) -> float:
    actual = perturb_fractions(c_nominal, gammas, renormalize=True)
    if refit_ctx is not None:
        sampler, smoothing, fit_cfg = refit_ctx
        trial_seed = int(trial_rng.integers(0, 2**63 - 1))
        data = sample_training(actual, replace(sampler, seed=trial_seed))
        refit_model = fit(data, smoothing, replace(fit_cfg, seed=trial_seed)).model
        approx_vals = harden(refit_model).evaluate(tau, v)
    return float(np.abs(approx_vals - actual.evaluate(tau, v)).mean())


def uncertainty_sweep(
    c_nominal: CompositeProtection,
    fitted: SimplifiedModel,
    spec: UncertaintySpec,
    sampler: SamplerConfig | None = None,
    smoothing: SmoothingConfig | None = None,
    fit_config: FitConfig | None = None,
) -> SweepReport:
    """MAE statistics of the fitted model against fraction-perturbed truths.

    Per level and trial, each targeted fraction gets an independent gamma
    drawn uniformly from [-level, +level]; the perturbed composite is
    renormalized.  Evaluation points are fixed for the whole sweep, so the
    zero level reproduces the nominal MAE with zero variance.  Trial RNG
    streams derive from (seed, level index, trial index).
    """
    targets = spec.targets if spec.targets else c_nominal.names
    missing = set(targets) - set(c_nominal.names)
    if missing:
        raise ValueError(f"sweep targets not in composite: {sorted(missing)}")
    refit_ctx = None
    if spec.refit:
        if sampler is None or smoothing is None or fit_config is None:
            raise ValueError("refit sweeps need sampler, smoothing and fit configs")
        refit_ctx = (sampler, smoothing, fit_config)

    tau, v = lhs_box(rng_stream(spec.seed, "sweep_eval"), spec.m_eval)
    approx_vals = harden(fitted).evaluate(tau, v)
    nominal_mae = float(np.abs(approx_vals - c_nominal.evaluate(tau, v)).mean())

    levels = []
    for li, level in enumerate(spec.gamma_levels):
        maes = []
        skipped = 0
        for t in range(spec.trials):
            rng = rng_stream(spec.seed, "sweep", li, t)
            gammas = {name: float(rng.uniform(-level, level)) for name in targets}
            try:
                maes.append(
                    _trial_mae(c_nominal, approx_vals, tau, v, gammas, refit_ctx, rng)
                )
            except ValueError:
                skipped += 1
        arr = np.array(maes)
        p12, p87 = (np.percentile(arr, [12.5, 87.5]) if arr.size else (np.nan, np.nan))
        levels.append(
            LevelStats(level, float(arr.mean()) if arr.size else np.nan,
                       float(p12), float(p87), arr, skipped)
        )
    return SweepReport(tuple(levels), nominal_mae, tuple(targets), spec.seed,
                       spec.m_eval, spec.trials)


def uncertainty_matrix(
    c_nominal: CompositeProtection,
    fitted: SimplifiedModel,
    spec: UncertaintySpec,
) -> MatrixReport:
    """Mean MAE grid when exactly two schemes carry independent uncertainty levels.

    Cell (i, j) perturbs spec.targets[0] at level i and spec.targets[1] at
    level j, all other fractions untouched (then renormalized).
    """
    if len(spec.targets) != 2:
        raise ValueError("matrix mode needs exactly two target schemes")
    target_a, target_b = spec.targets
    missing = {target_a, target_b} - set(c_nominal.names)
    if missing:
        raise ValueError(f"matrix targets not in composite: {sorted(missing)}")

    tau, v = lhs_box(rng_stream(spec.seed, "sweep_eval"), spec.m_eval)
    approx_vals = harden(fitted).evaluate(tau, v)

    n_levels = len(spec.gamma_levels)
    mean_mae = np.zeros((n_levels, n_levels))
    for i, level_a in enumerate(spec.gamma_levels):
        for j, level_b in enumerate(spec.gamma_levels):
            total = 0.0
            for t in range(spec.trials):
                rng = rng_stream(spec.seed, "matrix", i, j, t)
                gammas = {
                    target_a: float(rng.uniform(-level_a, level_a)),
                    target_b: float(rng.uniform(-level_b, level_b)),
                }
                actual = perturb_fractions(c_nominal, gammas, renormalize=True)
                total += float(np.abs(approx_vals - actual.evaluate(tau, v)).mean())
            mean_mae[i, j] = total / spec.trials
    return MatrixReport(target_a, target_b, spec.gamma_levels, mean_mae,
                        spec.seed, spec.m_eval, spec.trials)


def sweep_long_csv(report: SweepReport, path: str | Path, comments: list[str] | None = None) -> None:
    """One row per (level, trial): level,trial,mae."""
    with open(path, "w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "trial", "mae"])
        for stats in report.levels:
            for t, value in enumerate(stats.maes):
                writer.writerow([repr(stats.level), t, repr(float(value))])


def sweep_summary_csv(report: SweepReport, path: str | Path, comments: list[str] | None = None) -> None:
    """One row per level: level,mean,p12.5,p87.5."""
    with open(path, "w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "mean", "p12.5", "p87.5"])
        for stats in report.levels:
            writer.writerow([repr(stats.level), repr(stats.mean),
                             repr(stats.p12_5), repr(stats.p87_5)])


def matrix_csv(report: MatrixReport, path: str | Path, comments: list[str] | None = None) -> None:
    """Level-by-level grid of mean MAE; rows follow target_a, columns target_b."""
    with open(path, "w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"{report.target_a}\\{report.target_b}"]
                        + [repr(level) for level in report.levels])
        for i, level in enumerate(report.levels):
            writer.writerow([repr(level)] + [repr(float(x)) for x in report.mean_mae[i]])

"""Two-rectangle surrogate of a composite protection function.

The surrogate splits the motor load into two blocks with fractions pi1 and
pi2 = 1 - pi1; block i stays connected unless tau_f >= tau_i_star and
v_f <= v_i_star.  For fitting, each hard block indicator is smoothed with
logistic steps of configurable steepness, giving a differentiable least
squares cost minimized by a multistart bound-constrained quasi-Newton solver
(L-BFGS-B with analytic gradients) under tau in [0, 5] s, v in [0, 100] %,
pi1 in [0, 1].  Steepness continuation (fit at gentle slopes first, then
sharpen) avoids the vanishing gradients of nearly-hard steps.  Reported
errors always use the hard model; the smoothing is a fitting device only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .protection import TAU_MAX, V_MAX, CompositeProtection, ProtectionScheme, TripZone
from .rng import rng_stream
from .sampling import Dataset, lhs_unit

# Reduced parameter vector: (pi1, tau1_star, v1_star, tau2_star, v2_star),
# with pi2 eliminated as 1 - pi1.
_LO = np.array([0.0, 0.0, 0.0, 0.0, 0.0])
_HI = np.array([1.0, TAU_MAX, V_MAX, TAU_MAX, V_MAX])
_SPAN = _HI - _LO

PI_SUM_TOL = 1e-9


@dataclass(frozen=True)
class SimplifiedModel:
    """Two-block protection model parameters (pi1 + pi2 = 1)."""

    pi1: float
    tau1_star: float  # s
    v1_star: float    # % of nominal
    pi2: float
    tau2_star: float  # s
    v2_star: float    # % of nominal

    def __post_init__(self):
        if not (0.0 <= self.pi1 <= 1.0 and 0.0 <= self.pi2 <= 1.0):
            raise ValueError(f"fractions must lie in [0, 1], got {self.pi1}, {self.pi2}")
        if abs(self.pi1 + self.pi2 - 1.0) > PI_SUM_TOL:
            raise ValueError(f"pi1 + pi2 must equal 1, got {self.pi1 + self.pi2!r}")
        for tau in (self.tau1_star, self.tau2_star):
            if not (0.0 <= tau <= TAU_MAX):
                raise ValueError(f"tau_star must lie in [0, {TAU_MAX}], got {tau}")
        for v in (self.v1_star, self.v2_star):
            if not (0.0 <= v <= V_MAX):
                raise ValueError(f"v_star must lie in [0, {V_MAX}], got {v}")

    @classmethod
    def from_reduced(cls, theta: Sequence[float]) -> "SimplifiedModel":
        pi1, t1, v1, t2, v2 = (float(x) for x in theta)
        return cls(pi1, t1, v1, 1.0 - pi1, t2, v2)

    def as_reduced(self) -> np.ndarray:
        return np.array([self.pi1, self.tau1_star, self.v1_star, self.tau2_star, self.v2_star])

    def canonical(self) -> "SimplifiedModel":
        """Stable block order: tau1 <= tau2, ties broken by v1 >= v2."""
        key1 = (self.tau1_star, -self.v1_star)
        key2 = (self.tau2_star, -self.v2_star)
        if key1 <= key2:
            return self
        return SimplifiedModel(
            self.pi2, self.tau2_star, self.v2_star, self.pi1, self.tau1_star, self.v1_star
        )


def _default_schedule() -> tuple[tuple[float, float], ...]:
    # Three continuation stages at 0.2x, 1x and 5x the default steepness.
    return ((10.0, 0.4), (50.0, 2.0), (250.0, 10.0))


@dataclass(frozen=True)
class SmoothingConfig:
    """Logistic steepness (1/s for tau, 1/% for v) and optional continuation."""

    alpha_tau: float = 50.0
    alpha_v: float = 2.0
    continuation_schedule: tuple[tuple[float, float], ...] | None = field(
        default_factory=_default_schedule
    )

    def __post_init__(self):
        if self.alpha_tau <= 0.0 or self.alpha_v <= 0.0:
            raise ValueError("steepness parameters must be > 0")
        if self.continuation_schedule is not None:
            schedule = tuple((float(a), float(b)) for a, b in self.continuation_schedule)
            object.__setattr__(self, "continuation_schedule", schedule)
            if not schedule:
                raise ValueError("continuation_schedule must be None or non-empty")
            prev = (0.0, 0.0)
            for at, av in schedule:
                if at <= 0.0 or av <= 0.0:
                    raise ValueError("steepness parameters must be > 0")
                if at <= prev[0] or av <= prev[1]:
                    raise ValueError("continuation_schedule must increase in both components")
                prev = (at, av)

    def stages(self) -> tuple[tuple[float, float], ...]:
        """Per-stage (alpha_tau, alpha_v) pairs the solver walks through."""
        if self.continuation_schedule is not None:
            return self.continuation_schedule
        return ((self.alpha_tau, self.alpha_v),)


@dataclass(frozen=True)
class FitConfig:
    """Multistart solver budget and tolerances (in unit-scaled coordinates).

    gtol bounds the projected-gradient infinity norm that counts as
    converged; ptol is the relative cost stagnation tolerance of the stage
    solver.
    """

    n_starts: int = 20
    max_iters: int = 400
    gtol: float = 1e-5
    ptol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.gtol <= 0.0 or self.ptol <= 0.0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True)
class FitResult:
    model: SimplifiedModel
    final_cost: float
    converged: bool
    iterations: int
    start_index: int
    diagnostics: dict

    def to_jsonable(self) -> dict:
        return {
            "model": model_to_jsonable(self.model),
            "final_cost": self.final_cost,
            "converged": self.converged,
            "iterations": self.iterations,
            "start_index": self.start_index,
            "diagnostics": self.diagnostics,
        }


def model_to_jsonable(m: SimplifiedModel) -> dict:
    return {
        "pi1": m.pi1,
        "tau1_star_s": m.tau1_star,
        "v1_star_pct": m.v1_star,
        "pi2": m.pi2,
        "tau2_star_s": m.tau2_star,
        "v2_star_pct": m.v2_star,
    }


def model_from_jsonable(doc: dict) -> SimplifiedModel:
    return SimplifiedModel(
        doc["pi1"], doc["tau1_star_s"], doc["v1_star_pct"],
        doc["pi2"], doc["tau2_star_s"], doc["v2_star_pct"],
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Sign-split form: only exp of non-positive arguments, no overflow.
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def logistic(x, alpha: float):
    """Logistic step surrogate 1 / (1 + exp(-alpha x)), stable for huge |alpha x|."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    out = _sigmoid(alpha * np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


def smooth_block(tau_f, v_f, tau_star: float, v_star: float, s: SmoothingConfig):
    """Smoothed single-block connectivity: 1 - h(tau - tau*) (1 - h(v - v*))."""
    tau_f = np.asarray(tau_f, dtype=float)
    v_f = np.asarray(v_f, dtype=float)
    ht = _sigmoid(s.alpha_tau * (tau_f - tau_star))
    hv = _sigmoid(s.alpha_v * (v_f - v_star))
    out = 1.0 - ht * (1.0 - hv)
    return out if out.ndim else float(out)


def smooth_model(tau_f, v_f, m: SimplifiedModel, s: SmoothingConfig):
    """Smoothed two-block model value pi1 B1 + pi2 B2."""
    b1 = smooth_block(tau_f, v_f, m.tau1_star, m.v1_star, s)
    b2 = smooth_block(tau_f, v_f, m.tau2_star, m.v2_star, s)
    return m.pi1 * b1 + m.pi2 * b2


def hard_values(m: SimplifiedModel, tau_f, v_f):
    """Hard (step) two-block model value; broadcasts over array inputs."""
    tau_f = np.asarray(tau_f, dtype=float)
    v_f = np.asarray(v_f, dtype=float)
    in1 = (tau_f >= m.tau1_star) & (v_f <= m.v1_star)
    in2 = (tau_f >= m.tau2_star) & (v_f <= m.v2_star)
    out = 1.0 - m.pi1 * in1 - m.pi2 * in2
    return out if out.ndim else float(out)


def hard_mse(m: SimplifiedModel, d: Dataset) -> float:
    """Mean squared error of the hard model on a dataset."""
    r = hard_values(m, d.tau_f, d.v_f) - d.y
    return float(np.mean(r * r))


def _residual_parts(theta, tau, v, y, alpha_tau, alpha_v):
    pi1, t1, v1, t2, v2 = theta
    ht1 = _sigmoid(alpha_tau * (tau - t1))
    hv1 = _sigmoid(alpha_v * (v - v1))
    ht2 = _sigmoid(alpha_tau * (tau - t2))
    hv2 = _sigmoid(alpha_v * (v - v2))
    b1 = 1.0 - ht1 * (1.0 - hv1)
    b2 = 1.0 - ht2 * (1.0 - hv2)
    r = pi1 * b1 + (1.0 - pi1) * b2 - y
    return r, b1, b2, ht1, hv1, ht2, hv2


def _cost_reduced(theta, tau, v, y, alpha_tau, alpha_v) -> float:
    r = _residual_parts(theta, tau, v, y, alpha_tau, alpha_v)[0]
    return 0.5 * float(np.mean(r * r))


def _cost_grad_reduced(theta, tau, v, y, alpha_tau, alpha_v):
    pi1 = theta[0]
    r, b1, b2, ht1, hv1, ht2, hv2 = _residual_parts(theta, tau, v, y, alpha_tau, alpha_v)
    # dJ/dtheta_k = mean(r * dFhat/dtheta_k); dh/dx_star = -alpha h (1 - h).
    g = np.empty(5)
    g[0] = float(np.mean(r * (b1 - b2)))
    g[1] = pi1 * alpha_tau * float(np.mean(r * ht1 * (1.0 - ht1) * (1.0 - hv1)))
    g[2] = -pi1 * alpha_v * float(np.mean(r * ht1 * hv1 * (1.0 - hv1)))
    g[3] = (1.0 - pi1) * alpha_tau * float(np.mean(r * ht2 * (1.0 - ht2) * (1.0 - hv2)))
    g[4] = -(1.0 - pi1) * alpha_v * float(np.mean(r * ht2 * hv2 * (1.0 - hv2)))
    return 0.5 * float(np.mean(r * r)), g


def cost(m: SimplifiedModel, d: Dataset, s: SmoothingConfig) -> float:
    """Smoothed least squares cost J = (1/2N) sum (Fhat - y)^2 at s's base steepness."""
    if len(d) == 0:
        raise ValueError("dataset is empty")
    return _cost_reduced(m.as_reduced(), d.tau_f, d.v_f, d.y, s.alpha_tau, s.alpha_v)


def cost_gradient(m: SimplifiedModel, d: Dataset, s: SmoothingConfig) -> np.ndarray:
    """Analytic gradient of J in the reduced (pi1, tau1, v1, tau2, v2) coordinates."""
    if len(d) == 0:
        raise ValueError("dataset is empty")
    return _cost_grad_reduced(m.as_reduced(), d.tau_f, d.v_f, d.y, s.alpha_tau, s.alpha_v)[1]


def fit(d: Dataset, s: SmoothingConfig, f: FitConfig) -> FitResult:
    """Fit the two-block model by multistart bounded quasi-Newton descent.

    Each Latin-hypercube start is driven through the steepness continuation
    stages (warm-starting each stage from the last; the final stage falls
    back to the raw start if continuation degraded its cost).  A start counts
    as converged when its final projected-gradient norm is at most gtol.  The
    winner is the lowest final-stage cost, ties broken by start index.
    Deterministic given (d, s, f).
    """
    if len(d) == 0:
        raise ValueError("dataset is empty")
    stages = s.stages()
    tau, v, y = d.tau_f, d.v_f, d.y

    def fun_grad(u, alpha_tau, alpha_v):
        fval, g = _cost_grad_reduced(_LO + u * _SPAN, tau, v, y, alpha_tau, alpha_v)
        return fval, g * _SPAN

    starts = lhs_unit(rng_stream(f.seed, "multistart"), f.n_starts, 5)
    bounds = [(0.0, 1.0)] * 5
    options = {"maxiter": f.max_iters, "ftol": f.ptol, "gtol": f.gtol}

    best = None  # (final_cost, start_index, u, total_iters, converged)
    start_costs: list[float] = []
    start_iters: list[int] = []
    start_conv: list[bool] = []
    for k in range(f.n_starts):
        u = starts[k]
        total_it = 0
        for si, stage in enumerate(stages):
            if si == len(stages) - 1 and si > 0:
                if fun_grad(starts[k], *stage)[0] < fun_grad(u, *stage)[0]:
                    u = starts[k]  # continuation hurt at final steepness; restart clean
            res = minimize(fun_grad, u, args=stage, jac=True, method="L-BFGS-B",
                           bounds=bounds, options=options)
            u = np.clip(res.x, 0.0, 1.0)
            total_it += int(res.nit)
        fval, g = fun_grad(u, *stages[-1])
        pg_norm = float(np.abs(u - np.clip(u - g, 0.0, 1.0)).max())
        converged = pg_norm <= f.gtol
        start_costs.append(fval)
        start_iters.append(total_it)
        start_conv.append(converged)
        if best is None or fval < best[0]:
            best = (fval, k, u, total_it, converged)

    final_cost, start_index, u_best, iters, converged = best
    model = SimplifiedModel.from_reduced(_LO + u_best * _SPAN).canonical()
    alpha_final = stages[-1]
    # Recompute at the canonical parameter layout so the stored cost matches
    # cost(model, d) bit-for-bit.
    final_cost = _cost_reduced(model.as_reduced(), tau, v, y, *alpha_final)
    diagnostics = {
        "start_costs": start_costs,
        "start_iterations": start_iters,
        "start_converged": start_conv,
        "alpha_stages": [list(stage) for stage in stages],
        "alpha_final": list(alpha_final),
    }
    return FitResult(model, final_cost, converged, iters, start_index, diagnostics)


def harden(m: SimplifiedModel) -> CompositeProtection:
    """The fitted model as an exact two-entry composite of rectangle zones."""
    entries = (
        (ProtectionScheme("block-1", TripZone.rectangle(m.tau1_star, m.v1_star)), m.pi1),
        (ProtectionScheme("block-2", TripZone.rectangle(m.tau2_star, m.v2_star)), m.pi2),
    )
    return CompositeProtection(entries)


def brute_force_fit(d: Dataset, grid_resolution: int | tuple[int, int]) -> SimplifiedModel:
    """Exhaustive hard-model MSE minimizer over a coarse parameter grid.

    pi1 runs over {0, 0.05, ..., 1}; tau_star and v_star over uniform grids
    with grid_resolution points per axis.  Ties resolve to the canonically
    ordered model with the lowest flat grid index.  Independent of fit(): no
    smoothing, no gradients.
    """
    if len(d) == 0:
        raise ValueError("dataset is empty")
    if isinstance(grid_resolution, int):
        r_tau = r_v = grid_resolution
    else:
        r_tau, r_v = grid_resolution
    if r_tau < 2 or r_v < 2:
        raise ValueError("grid_resolution must be >= 2 per axis")
    tau_grid = np.linspace(0.0, TAU_MAX, r_tau)
    v_grid = np.linspace(0.0, V_MAX, r_v)
    pi_grid = np.round(np.arange(21) * 0.05, 2)

    n = len(d)
    t_ind = d.tau_f[None, :] >= tau_grid[:, None]   # (r_tau, n)
    v_ind = d.v_f[None, :] <= v_grid[:, None]       # (r_v, n)
    blocks = 1.0 - (t_ind[:, None, :] & v_ind[None, :, :]).reshape(r_tau * r_v, n)
    k = blocks.shape[0]

    prod = (blocks @ blocks.T) / n                  # (k, k) mean cross products
    cross_y = (blocks @ d.y) / n                    # (k,)
    y_sq = float(np.mean(d.y * d.y))
    diag = np.diag(prod)

    best_val = np.inf
    for pi1 in pi_grid:
        pi2 = 1.0 - pi1
        mse = (
            pi1 * pi1 * diag[:, None]
            + pi2 * pi2 * diag[None, :]
            + 2.0 * pi1 * pi2 * prod
            - 2.0 * pi1 * cross_y[:, None]
            - 2.0 * pi2 * cross_y[None, :]
            + y_sq
        )
        best_val = min(best_val, float(mse.min()))

    candidates = []
    for p_idx, pi1 in enumerate(pi_grid):
        pi2 = 1.0 - pi1
        mse = (
            pi1 * pi1 * diag[:, None]
            + pi2 * pi2 * diag[None, :]
            + 2.0 * pi1 * pi2 * prod
            - 2.0 * pi1 * cross_y[:, None]
            - 2.0 * pi2 * cross_y[None, :]
            + y_sq
        )
        for i, j in np.argwhere(mse == best_val):
            model = SimplifiedModel.from_reduced(
                (pi1, tau_grid[i // r_v], v_grid[i % r_v], tau_grid[j // r_v], v_grid[j % r_v])
            ).canonical()
            flat_index = (p_idx * k + i) * k + j
            candidates.append(
                (
                    model.tau1_star, -model.v1_star, model.tau2_star, -model.v2_star,
                    model.pi1, flat_index, model,
                )
            )
    return min(candidates)[-1]

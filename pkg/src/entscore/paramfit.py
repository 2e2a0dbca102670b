"""Fitting the affinity matrix and mismatch penalty to human ratings.

The optimizer is a per-dimension Tree-structured Parzen Estimator: past
trials are split at the gamma-quantile of the objective, a Parzen density
(Gaussian kernels plus a uniform prior component) is built over each split,
candidates are drawn from the "good" density, and the candidate maximizing
the good/bad density ratio is evaluated next. The 26 searched parameters are
the 25 row-major affinity entries followed by the penalty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from . import stats
from .types import NUM_TYPES, DegenerateDataError, ScoreParams, W_FLOOR

PARAM_BOUNDS: tuple[tuple[float, float], ...] = tuple(
    [(W_FLOOR, 1.0)] * (NUM_TYPES * NUM_TYPES) + [(0.0, 1.0)]
)

_OBJECTIVES: dict[str, Callable[[list[float], list[float]], float]] = {
    "pearson": stats.pearson,
    "kendall": stats.kendall_tau_b,
    "spearman": stats.spearman,
}


@dataclass(frozen=True, slots=True)
class TrialRecord:
    """One observation: a parameter vector and its training objective."""

    theta: tuple[float, ...]
    objective: float


@dataclass(frozen=True, slots=True)
class FitConfig:
    n_trials: int = 300
    n_startup: int = 20
    gamma: float = 0.25
    n_candidates: int = 24
    seed: int = 0
    objective_kind: str = "pearson"

    def __post_init__(self) -> None:
        if self.n_trials < 1 or self.n_startup < 1 or self.n_candidates < 1:
            raise ValueError("n_trials, n_startup, and n_candidates must be positive")
        if self.n_startup >= self.n_trials:
            raise ValueError("n_startup must be smaller than n_trials")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")
        if self.objective_kind not in _OBJECTIVES:
            raise ValueError(f"objective_kind must be one of {sorted(_OBJECTIVES)}")


def theta_to_params(theta: Sequence[float]) -> ScoreParams:
    """Unpack a 26-vector (25 row-major W entries, then p) into ScoreParams."""
    if len(theta) != NUM_TYPES * NUM_TYPES + 1:
        raise ValueError(f"theta must have {NUM_TYPES * NUM_TYPES + 1} entries")
    W = np.asarray(theta[:-1], dtype=np.float64).reshape(NUM_TYPES, NUM_TYPES)
    return ScoreParams(W, theta[-1])


def params_to_theta(params: ScoreParams) -> tuple[float, ...]:
    return tuple(float(v) for v in params.W.ravel()) + (params.p,)


class _ParzenDensity:
    """Kernel mixture over observations plus a uniform prior over the bound."""

    def __init__(self, values: np.ndarray, lo: float, hi: float):
        self.lo = lo
        self.hi = hi
        width = hi - lo
        order = np.sort(values)
        k = len(order)
        # Floor anneals from wide to the 1%-of-width minimum as observations
        # accumulate; prevents early collapse onto the first decent cluster.
        floor = max(width / min(100.0, k + 1.0), 0.01 * width)
        bandwidths = np.empty(k)
        for i in range(k):
            left = order[i] - order[i - 1] if i > 0 else math.inf
            right = order[i + 1] - order[i] if i + 1 < k else math.inf
            spacing = min(left, right)  # nearest-neighbour gap
            if not math.isfinite(spacing):
                spacing = width
            bandwidths[i] = max(spacing, floor)
        self.mus = order
        self.sigmas = bandwidths
        self.uniform_pdf = 1.0 / width

    def sample(self, rng: np.random.Generator) -> float:
        component = int(rng.integers(0, len(self.mus) + 1))
        if component == len(self.mus):
            return float(rng.uniform(self.lo, self.hi))
        draw = rng.normal(self.mus[component], self.sigmas[component])
        return float(min(self.hi, max(self.lo, draw)))

    def log_pdf(self, x: float) -> float:
        z = (x - self.mus) / self.sigmas
        kernel = np.exp(-0.5 * z * z) / (self.sigmas * math.sqrt(2.0 * math.pi))
        total = (float(kernel.sum()) + self.uniform_pdf) / (len(self.mus) + 1)
        return math.log(total)


def _uniform_theta(bounds, rng: np.random.Generator) -> tuple[float, ...]:
    return tuple(float(rng.uniform(lo, hi)) for lo, hi in bounds)


def tpe_suggest(
    history: list[TrialRecord],
    config: FitConfig,
    rng: np.random.Generator,
    bounds: Sequence[tuple[float, float]] | None = None,
) -> tuple[float, ...]:
    """Propose the next parameter vector given past trials.

    Uniform within bounds during startup or when either objective split is
    too small to model (< 2 observations).
    """
    if bounds is None:
        bounds = PARAM_BOUNDS
    if len(history) < config.n_startup:
        return _uniform_theta(bounds, rng)

    n_good = math.ceil(config.gamma * len(history))
    if n_good < 2 or len(history) - n_good < 2:
        return _uniform_theta(bounds, rng)

    ranked = sorted(range(len(history)), key=lambda i: (-history[i].objective, i))
    good = [history[i] for i in ranked[:n_good]]
    bad = [history[i] for i in ranked[n_good:]]

    good_densities = []
    bad_densities = []
    for d, (lo, hi) in enumerate(bounds):
        good_densities.append(_ParzenDensity(np.array([t.theta[d] for t in good]), lo, hi))
        bad_densities.append(_ParzenDensity(np.array([t.theta[d] for t in bad]), lo, hi))

    best_theta: tuple[float, ...] | None = None
    best_ratio = -math.inf
    for _ in range(config.n_candidates):
        theta = tuple(density.sample(rng) for density in good_densities)
        ratio = sum(
            good_densities[d].log_pdf(x) - bad_densities[d].log_pdf(x)
            for d, x in enumerate(theta)
        )
        if ratio > best_ratio:
            best_ratio = ratio
            best_theta = theta
    return best_theta


class ScoreBackend(Protocol):
    """How fit() evaluates candidate parameters against rated pairs."""

    def prepare(self, pairs: Sequence) -> object: ...

    def score(self, prepared: object, params: ScoreParams) -> list[float]: ...


@dataclass(frozen=True)
class FitResult:
    params: ScoreParams
    objective: float
    history: list[TrialRecord]


def fit(train: Sequence, backend: ScoreBackend, config: FitConfig) -> FitResult:
    """Search for the (W, p) maximizing correlation with human ratings.

    Deterministic given config.seed. A trial whose metric output is constant
    (correlation undefined for that draw) is recorded with objective -1.
    """
    if len(train) < 2:
        raise DegenerateDataError("degenerate training labels: need at least 2 rated pairs")
    humans = [pair.human for pair in train]
    if min(humans) == max(humans):
        raise DegenerateDataError("degenerate training labels: constant human ratings")

    objective_fn = _OBJECTIVES[config.objective_kind]
    rng = np.random.default_rng(config.seed)
    prepared = backend.prepare(train)

    history: list[TrialRecord] = []
    for _ in range(config.n_trials):
        theta = tpe_suggest(history, config, rng)
        scores = backend.score(prepared, theta_to_params(theta))
        try:
            objective = objective_fn(list(scores), humans)
        except DegenerateDataError:
            objective = -1.0
        history.append(TrialRecord(theta, float(objective)))

    best = max(history, key=lambda t: t.objective)
    return FitResult(theta_to_params(best.theta), best.objective, history)


def write_trials_csv(history: Sequence[TrialRecord], path) -> None:
    """Trials log: "trial,objective,theta_0..theta_N", 6 decimal places."""
    if not history:
        raise ValueError("empty trial history")
    dim = len(history[0].theta)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("trial,objective," + ",".join(f"theta_{d}" for d in range(dim)) + "\n")
        for i, trial in enumerate(history):
            row = [str(i), f"{trial.objective:.6f}"] + [f"{x:.6f}" for x in trial.theta]
            fh.write(",".join(row) + "\n")

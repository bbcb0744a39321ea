"""Monte-Carlo loss benchmark over (p, n) grids and fixed-ratio sequences.

Each iteration draws a population covariance (fixed identity or a fresh
normalized Wishart), draws an observation matrix, and scores every requested
estimator against the truth with the normalized squared Frobenius loss.
Per-iteration seeds are derived from (base_seed, p, n, iteration) through a
splittable seed sequence, so results are bit-identical no matter how many
workers run the cells or in which order.

Estimator ids:

* ``EC`` - the raw sample covariance,
* ``LW_u`` / ``LW_r`` / ``LW_m`` / ``LW_s`` - the shrinkage variants,
* ``LW_ex`` - the fixed-coefficient oracle built from analytic scalars
  (Gaussian or single-nu Student populations only),
* ``LW_op`` - the per-sample in-span optimum, the theoretical bound.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    Distribution,
    Gaussian,
    MixedStudent,
    PopulationModel,
    identity,
    sample_covariance,
)
from .oracle import analytic_scalars, loss, optimal_sigma_starstar, oracle_sigma_star
from .sampling import random_wishart_sigma, sample
from .shrinkage import estimate

ESTIMATORS = ("EC", "LW_u", "LW_r", "LW_m", "LW_s", "LW_ex", "LW_op")

SIGMA_MODES = ("identity", "wishart")

RECORD_COLUMNS = (
    "estimator",
    "p",
    "n",
    "c",
    "distribution",
    "sigma_mode",
    "n_mc",
    "mean_loss",
    "std_err",
    "mean_time_s",
)

PAIR_COLUMNS = (
    "estimator_a",
    "estimator_b",
    "p",
    "n",
    "mean_diff",
    "se_diff",
    "log10_diff_raw",
    "log10_diff_rel",
)

DEFAULT_GRID_VALUES = tuple(range(5, 100, 2))

DEFAULT_N_MC = 10_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved description of one benchmark run.

    Grid mode sweeps the cartesian product p_values x n_values; convergence
    mode fixes the concentration `ratio` = p/n and sweeps n_values with
    p = round(ratio * n).
    """

    mode: str
    distribution: Distribution = field(default_factory=Gaussian)
    sigma_mode: str = "identity"
    p_values: tuple[int, ...] = DEFAULT_GRID_VALUES
    n_values: tuple[int, ...] = DEFAULT_GRID_VALUES
    ratio: float | None = None
    n_mc: int = DEFAULT_N_MC
    estimators: tuple[str, ...] = ESTIMATORS
    base_seed: int = 0
    mean_shift: float = 0.0
    out_path: str | None = None

    def __post_init__(self):
        if self.mode not in ("grid", "convergence"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.sigma_mode not in SIGMA_MODES:
            raise ValueError(f"unknown sigma_mode {self.sigma_mode!r}")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ValueError(f"unknown estimators: {unknown}")
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        if self.n_mc < 1:
            raise ValueError("n_mc must be >= 1")
        if self.mode == "convergence" and self.ratio is None:
            raise ValueError("convergence mode requires a ratio c")
        if "LW_ex" in self.estimators and isinstance(self.distribution, MixedStudent):
            raise ValueError(
                "LW_ex needs analytic oracle scalars, which the mixed-student "
                "population does not have"
            )

    def cells(self) -> list[tuple[int, int]]:
        """(p, n) cells in the fixed order used for seeding and output."""
        if self.mode == "grid":
            return [(p, n) for p in self.p_values for n in self.n_values]
        return [(max(1, int(math.floor(self.ratio * n + 0.5))), n) for n in self.n_values]


@dataclass(frozen=True)
class LossRecord:
    """Aggregated loss of one estimator on one (p, n) cell."""

    estimator: str
    p: int
    n: int
    distribution: str
    sigma_mode: str
    n_mc: int
    mean_loss: float
    std_err: float
    mean_time_s: float

    @property
    def c(self) -> float:
        return self.p / self.n


@dataclass(frozen=True)
class PairRecord:
    """Paired loss difference of two estimators on one cell.

    `log10_diff_raw` compares the raw mean losses; `log10_diff_rel` first
    subtracts the cell's LW_op mean loss from both (the bound-relative
    reading).  Either is NaN when a log argument is not positive.
    """

    estimator_a: str
    estimator_b: str
    p: int
    n: int
    mean_diff: float
    se_diff: float
    log10_diff_raw: float
    log10_diff_rel: float


@dataclass(frozen=True)
class IterationResult:
    losses: dict[str, float]
    times: dict[str, float]
    intensities: dict[str, float]


def iteration_seed(base_seed: int, p: int, n: int, iteration: int) -> int:
    """Stable 64-bit stream seed for one Monte-Carlo iteration."""
    ss = np.random.SeedSequence((base_seed, p, n, iteration))
    return int(ss.generate_state(1, np.uint64)[0])


def split_seed(seed: int, count: int) -> list[int]:
    """Derive `count` independent child seeds from one stream seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, np.uint64)]


def _variant_of(estimator: str) -> str:
    return estimator.rsplit("_", 1)[1]


def run_iteration(
    p: int,
    n: int,
    distribution: Distribution,
    sigma_mode: str,
    estimators: tuple[str, ...],
    seed: int,
    mean_shift: float = 0.0,
    precomputed=None,
) -> IterationResult:
    """Draw one population + sample and score the requested estimators.

    `precomputed` may carry the analytic oracle scalars when the population
    covariance is fixed across iterations; under per-iteration Wishart draws
    the scalars are recomputed here from the fresh Sigma.
    """
    sigma_seed, x_seed = split_seed(seed, 2)
    if sigma_mode == "wishart":
        sigma = random_wishart_sigma(p, sigma_seed)
    else:
        sigma = identity(p)
    mean = np.full(p, mean_shift) if mean_shift else None
    model = PopulationModel(sigma, distribution, mean)
    x = sample(model, n, x_seed)

    losses: dict[str, float] = {}
    times: dict[str, float] = {}
    intensities: dict[str, float] = {}
    for est in estimators:
        start = time.perf_counter()
        if est == "EC":
            matrix = sample_covariance(x)
        elif est == "LW_ex":
            scalars = precomputed if precomputed is not None else analytic_scalars(model, n)
            matrix = oracle_sigma_star(scalars, sample_covariance(x))
        elif est == "LW_op":
            matrix = optimal_sigma_starstar(sigma, sample_covariance(x)).sigma_starstar
        else:
            result = estimate(x, _variant_of(est))
            matrix = result.estimate
            intensities[est] = result.shrinkage_intensity
        times[est] = time.perf_counter() - start
        losses[est] = loss(matrix, sigma)
    return IterationResult(losses, times, intensities)


def _aggregate_cell(
    p: int, n: int, config: ExperimentConfig
) -> tuple[list[LossRecord], list[PairRecord], float, float]:
    """Run all iterations of one cell and reduce in a fixed order."""
    ests = config.estimators
    sample_losses = {e: np.empty(config.n_mc) for e in ests}
    sample_times = {e: 0.0 for e in ests}
    min_intensity, max_intensity = math.inf, -math.inf

    fixed_scalars = None
    if "LW_ex" in ests and config.sigma_mode == "identity":
        model = PopulationModel(identity(p), config.distribution)
        fixed_scalars = analytic_scalars(model, n)

    for i in range(config.n_mc):
        out = run_iteration(
            p,
            n,
            config.distribution,
            config.sigma_mode,
            ests,
            iteration_seed(config.base_seed, p, n, i),
            config.mean_shift,
            precomputed=fixed_scalars,
        )
        for e in ests:
            sample_losses[e][i] = out.losses[e]
            sample_times[e] += out.times[e]
        for w in out.intensities.values():
            min_intensity = min(min_intensity, w)
            max_intensity = max(max_intensity, w)

    label = config.distribution.label
    records = []
    for e in ests:
        vals = sample_losses[e]
        se = float(np.std(vals, ddof=1) / math.sqrt(config.n_mc)) if config.n_mc > 1 else 0.0
        records.append(
            LossRecord(
                e, p, n, label, config.sigma_mode, config.n_mc,
                float(np.mean(vals)), se, sample_times[e] / config.n_mc,
            )
        )

    op_mean = float(np.mean(sample_losses["LW_op"])) if "LW_op" in ests else None
    pairs = []
    for ia, a in enumerate(ests):
        for b in ests[ia + 1 :]:
            diff = sample_losses[a] - sample_losses[b]
            se = float(np.std(diff, ddof=1) / math.sqrt(config.n_mc)) if config.n_mc > 1 else 0.0
            mean_a = float(np.mean(sample_losses[a]))
            mean_b = float(np.mean(sample_losses[b]))
            raw = _log10_diff(mean_a, mean_b)
            rel = (
                _log10_diff(mean_a - op_mean, mean_b - op_mean)
                if op_mean is not None
                else math.nan
            )
            pairs.append(PairRecord(a, b, p, n, float(np.mean(diff)), se, raw, rel))
    return records, pairs, min_intensity, max_intensity


def _log10_diff(a: float, b: float) -> float:
    if a > 0.0 and b > 0.0:
        return math.log10(a) - math.log10(b)
    return math.nan


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    records: list[LossRecord]
    pairs: list[PairRecord]
    min_intensity: float
    max_intensity: float


def _run_cells(config: ExperimentConfig, threads: int) -> RunResult:
    cells = config.cells()
    records: list[LossRecord] = []
    pairs: list[PairRecord] = []
    lo, hi = math.inf, -math.inf
    tasks = [(p, n, config) for p, n in cells]
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(_cell_task, tasks))
    else:
        outs = [_cell_task(t) for t in tasks]
    for recs, prs, cello, cellhi in outs:
        records.extend(recs)
        pairs.extend(prs)
        lo, hi = min(lo, cello), max(hi, cellhi)
    return RunResult(config, records, pairs, lo, hi)


def _cell_task(args) -> tuple[list[LossRecord], list[PairRecord], float, float]:
    p, n, config = args
    try:
        return _aggregate_cell(p, n, config)
    except Exception as exc:
        raise RuntimeError(f"cell (p={p}, n={n}) failed: {exc}") from exc


def run_grid(config: ExperimentConfig, threads: int = 1) -> RunResult:
    """Sweep the full (p, n) grid of the config."""
    if config.mode != "grid":
        raise ValueError("config mode must be 'grid'")
    return _run_cells(config, threads)


def run_convergence(config: ExperimentConfig, threads: int = 1) -> RunResult:
    """Sweep n at fixed concentration p/n = ratio."""
    if config.mode != "convergence":
        raise ValueError("config mode must be 'convergence'")
    return _run_cells(config, threads)


def run(config: ExperimentConfig, threads: int = 1) -> RunResult:
    return run_grid(config, threads) if config.mode == "grid" else run_convergence(config, threads)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def records_csv_lines(records: list[LossRecord]) -> list[str]:
    lines = [",".join(RECORD_COLUMNS)]
    for r in records:
        lines.append(
            ",".join(
                (
                    r.estimator,
                    str(r.p),
                    str(r.n),
                    _fmt(r.c),
                    r.distribution,
                    r.sigma_mode,
                    str(r.n_mc),
                    _fmt(r.mean_loss),
                    _fmt(r.std_err),
                    _fmt(r.mean_time_s),
                )
            )
        )
    return lines


def pairs_csv_lines(pairs: list[PairRecord]) -> list[str]:
    lines = [",".join(PAIR_COLUMNS)]
    for r in pairs:
        lines.append(
            ",".join(
                (
                    r.estimator_a,
                    r.estimator_b,
                    str(r.p),
                    str(r.n),
                    _fmt(r.mean_diff),
                    _fmt(r.se_diff),
                    _fmt(r.log10_diff_raw),
                    _fmt(r.log10_diff_rel),
                )
            )
        )
    return lines


def write_csv(result: RunResult, path: str) -> tuple[str, str]:
    """Write the loss table and its pairwise-difference sidecar.

    Returns (records_path, pairs_path).  The sidecar gets a `_pairs` suffix
    before the extension.
    """
    stem, ext = os.path.splitext(path)
    pairs_path = f"{stem}_pairs{ext}"
    with open(path, "w") as fh:
        fh.write("\n".join(records_csv_lines(result.records)) + "\n")
    with open(pairs_path, "w") as fh:
        fh.write("\n".join(pairs_csv_lines(result.pairs)) + "\n")
    return path, pairs_path

"""Grid studies of training on flipped labels.

Two grids:

* efficiency — symmetric noise (gamma1 == gamma0 == n/2) versus training-set
  size: how many extra samples does a given noise level cost?
* flip-ratio — fixed total noise split asymmetrically (gamma0 == ratio *
  gamma1) at a fixed training size: how much does the corrected decision
  threshold buy over the naive 0.5?

Every cell samples a random problem, corrupts the training labels, trains a
fresh network on the observed labels, and scores it on clean-labeled test
data at both the corrected and the naive threshold, next to the
optimal-rule ceiling.  The problem and the test set depend only on
(base_seed, run), so all cells of a run are paired and their differences
are common-random-number comparisons; training data, flips and
initialization are per-cell.  Cells are pure functions of (config,
coordinates), which makes grids safe to fan out over a process pool and
keeps the output byte-identical for any --jobs value.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat

import numpy as np

from . import mlp, synthdata
from .calculus import ClassPriors, NoiseParams, propagate_priors, threshold_from_priors
from .seeding import derive_seed

RESULTS_FIELDS = (
    "experiment", "n", "gamma1", "gamma0", "ratio", "train_size", "run",
    "threshold", "acc_corrected", "acc_naive", "bayes_ceiling", "seed",
)
SUMMARY_FIELDS = (
    "experiment", "n", "ratio", "train_size",
    "mean_corrected", "se_corrected", "mean_naive", "se_naive", "mean_ceiling",
)


def _noise_for_ratio(n: float, ratio: float) -> NoiseParams:
    """Split total noise n into gamma0 = ratio * gamma1."""
    return NoiseParams(n / (1.0 + ratio), n * ratio / (1.0 + ratio))


@dataclass(frozen=True)
class EfficiencyGridConfig:
    noise_levels: tuple[float, ...] = (0.0, 0.2, 0.4, 0.8)
    training_sizes: tuple[int, ...] = (200, 2000, 20000)
    runs: int = 10
    test_size: int = 20000
    separation_scale: float = 2.5
    base_seed: int = 20250
    epochs: int = 40
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "noise_levels", tuple(float(v) for v in self.noise_levels))
        object.__setattr__(self, "training_sizes", tuple(int(v) for v in self.training_sizes))
        _check_grid_common(self)
        for n in self.noise_levels:
            NoiseParams(n / 2.0, n / 2.0)  # rejects n outside [0, 1)
        if not self.training_sizes or any(s < 1 for s in self.training_sizes):
            raise ValueError(f"training_sizes must be >= 1, got {self.training_sizes}")


@dataclass(frozen=True)
class FlipRatioGridConfig:
    noise_levels: tuple[float, ...] = (0.1, 0.4)
    flip_ratios: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    runs: int = 20
    train_size: int = 4000
    test_size: int = 20000
    separation_scale: float = 2.5
    base_seed: int = 20251
    epochs: int = 40
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "noise_levels", tuple(float(v) for v in self.noise_levels))
        object.__setattr__(self, "flip_ratios", tuple(float(v) for v in self.flip_ratios))
        _check_grid_common(self)
        if self.train_size < 1:
            raise ValueError(f"train_size must be >= 1, got {self.train_size}")
        if not self.flip_ratios or any(not r > 0.0 for r in self.flip_ratios):
            raise ValueError(f"flip_ratios must be > 0, got {self.flip_ratios}")
        for n in self.noise_levels:
            for r in self.flip_ratios:
                _noise_for_ratio(n, r)  # rejects any (n, ratio) with invalid flip rates


def _check_grid_common(cfg) -> None:
    if not cfg.noise_levels:
        raise ValueError("noise_levels must not be empty")
    if cfg.runs < 1:
        raise ValueError(f"runs must be >= 1, got {cfg.runs}")
    if cfg.test_size < 1:
        raise ValueError(f"test_size must be >= 1, got {cfg.test_size}")
    if not cfg.separation_scale > 0.0:
        raise ValueError(f"separation_scale must be > 0, got {cfg.separation_scale}")
    mlp.TrainConfig(epochs=cfg.epochs, batch_size=cfg.batch_size,
                    learning_rate=cfg.learning_rate, momentum=cfg.momentum)


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    n: float
    gamma1: float
    gamma0: float
    ratio: float
    train_size: int
    run: int
    threshold: float
    acc_corrected: float
    acc_naive: float
    bayes_ceiling: float
    seed: int


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    n: float
    ratio: float
    train_size: int
    mean_corrected: float
    se_corrected: float
    mean_naive: float
    se_naive: float
    mean_ceiling: float


def _accuracy(pred: np.ndarray, y_clean: np.ndarray) -> float:
    return float((pred == y_clean).mean())


def _run_cell(cfg, experiment: str, noise: NoiseParams, ratio: float,
              train_size: int, run: int, cell_seed: int) -> ResultRow:
    priors = ClassPriors(0.5)
    problem = synthdata.make_random_problem(
        derive_seed(cfg.base_seed, "problem", run), cfg.separation_scale, priors.p1)
    clean_train = synthdata.sample_dataset(problem, train_size, derive_seed(cell_seed, "train"))
    noisy_train = synthdata.flip_labels(clean_train, noise, derive_seed(cell_seed, "flip"))

    tcfg = mlp.TrainConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, learning_rate=cfg.learning_rate,
        momentum=cfg.momentum, init_seed=derive_seed(cell_seed, "init"))
    result = mlp.train(noisy_train.x, noisy_train.z_observed, mlp.Architecture(), tcfg)

    test = synthdata.sample_dataset(problem, cfg.test_size, derive_seed(cfg.base_seed, "test", run))
    threshold = threshold_from_priors(priors, propagate_priors(priors, noise))
    acc_corrected = _accuracy(mlp.classify(result.params, test.x, threshold), test.y_clean)
    acc_naive = (acc_corrected if threshold == 0.5 else
                 _accuracy(mlp.classify(result.params, test.x, 0.5), test.y_clean))
    ceiling = synthdata.bayes_accuracy(problem, test)
    return ResultRow(experiment, noise.total, noise.gamma1, noise.gamma0, ratio,
                     train_size, run, threshold, acc_corrected, acc_naive, ceiling, cell_seed)


def _efficiency_cell(cfg: EfficiencyGridConfig, n: float, size: int, run: int) -> ResultRow:
    cell_seed = derive_seed(cfg.base_seed, "efficiency", n, size, run)
    # symmetric split; the (undefined) 0/0 ratio at n=0 is reported as 1.0 too
    return _run_cell(cfg, "efficiency", NoiseParams(n / 2.0, n / 2.0), 1.0, size, run, cell_seed)


def _flip_ratio_cell(cfg: FlipRatioGridConfig, n: float, ratio: float, run: int) -> ResultRow:
    cell_seed = derive_seed(cfg.base_seed, "flip-ratio", n, ratio, run)
    return _run_cell(cfg, "flip-ratio", _noise_for_ratio(n, ratio), ratio, cfg.train_size, run, cell_seed)


def _run_grid(cell, cfg, coords: list[tuple], jobs: int) -> list[ResultRow]:
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1:
        rows = [cell(cfg, *c) for c in coords]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(cell, repeat(cfg), *zip(*coords), chunksize=1))
    rows.sort(key=lambda r: (r.n, r.ratio, r.train_size, r.run))
    return rows


def run_efficiency_grid(cfg: EfficiencyGridConfig, jobs: int = 1) -> list[ResultRow]:
    coords = [(n, size, run)
              for n in cfg.noise_levels
              for size in cfg.training_sizes
              for run in range(cfg.runs)]
    return _run_grid(_efficiency_cell, cfg, coords, jobs)


def run_flip_ratio_grid(cfg: FlipRatioGridConfig, jobs: int = 1) -> list[ResultRow]:
    coords = [(n, ratio, run)
              for n in cfg.noise_levels
              for ratio in cfg.flip_ratios
              for run in range(cfg.runs)]
    return _run_grid(_flip_ratio_cell, cfg, coords, jobs)


def summarize(rows: list[ResultRow]) -> list[SummaryRow]:
    """Per-cell means and standard errors of the mean across runs.

    Cells are keyed by (experiment, n, ratio, train_size); a cell with a
    single run reports a standard error of 0.
    """
    if not rows:
        raise ValueError("summarize needs at least one result row")
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.experiment, row.n, row.ratio, row.train_size), []).append(row)
    out = []
    for (experiment, n, ratio, size), cell in sorted(groups.items()):
        corrected = np.array([r.acc_corrected for r in cell])
        naive = np.array([r.acc_naive for r in cell])
        ceiling = np.array([r.bayes_ceiling for r in cell])
        out.append(SummaryRow(
            experiment, n, ratio, size,
            float(corrected.mean()), _sem(corrected),
            float(naive.mean()), _sem(naive),
            float(ceiling.mean()),
        ))
    return out


def _sem(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_results_csv(rows: list[ResultRow], path) -> None:
    _write_csv(path, RESULTS_FIELDS, rows)


def write_summary_csv(rows: list[SummaryRow], path) -> None:
    _write_csv(path, SUMMARY_FIELDS, rows)


def _write_csv(path, fields: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(fields) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(getattr(row, name)) for name in fields) + "\n")

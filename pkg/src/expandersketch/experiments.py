"""Minimum-sketch-length experiment harness.

Three experiment families: block-sparse signals (equal blocks partitioning
the coordinates, growing like log N), tree-sparse signals on a complete
binary tree (sparsity 2 log2 N), and the fixed-degree variant (sparsity 16,
degree 6 regardless of N). For each ambient dimension the harness sweeps
the sketch length m over a grid, runs independent seeded trials per cell,
and records the smallest m whose median relative l1 recovery error beats
the success threshold.

Every trial's random stream is derived only from
(seed, family, n, m, algorithm, trial), so sweeps are reproducible and
order-independent; the worker-count environment variable
EXPANDERSKETCH_WORKERS parallelizes cells without affecting results.
"""

from __future__ import annotations

import functools
import json
import math
import multiprocessing
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .expander import generate_random_matrix, tree_expander_params
from .models import GroupModel, PlainSparseModel, TreeModel, sample_model_signal
from .recovery import RecoveryConfig, SketchProblem, eiht_recover, meiht_recover

WORKERS_ENV_VAR = "EXPANDERSKETCH_WORKERS"

FAMILIES = ("block", "tree", "fixed_d")
ALGORITHMS = ("eiht", "meiht")
_FAMILY_CODE = {"block": 1, "tree": 2, "fixed_d": 3}
_ALGO_CODE = {"eiht": 1, "meiht": 2}

BLOCK_ACTIVE_GROUPS = 5
FIXED_D_SPARSITY = 16
FIXED_D_DEGREE = 6

M_STAR_NOT_FOUND = -1

RAW_HEADER = "n,m,algorithm,trial,relative_error,iterations,wall_time"
SUMMARY_HEADER = "n,algorithm,m_star"


class SweepRecord(NamedTuple):
    n: int
    m: int
    algorithm: str
    trial: int
    relative_error: float
    iterations: int
    wall_time: float


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    n_values: tuple[int, ...] = (128, 256, 512, 1024, 2048, 4096, 8192)
    trials: int = 50
    success_threshold: float = 1e-5
    m_grid: tuple[int, int, int] | None = None
    m_step: int | None = None
    seed: int = 0
    algorithms: tuple[str, ...] = ALGORITHMS
    max_iterations: int = 100
    tolerance: float = 1e-7
    stall_iterations: int | None = 25
    record_timing: bool = True

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.n_values or list(self.n_values) != sorted(set(self.n_values)):
            raise ValueError("n_values must be strictly ascending and nonempty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.success_threshold <= 0:
            raise ValueError("success_threshold must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")

    def recovery_config(self) -> RecoveryConfig:
        return RecoveryConfig(
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            stall_iterations=self.stall_iterations,
        )


@functools.lru_cache(maxsize=64)
def _complete_binary_tree(n: int, budget: int) -> TreeModel:
    return TreeModel.complete(n=n, arity=2, budget=budget)


@functools.lru_cache(maxsize=64)
def _block_model(n: int) -> tuple[GroupModel, int, int]:
    """Equal blocks partitioning [0, n); the last block absorbs the remainder
    so the groups still cover every coordinate."""
    n_groups = math.floor(n / math.log2(n))
    g = n // n_groups
    bounds = [j * g for j in range(n_groups)] + [n]
    groups = tuple(tuple(range(bounds[j], bounds[j + 1])) for j in range(n_groups))
    model = GroupModel(n=n, groups=groups, budget=BLOCK_ACTIVE_GROUPS)
    return model, n_groups, g


def block_instance(
    n: int, seed: int | np.random.Generator
) -> tuple[GroupModel, np.ndarray, dict[str, int]]:
    """Block-sparse trial instance: M = floor(N / log2 N) blocks of base size
    g = floor(N / M), 5 active blocks with Gaussian values, and degree
    d = floor(2 log(N) / log(k g))."""
    model, n_groups, g = _block_model(n)
    x = sample_model_signal(model, seed)
    d = math.floor(2.0 * math.log(n) / math.log(BLOCK_ACTIVE_GROUPS * g))
    return model, x, {"M": n_groups, "g": g, "d": d, "k": BLOCK_ACTIVE_GROUPS}


def tree_instance(
    n: int, seed: int | np.random.Generator
) -> tuple[TreeModel, np.ndarray, dict[str, int]]:
    """Tree-sparse trial instance on the complete binary tree:
    k = floor(2 log2 N) and d = floor(2.5 log(N/k) / log log(N/k))."""
    k = math.floor(2.0 * math.log2(n))
    model = _complete_binary_tree(n, k)
    x = sample_model_signal(model, seed)
    d, _ = tree_expander_params(n, k, epsilon=1.0, c_d=2.5)
    return model, x, {"k": k, "d": d}


def fixed_d_instance(
    n: int, seed: int | np.random.Generator
) -> tuple[TreeModel, np.ndarray, dict[str, int]]:
    """Tree-sparse instance with sparsity and degree pinned across N."""
    model = _complete_binary_tree(n, FIXED_D_SPARSITY)
    x = sample_model_signal(model, seed)
    return model, x, {"k": FIXED_D_SPARSITY, "d": FIXED_D_DEGREE}


_INSTANCES = {"block": block_instance, "tree": tree_instance, "fixed_d": fixed_d_instance}


def _plain_budget(family: str, derived: dict[str, int]) -> int:
    # The plain-sparse budget handed to EIHT: total sparsity of the signal
    # family (k * g for blocks, k for trees).
    if family == "block":
        return derived["k"] * derived["g"]
    return derived["k"]


def sparsity_unit(family: str, n: int) -> int:
    """Grid resolution: the model's total sparsity for this family and N."""
    if family == "block":
        _, n_groups, g = _block_model(n)
        return BLOCK_ACTIVE_GROUPS * g
    if family == "tree":
        return math.floor(2.0 * math.log2(n))
    return FIXED_D_SPARSITY


def m_grid_for(config: ExperimentConfig, n: int) -> tuple[int, ...]:
    """The sketch lengths swept at this N: [2k, 10 k log2 N] in steps of the
    sparsity unit unless overridden."""
    if config.m_grid is not None:
        start, stop, step = config.m_grid
    else:
        unit = sparsity_unit(config.family, n)
        start = 2 * unit
        stop = math.floor(10.0 * unit * math.log2(n))
        step = config.m_step if config.m_step is not None else unit
    if start < 1 or step < 1 or stop < start:
        raise ValueError(f"degenerate m grid ({start}, {stop}, {step})")
    return tuple(range(start, stop + 1, step))


def trial_rng(
    seed: int, family: str, n: int, m: int, algorithm: str, trial: int
) -> np.random.Generator:
    """The per-trial stream; a pure function of the cell coordinates."""
    return np.random.default_rng(
        np.random.SeedSequence(
            [seed, _FAMILY_CODE[family], n, m, _ALGO_CODE[algorithm], trial]
        )
    )


def run_trial(
    family: str, n: int, m: int, algorithm: str, trial: int, config: ExperimentConfig
) -> SweepRecord:
    """One independent instance: fresh signal and sketching matrix, sketch
    taken with unit-l1-norm columns, then recovery."""
    rng = trial_rng(config.seed, family, n, m, algorithm, trial)
    model, x, derived = _INSTANCES[family](n, rng)
    d = derived["d"]
    matrix = generate_random_matrix(n, m, d, int(rng.integers(2**63)))
    normalized = matrix.apply(x) / d
    if algorithm == "meiht":
        problem = SketchProblem.from_normalized(matrix, normalized, model)
        solver = meiht_recover
    else:
        plain = PlainSparseModel(n=n, budget=_plain_budget(family, derived))
        problem = SketchProblem.from_normalized(matrix, normalized, plain)
        solver = eiht_recover
    start = time.perf_counter()
    result = solver(problem, config.recovery_config())
    elapsed = time.perf_counter() - start
    relative_error = float(np.abs(result.estimate - x).sum() / np.abs(x).sum())
    return SweepRecord(
        n=n,
        m=m,
        algorithm=algorithm,
        trial=trial,
        relative_error=relative_error,
        iterations=result.iterations,
        wall_time=elapsed if config.record_timing else 0.0,
    )


def _run_trial_task(task) -> SweepRecord:
    return run_trial(*task)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_tasks(tasks: list[tuple]) -> list[SweepRecord]:
    workers = _worker_count()
    if workers == 1 or len(tasks) < 4:
        records = [_run_trial_task(t) for t in tasks]
    else:
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            chunk = max(1, len(tasks) // (workers * 8))
            records = pool.map(_run_trial_task, tasks, chunksize=chunk)
    return sorted(records, key=lambda r: (r.n, r.m, r.algorithm, r.trial))


def run_cells(
    family: str, n: int, algorithm: str, config: ExperimentConfig
) -> list[SweepRecord]:
    """All (m, trial) records for one (family, n, algorithm) sweep; the full
    error-vs-m curve is kept so non-monotone success regions stay visible."""
    tasks = [
        (family, n, m, algorithm, trial, config)
        for m in m_grid_for(config, n)
        for trial in range(config.trials)
    ]
    return _run_tasks(tasks)


def m_star_from_records(
    records: Iterable[SweepRecord], threshold: float
) -> dict[tuple[int, str], int]:
    """Per (n, algorithm): the smallest m with median relative error below
    the threshold, or the not-found sentinel."""
    cells: dict[tuple[int, str, int], list[float]] = {}
    for r in records:
        cells.setdefault((r.n, r.algorithm, r.m), []).append(r.relative_error)
    out: dict[tuple[int, str], int] = {}
    for (n, algo, m), errs in sorted(cells.items()):
        key = (n, algo)
        if key in out and out[key] != M_STAR_NOT_FOUND:
            continue
        if float(np.median(errs)) < threshold:
            out[key] = m
        else:
            out.setdefault(key, M_STAR_NOT_FOUND)
    return out


def find_min_samples(
    family: str, n: int, algorithm: str, config: ExperimentConfig
) -> int:
    """Smallest swept m whose median relative error beats the threshold;
    -1 when no grid point succeeds."""
    records = run_cells(family, n, algorithm, config)
    return m_star_from_records(records, config.success_threshold)[(n, algorithm)]


def run_experiment(config: ExperimentConfig) -> list[SweepRecord]:
    """The full sweep over every (n, algorithm, m, trial) cell."""
    tasks = [
        (config.family, n, m, algorithm, trial, config)
        for n in config.n_values
        for algorithm in config.algorithms
        for m in m_grid_for(config, n)
        for trial in range(config.trials)
    ]
    return _run_tasks(tasks)


def run_fixed_d(config: ExperimentConfig) -> list[SweepRecord]:
    """The fixed-degree experiment (k = 16, d = 6 across every N)."""
    if config.family != "fixed_d":
        raise ValueError("run_fixed_d requires family='fixed_d'")
    return run_experiment(config)


def emit_results(
    records: Iterable[SweepRecord],
    out_dir: str | Path,
    *,
    success_threshold: float = 1e-5,
) -> tuple[Path, Path]:
    """Write raw per-trial and per-(n, algorithm) summary CSVs.

    Rows are sorted, newline-terminated and decimal-dot formatted; identical
    records reproduce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = sorted(records, key=lambda r: (r.n, r.m, r.algorithm, r.trial))
    raw_path = out / "raw.csv"
    lines = [RAW_HEADER]
    for r in records:
        lines.append(
            f"{r.n},{r.m},{r.algorithm},{r.trial},"
            f"{repr(float(r.relative_error))},{r.iterations},{repr(float(r.wall_time))}"
        )
    raw_path.write_text("\n".join(lines) + "\n")

    stars = m_star_from_records(records, success_threshold)
    summary_path = out / "summary.csv"
    lines = [SUMMARY_HEADER]
    for (n, algo), star in sorted(stars.items()):
        lines.append(f"{n},{algo},{star}")
    summary_path.write_text("\n".join(lines) + "\n")
    return raw_path, summary_path


def write_config_echo(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Provenance file: the fully resolved configuration, including the
    actual m grid swept at each N."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = asdict(config)
    payload["m_grids"] = {str(n): list(m_grid_for(config, n)) for n in config.n_values}
    payload["workers_env_var"] = WORKERS_ENV_VAR
    path = out / "config.echo"
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path

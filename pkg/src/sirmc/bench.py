"""Synthetic benchmark harness: data generation, RMSE scoring, phase-transition
sweeps over (rank fraction, missing fraction), and runtime-versus-rank tables.

Every number produced here is a pure function of (spec, config, seed).
Randomness comes from Philox streams split with SeedSequence spawn keys
(cell row, cell column, trial), so results do not depend on execution order
and the same (ground truth, mask) pair is shared by all methods within a
trial.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .completion import ObservedMatrix, SolverConfig, solve
from .errors import InvalidSpec, ShapeMismatch, SirmcError
from .penalties import SOFT

SUCCESS_RMSE = 1e-3

METHODS = ("nnm", "how", "hoc", "hog")

# Text protocol grid: fractions 0.01 to 0.05, step 0.02.
PAPER_GRID = (0.01, 0.03, 0.05)
# Broader grid for a meaningful phase diagram.
BROAD_GRID = tuple(round(0.05 * i, 2) for i in range(1, 11))
# Compact 4x4 preset spanning the easy region through the transition.
TRANSITION_FR = (0.05, 0.10, 0.20, 0.30)
TRANSITION_FM = (0.20, 0.35, 0.50, 0.65)


def config_for_method(method: str, **overrides) -> SolverConfig:
    """Solver config for a benchmark method name; nnm maps to soft threshold."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    kind = SOFT if method == "nnm" else method
    return SolverConfig(penalty_kind=kind, **overrides)


@dataclass(frozen=True)
class SyntheticSpec:
    """Low-rank test instance: rank round(f_r * n), round(f_m * m * n)
    entries removed uniformly without replacement."""

    m: int
    n: int
    f_r: float
    f_m: float
    seed: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidSpec(f"need positive dimensions, got {self.m}x{self.n}")
        if not 0.0 < self.f_r <= 1.0:
            raise InvalidSpec(f"f_r must be in (0, 1], got {self.f_r}")
        if not 0.0 <= self.f_m < 1.0:
            raise InvalidSpec(f"f_m must be in [0, 1), got {self.f_m}")
        if self.n_observed < 1:
            raise InvalidSpec("no observed entries left")

    @property
    def rank(self) -> int:
        return max(1, int(round(self.f_r * self.n)))

    @property
    def n_missing(self) -> int:
        return int(round(self.f_m * self.m * self.n))

    @property
    def n_observed(self) -> int:
        return self.m * self.n - self.n_missing


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def gen_synthetic(spec: SyntheticSpec):
    """Sample (X_full, X_obs): X_full = U @ V with standard normal factors.

    Deterministic for a fixed seed (bitwise).
    """
    rng = _rng(spec.seed)
    U = rng.standard_normal((spec.m, spec.rank))
    V = rng.standard_normal((spec.rank, spec.n))
    X_full = U @ V
    mask = np.ones(spec.m * spec.n, dtype=bool)
    if spec.n_missing > 0:
        removed = rng.choice(spec.m * spec.n, size=spec.n_missing, replace=False)
        mask[removed] = False
    mask = mask.reshape(spec.m, spec.n)
    return X_full, ObservedMatrix(np.where(mask, X_full, 0.0), mask)


def rmse(X_full: np.ndarray, M: np.ndarray) -> float:
    """Frobenius distance over sqrt(m*n)."""
    X_full = np.asarray(X_full, dtype=float)
    M = np.asarray(M, dtype=float)
    if X_full.shape != M.shape:
        raise ShapeMismatch(f"shapes differ: {X_full.shape} vs {M.shape}")
    return float(np.linalg.norm(X_full - M) / np.sqrt(X_full.size))


@dataclass(frozen=True)
class TrialReport:
    """One (instance, method) outcome. Failed solves carry rmse = inf."""

    method: str
    rmse: float
    iters: int
    wall_time: float

    @property
    def success(self) -> bool:
        return self.rmse < SUCCESS_RMSE


def _trial_seed(base_seed: int, *spawn_key: int) -> int:
    """Deterministic 64-bit sub-seed for a (cell, trial) stream."""
    ss = np.random.SeedSequence(base_seed, spawn_key=spawn_key)
    return int(ss.generate_state(1, np.uint64)[0])


def _run_methods(X_full, X_obs, methods, configs) -> list[TrialReport]:
    reports = []
    for method in methods:
        t0 = time.perf_counter()
        try:
            M, trace = solve(X_obs, configs[method])
            reports.append(TrialReport(method, rmse(X_full, M), trace.iters,
                                       time.perf_counter() - t0))
        except (SirmcError, np.linalg.LinAlgError):
            reports.append(TrialReport(method, float("inf"), 0,
                                       time.perf_counter() - t0))
    return reports


@dataclass
class SweepGrid:
    """Aggregated phase-transition results.

    success_rate and mean_log10_rmse are (len(f_r), len(f_m), len(methods))
    arrays; trials that raised are failures with rmse treated as infinite.
    """

    f_r_values: tuple
    f_m_values: tuple
    methods: tuple
    trials: int
    success_rate: np.ndarray
    mean_log10_rmse: np.ndarray
    reports: dict = field(default_factory=dict)  # (i_fr, i_fm, trial) -> [TrialReport]

    def success_cells(self, method: str, threshold: float = 0.5) -> int:
        """Number of grid cells where the method's success rate meets threshold."""
        k = self.methods.index(method)
        return int(np.sum(self.success_rate[:, :, k] >= threshold))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("f_r,f_m,method,success_rate,mean_log10_rmse,trials\n")
            for i, fr in enumerate(self.f_r_values):
                for j, fm in enumerate(self.f_m_values):
                    for k, method in enumerate(self.methods):
                        f.write(
                            f"{float(fr)!r},{float(fm)!r},{method},"
                            f"{float(self.success_rate[i, j, k])!r},"
                            f"{float(self.mean_log10_rmse[i, j, k])!r},{self.trials}\n"
                        )


def phase_sweep(f_r_values, f_m_values, methods, trials, m: int = 300, n: int = 200,
                seed: int = 0, configs: dict | None = None, threads: int = 1) -> SweepGrid:
    """Run trials for every (f_r, f_m) cell and method; aggregate success rates.

    Each trial draws one (ground truth, mask) pair, shared across all methods
    to remove instance-to-instance variance from the comparison. Seeds derive
    from (cell row, cell column, trial), so parallel execution order cannot
    change any number. Per-trial solver errors are recorded as failures, not
    raised.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    f_r_values = tuple(f_r_values)
    f_m_values = tuple(f_m_values)
    methods = tuple(methods)
    if configs is None:
        configs = {method: config_for_method(method) for method in methods}

    tasks = [
        (i, j, t)
        for i in range(len(f_r_values))
        for j in range(len(f_m_values))
        for t in range(trials)
    ]

    def run_task(key):
        i, j, t = key
        spec = SyntheticSpec(m=m, n=n, f_r=f_r_values[i], f_m=f_m_values[j],
                             seed=_trial_seed(seed, i, j, t))
        X_full, X_obs = gen_synthetic(spec)
        return key, _run_methods(X_full, X_obs, methods, configs)

    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(run_task, tasks))
    else:
        results = dict(run_task(key) for key in tasks)

    shape = (len(f_r_values), len(f_m_values), len(methods))
    success_rate = np.zeros(shape)
    mean_log10 = np.zeros(shape)
    for i in range(len(f_r_values)):
        for j in range(len(f_m_values)):
            cell = [results[(i, j, t)] for t in range(trials)]
            for k in range(len(methods)):
                errs = np.array([cell[t][k].rmse for t in range(trials)])
                success_rate[i, j, k] = np.mean(errs < SUCCESS_RMSE)
                mean_log10[i, j, k] = np.mean(np.log10(np.clip(errs, 1e-16, None)))
    return SweepGrid(f_r_values, f_m_values, methods, trials,
                     success_rate, mean_log10, reports=results)


@dataclass
class RuntimeTable:
    """Mean solve time per (rank, method); iteration counts kept alongside."""

    ranks: tuple
    methods: tuple
    trials: int
    mean_seconds: np.ndarray       # (len(ranks), len(methods))
    mean_iters: np.ndarray         # (len(ranks), len(methods))
    iters: np.ndarray              # (len(ranks), len(methods), trials)

    def seconds_per_iter(self) -> np.ndarray:
        return self.mean_seconds / np.maximum(self.mean_iters, 1)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("rank,method,mean_seconds,trials\n")
            for i, r in enumerate(self.ranks):
                for k, method in enumerate(self.methods):
                    f.write(f"{r},{method},{float(self.mean_seconds[i, k])!r},{self.trials}\n")


def runtime_bench(ranks, methods, trials, f_m: float = 0.1, m: int = 300, n: int = 200,
                  seed: int = 0, configs: dict | None = None,
                  threads: int = 1) -> RuntimeTable:
    """Time solves over ranks; timing covers solve only, never data generation.

    Sequential by default so timings are not skewed by contention; threads > 1
    parallelizes (rank, trial) tasks, which leaves iteration counts unchanged
    but can inflate wall times.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    ranks = tuple(int(r) for r in ranks)
    methods = tuple(methods)
    if configs is None:
        configs = {method: config_for_method(method) for method in methods}

    def run_task(key):
        i, t = key
        spec = SyntheticSpec(m=m, n=n, f_r=ranks[i] / n, f_m=f_m,
                             seed=_trial_seed(seed, i, t))
        _, X_obs = gen_synthetic(spec)
        out = []
        for method in methods:
            t0 = time.perf_counter()
            _, trace = solve(X_obs, configs[method])
            out.append((time.perf_counter() - t0, trace.iters))
        return key, out

    tasks = [(i, t) for i in range(len(ranks)) for t in range(trials)]
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(run_task, tasks))
    else:
        results = dict(run_task(key) for key in tasks)

    mean_seconds = np.zeros((len(ranks), len(methods)))
    iters = np.zeros((len(ranks), len(methods), trials), dtype=int)
    for (i, t), rows in results.items():
        for k, (secs, its) in enumerate(rows):
            mean_seconds[i, k] += secs
            iters[i, k, t] = its
    mean_seconds /= trials
    return RuntimeTable(ranks, methods, trials, mean_seconds,
                        iters.mean(axis=2), iters)

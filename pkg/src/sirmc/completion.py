"""ADMM solver for low-rank matrix completion with generated penalties.

The model splits the data as X = M + E with E zero on the observed set, so
the unobserved entries of M are free. Each iteration shrinks the singular
values of D = X - E + Lambda/rho with threshold 1/rho, fills E on the
unobserved complement, takes a multiplier step and grows rho geometrically.
With the soft-threshold penalty this is a nuclear-norm-minimization
baseline built on the exact same scaffold, so benchmark comparisons vary
only the regularizer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BiasConstraintViolated,
    EmptyObservation,
    NonFiniteInput,
    NonFiniteIterate,
    NonPositiveParameter,
    ZeroNormInput,
)
from .penalties import HOC, HOG, HOW, SOFT, STRICT_SHAPE_RATIO, Penalty, make_penalty
from .spectral import shrink_singular_values

SOLVER_KINDS = (HOW, HOC, HOG, SOFT)


@dataclass
class ObservedMatrix:
    """Dense values plus boolean observation mask.

    Unobserved entries are stored as exact zeros (the zero-filled projection
    convention); the constructor applies that projection. At least one entry
    must be observed.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.values.ndim != 2 or self.values.shape != self.mask.shape:
            raise ValueError(
                f"values {self.values.shape} and mask {self.mask.shape} must be equal 2-d shapes"
            )
        if not self.mask.any():
            raise EmptyObservation("mask observes no entries")
        if not np.isfinite(self.values[self.mask]).all():
            raise NonFiniteInput("observed entries contain NaN or inf")
        self.values = np.where(self.mask, self.values, 0.0)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_observed(self) -> int:
        return int(self.mask.sum())

    def frob_norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs. Defaults follow the completion algorithm's constants
    (mu = 1.05, xi = 1e-7, 1000 iterations); rho0 is our own default since
    the schedule start is otherwise unspecified.
    """

    penalty_kind: str = HOW
    shape_ratio: Optional[float] = None  # shape / lam; None = kind's strict bound
    rho0: float = 1e-2
    mu: float = 1.05
    xi: float = 1e-7
    max_iters: int = 1000

    def __post_init__(self):
        if self.penalty_kind not in SOLVER_KINDS:
            raise ValueError(f"penalty_kind must be one of {SOLVER_KINDS}, got {self.penalty_kind!r}")
        if not self.rho0 > 0:
            raise NonPositiveParameter(f"rho0 must be positive, got {self.rho0}")
        if not self.mu > 1:
            raise ValueError(f"mu must exceed 1, got {self.mu}")
        if not self.xi > 0:
            raise NonPositiveParameter(f"xi must be positive, got {self.xi}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.shape_ratio is not None and self.penalty_kind != SOFT:
            bound = STRICT_SHAPE_RATIO[self.penalty_kind]
            if not self.shape_ratio > 0:
                raise NonPositiveParameter(f"shape_ratio must be positive, got {self.shape_ratio}")
            if self.shape_ratio > bound * (1 + 1e-12):
                raise BiasConstraintViolated(
                    f"shape_ratio {self.shape_ratio} exceeds the {self.penalty_kind} bound {bound:.6f}"
                )

    def resolved_ratio(self) -> float:
        if self.penalty_kind == SOFT:
            return 1.0  # unused
        return STRICT_SHAPE_RATIO[self.penalty_kind] if self.shape_ratio is None else self.shape_ratio

    def penalty_at(self, rho: float) -> Penalty:
        """Penalty for the current iteration: threshold 1/rho, shape tied to it."""
        lam = 1.0 / rho
        if self.penalty_kind == SOFT:
            return make_penalty(SOFT, lam)
        return make_penalty(self.penalty_kind, lam, shape=self.resolved_ratio() * lam)


@dataclass
class SolverState:
    """ADMM iterates: estimate M, complement fill E, multiplier Lambda."""

    M: np.ndarray
    E: np.ndarray
    Lambda: np.ndarray
    rho: float
    k: int = 0

    @classmethod
    def initial(cls, X: ObservedMatrix, config: SolverConfig) -> "SolverState":
        z = np.zeros(X.shape)
        return cls(M=z.copy(), E=z.copy(), Lambda=z.copy(), rho=config.rho0, k=0)


@dataclass
class IterTrace:
    """Per-iteration history of a solve run.

    rel_e is ||X - M - E||_F / ||X||_F after the iteration's updates; the
    iterate norms are kept for boundedness diagnostics and are not part of
    the CSV schema.
    """

    rel_e: list = field(default_factory=list)
    delta_m: list = field(default_factory=list)
    feas: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    norm_m: list = field(default_factory=list)
    norm_e: list = field(default_factory=list)
    norm_lambda: list = field(default_factory=list)
    norm_x: float = 0.0
    max_iters_reached: bool = False

    def __len__(self) -> int:
        return len(self.rel_e)

    @property
    def iters(self) -> int:
        return len(self.rel_e)

    def total_time(self) -> float:
        return float(sum(self.wall_time))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("k,rel_E,delta_M,feas,rho,wall_time_s\n")
            for k in range(len(self.rel_e)):
                f.write(
                    f"{k + 1},{self.rel_e[k]!r},{self.delta_m[k]!r},"
                    f"{self.feas[k]!r},{self.rho[k]!r},{self.wall_time[k]!r}\n"
                )


def update_m(state: SolverState, X: ObservedMatrix, config: SolverConfig) -> np.ndarray:
    """Estimate update: singular-value shrinkage of D = X - E + Lambda/rho."""
    D = X.values - state.E + state.Lambda / state.rho
    return shrink_singular_values(D, config.penalty_at(state.rho))


def update_e(state: SolverState, M_new: np.ndarray, X: ObservedMatrix) -> np.ndarray:
    """Complement fill: E = Lambda/rho - M off the observed set, 0 on it.

    This is the exact minimizer of the E-subproblem (unobserved entries of
    the data are zero by convention).
    """
    return np.where(X.mask, 0.0, state.Lambda / state.rho - M_new)


def update_multiplier_and_rho(state: SolverState, X: ObservedMatrix,
                              config: SolverConfig) -> SolverState:
    """Multiplier step on the residual, then grow rho by mu; k advances."""
    residual = X.values - state.M - state.E
    return SolverState(
        M=state.M,
        E=state.E,
        Lambda=state.Lambda + state.rho * residual,
        rho=config.mu * state.rho,
        k=state.k + 1,
    )


def solve(X: ObservedMatrix, config: SolverConfig | None = None):
    """Run the ADMM loop until rel_E <= xi or max_iters; returns (M, trace).

    Hitting the iteration cap is not an error: the trace carries a
    max_iters_reached flag. Non-finite iterates abort with NonFiniteIterate.
    """
    config = SolverConfig() if config is None else config
    norm_x = X.frob_norm()
    if norm_x == 0.0:
        raise ZeroNormInput("all observed entries are zero; relative error undefined")

    state = SolverState.initial(X, config)
    trace = IterTrace(norm_x=norm_x)

    while True:
        t0 = time.perf_counter()
        rho_k = state.rho
        if not math.isfinite(rho_k):
            raise NonFiniteIterate(f"rho overflowed at iteration {state.k + 1}")
        try:
            M_new = update_m(state, X, config)
        except NonFiniteInput as exc:
            raise NonFiniteIterate(
                f"iterates went non-finite at iteration {state.k + 1}: {exc}"
            ) from exc
        if not np.isfinite(M_new).all():
            raise NonFiniteIterate(f"estimate went non-finite at iteration {state.k + 1}")
        E_new = update_e(state, M_new, X)
        delta_m = float(np.linalg.norm(M_new - state.M))
        state.M = M_new
        state.E = E_new
        residual = X.values - state.M - state.E
        feas = float(np.linalg.norm(residual))
        rel_e = feas / norm_x
        state = update_multiplier_and_rho(state, X, config)
        elapsed = time.perf_counter() - t0

        trace.rel_e.append(rel_e)
        trace.delta_m.append(delta_m)
        trace.feas.append(feas)
        trace.rho.append(rho_k)
        trace.wall_time.append(elapsed)
        trace.norm_m.append(float(np.linalg.norm(state.M)))
        trace.norm_e.append(float(np.linalg.norm(state.E)))
        trace.norm_lambda.append(float(np.linalg.norm(state.Lambda)))

        if rel_e <= config.xi:
            break
        if state.k >= config.max_iters:
            trace.max_iters_reached = True
            break

    return state.M, trace


def augmented_lagrangian(state: SolverState, X: ObservedMatrix, config: SolverConfig,
                         grid_step: float | None = None) -> float:
    """Scaled augmented Lagrangian value, for desk-scale diagnostics only.

    (1/rho) * sum_i reg(sigma_i(M)) + (1/2)||X - M - E||_F^2
    + (1/rho) <Lambda, X - M - E>, with the regularizer reconstructed
    numerically on each singular value (threshold 1/rho). Not used inside
    the solve loop.
    """
    from .penalties import implicit_regularizer

    rho = state.rho
    penalty = config.penalty_at(rho)
    sv = np.linalg.svd(state.M, compute_uv=False)
    reg_total = float(np.sum(implicit_regularizer(penalty, sv, grid_step=grid_step)))
    residual = X.values - state.M - state.E
    return (
        reg_total / rho
        + 0.5 * float(np.sum(residual * residual))
        + float(np.sum(state.Lambda * residual)) / rho
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Diagnostics over a finished trace: boundedness proxies and whether
    the estimate step and feasibility residual settled."""

    max_norm_m: float
    max_norm_e: float
    max_norm_lambda: float
    final_rel_e: float
    final_delta_m: float
    final_feas: float
    delta_m_settled: bool
    feas_decreasing: bool
    converged: bool
    flags: tuple


def convergence_diagnostics(trace: IterTrace, window: int = 10,
                            delta_m_rel_tol: float = 1e-6) -> ConvergenceReport:
    """Judge a trace: estimate increments below delta_m_rel_tol * ||X||_F
    over the last `window` iterations, feasibility trending down, and no
    iteration-cap flag. Any violation is reported as a flag.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    w = min(window, len(trace))
    last_delta = trace.delta_m[-w:]
    last_feas = trace.feas[-w:]
    delta_m_settled = max(last_delta) <= delta_m_rel_tol * trace.norm_x
    feas_decreasing = last_feas[-1] == 0.0 or last_feas[-1] < last_feas[0]
    flags = []
    if trace.max_iters_reached:
        flags.append("max_iters_reached")
    if not delta_m_settled:
        flags.append("delta_m_above_threshold")
    if not feas_decreasing:
        flags.append("feas_stalled")
    return ConvergenceReport(
        max_norm_m=max(trace.norm_m),
        max_norm_e=max(trace.norm_e),
        max_norm_lambda=max(trace.norm_lambda),
        final_rel_e=trace.rel_e[-1],
        final_delta_m=trace.delta_m[-1],
        final_feas=trace.feas[-1],
        delta_m_settled=delta_m_settled,
        feas_decreasing=feas_decreasing,
        converged=not flags,
        flags=tuple(flags),
    )

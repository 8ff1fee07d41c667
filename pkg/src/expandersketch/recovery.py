"""Iterative decoders built on the median operator.

All three decoders (sparse matching pursuit, expander iterative hard
thresholding, and the model-projected variant) share one loop: form the
sketch residual, pull it back through the coordinate-wise median of
neighboring sketch entries, and re-project. The median is the upper-middle
order statistic for even degree, matching the quantile convention the
convergence analysis is stated for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Literal

import numpy as np

from .expander import ExpansionReport, SparseBinaryMatrix
from .models import ModelSpec, PlainSparseModel, is_member
from .projections import hard_threshold_vector, project

StopReason = Literal["tolerance", "residual", "max_iterations", "stalled"]


@dataclass(frozen=True, eq=False)
class SketchProblem:
    """A sketch y = A x + e together with the sparsity model of x."""

    matrix: SparseBinaryMatrix
    sketch: np.ndarray
    model: ModelSpec

    def __post_init__(self) -> None:
        y = np.asarray(self.sketch, dtype=float)
        if y.shape != (self.matrix.n_right,):
            raise ValueError(
                f"sketch must have shape ({self.matrix.n_right},), got {y.shape}"
            )
        if self.model.n != self.matrix.n_left:
            raise ValueError("model dimension does not match the matrix")
        object.__setattr__(self, "sketch", y)

    @classmethod
    def from_normalized(
        cls, matrix: SparseBinaryMatrix, sketch: np.ndarray, model: ModelSpec
    ) -> "SketchProblem":
        """Adopt a sketch taken with unit-l1-norm columns (A / d).

        Multiplying by the degree makes the iterates identical to the binary
        formulation the decoders run on.
        """
        return cls(matrix=matrix, sketch=np.asarray(sketch, dtype=float) * matrix.degree, model=model)


@dataclass(frozen=True, eq=False)
class RecoveryConfig:
    """Stopping policy: relative l1 iterate change below ``tolerance``,
    optional absolute residual threshold, optional stall cutoff (no new best
    residual for that many iterations), and an iteration cap."""

    max_iterations: int = 500
    tolerance: float = 1e-7
    residual_tolerance: float | None = None
    initial: np.ndarray | None = None
    stall_iterations: int | None = None

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tolerance < 0 or (
            self.residual_tolerance is not None and self.residual_tolerance < 0
        ):
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    estimate: np.ndarray
    iterations: int
    residual_history: tuple[float, ...]
    stop_reason: StopReason

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]


def median_operator(matrix: SparseBinaryMatrix, u: np.ndarray) -> np.ndarray:
    """Component i is the ceil(d/2)-th largest sketch entry over Gamma(i),
    edge multiplicity counted: the ordinary median for odd d, the
    upper-middle order statistic for even d."""
    u = np.asarray(u, dtype=float)
    if u.shape != (matrix.n_right,):
        raise ValueError(f"input must have shape ({matrix.n_right},), got {u.shape}")
    d = matrix.degree
    kth = d - math.ceil(d / 2)  # ascending-order index of the descending ceil(d/2)-th
    vals = u[matrix.columns]
    if d == 1:
        return vals[:, 0].copy()
    return np.partition(vals, kth, axis=1)[:, kth]


def _iterate(
    problem: SketchProblem,
    config: RecoveryConfig,
    step: Callable[[np.ndarray, np.ndarray], np.ndarray],
    iterate_callback: Callable[[np.ndarray], None] | None,
) -> RecoveryResult:
    matrix, y = problem.matrix, problem.sketch
    if config.initial is not None:
        x = np.array(config.initial, dtype=float)
        if x.shape != (matrix.n_left,):
            raise ValueError("initial iterate has the wrong dimension")
    else:
        x = np.zeros(matrix.n_left)

    history: list[float] = []
    reason: StopReason = "max_iterations"
    residual_vec = y - matrix.apply(x)
    best_residual = math.inf
    stalled_for = 0
    for _ in range(config.max_iterations):
        x_new = step(x, median_operator(matrix, residual_vec))
        residual_vec = y - matrix.apply(x_new)
        residual = float(np.abs(residual_vec).sum())
        history.append(residual)
        if iterate_callback is not None:
            iterate_callback(x_new)
        change = float(np.abs(x_new - x).sum())
        x = x_new
        if config.residual_tolerance is not None and residual <= config.residual_tolerance:
            reason = "residual"
            break
        if change <= config.tolerance * float(np.abs(x_new).sum()):
            reason = "tolerance"
            break
        if residual < best_residual:
            best_residual = residual
            stalled_for = 0
        else:
            stalled_for += 1
            if config.stall_iterations is not None and stalled_for >= config.stall_iterations:
                reason = "stalled"
                break
    return RecoveryResult(
        estimate=x,
        iterations=len(history),
        residual_history=tuple(history),
        stop_reason=reason,
    )


def _require_plain(problem: SketchProblem, name: str) -> int:
    if not isinstance(problem.model, PlainSparseModel):
        raise ValueError(f"{name} requires a plain sparse model")
    return min(problem.model.budget, problem.model.n)


def smp_recover(
    problem: SketchProblem,
    config: RecoveryConfig = RecoveryConfig(),
    iterate_callback: Callable[[np.ndarray], None] | None = None,
) -> RecoveryResult:
    """Sparse matching pursuit: threshold the median update at 2k before
    adding it, then re-threshold the sum at k."""
    k = _require_plain(problem, "smp_recover")
    two_k = min(2 * k, problem.model.n)

    def step(x: np.ndarray, update: np.ndarray) -> np.ndarray:
        return hard_threshold_vector(x + hard_threshold_vector(update, two_k), k)

    return _iterate(problem, config, step, iterate_callback)


def eiht_recover(
    problem: SketchProblem,
    config: RecoveryConfig = RecoveryConfig(),
    iterate_callback: Callable[[np.ndarray], None] | None = None,
) -> RecoveryResult:
    """Expander iterative hard thresholding for plain sparsity."""
    k = _require_plain(problem, "eiht_recover")

    def step(x: np.ndarray, update: np.ndarray) -> np.ndarray:
        return hard_threshold_vector(x + update, k)

    return _iterate(problem, config, step, iterate_callback)


def meiht_recover(
    problem: SketchProblem,
    config: RecoveryConfig = RecoveryConfig(),
    iterate_callback: Callable[[np.ndarray], None] | None = None,
) -> RecoveryResult:
    """Model-projected iterative hard thresholding; every iterate lies in
    the sparsity model."""
    model = problem.model

    def step(x: np.ndarray, update: np.ndarray) -> np.ndarray:
        return project(x + update, model).projected

    return _iterate(problem, config, step, iterate_callback)


@dataclass(frozen=True)
class ConvergenceConstants:
    """Contraction and noise constants implied by the order-3k expansion
    coefficient; infinite when the coefficient is past the threshold the
    analysis needs (alpha at 1/4, beta at 1/12)."""

    epsilon_3k: float
    alpha: float
    beta: float
    c1: float
    c2: float

    @property
    def contractive(self) -> bool:
        return self.alpha < 1.0


def convergence_constants(epsilon_3k: float, d: int) -> ConvergenceConstants:
    """alpha = 8 eps / (1 - 4 eps), beta = 4 / ((1 - 12 eps) d), c1 = 1 + beta d,
    c2 = beta; evaluated in exact rational arithmetic so the threshold
    epsilon = 1/12 lands on alpha = 1 exactly.

    The input is snapped to the nearest rational with denominator at most
    10**8 (a perturbation below one float ulp), which recovers intended
    rationals like 1/12 from their float representations; verified
    coefficients are already such rationals.
    """
    if epsilon_3k < 0:
        raise ValueError("epsilon_3k must be nonnegative")
    if d < 1:
        raise ValueError("d must be positive")
    e = Fraction(epsilon_3k).limit_denominator(10**8)
    if 4 * e < 1:
        alpha = float(8 * e / (1 - 4 * e))
    else:
        alpha = math.inf
    if 12 * e < 1:
        beta = float(Fraction(4) / ((1 - 12 * e) * d))
        c1 = float(1 + Fraction(4) / (1 - 12 * e))
    else:
        beta = math.inf
        c1 = math.inf
    return ConvergenceConstants(
        epsilon_3k=float(epsilon_3k), alpha=alpha, beta=beta, c1=c1, c2=beta
    )


def median_lemma_check(
    matrix: SparseBinaryMatrix,
    support: Iterable[int],
    x: np.ndarray,
    e: np.ndarray,
    report: ExpansionReport,
    *,
    slack: float = 1e-9,
) -> bool:
    """Test predicate for the median inversion bound on a verified matrix:

        || [M(A x_S + e) - x]_S ||_1
            <= 4 eps / (1 - 4 eps) ||x_S||_1
               + 2 / ((1 - 4 eps) d) ||e_{Gamma(S)}||_1

    Requires an exhaustively verified report whose coefficient satisfies the
    hypothesis 4 eps d < d + 1, and refuses unverified (sampled) reports.
    The slack absorbs float rounding only.
    """
    if not report.exhaustive:
        raise ValueError("median_lemma_check requires an exhaustively verified epsilon")
    eps = report.epsilon
    d = matrix.degree
    if 4.0 * eps * d >= d + 1:
        raise ValueError("lemma hypothesis 4 * epsilon * d < d + 1 violated")
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    idx = np.asarray(sorted(int(i) for i in support), dtype=np.int64)
    if not is_member(idx, report.model):
        raise ValueError("support is not covered by the verified model")
    xs = np.zeros(matrix.n_left)
    xs[idx] = x[idx]
    med = median_operator(matrix, matrix.apply(xs) + e)
    lhs = float(np.abs(med[idx] - x[idx]).sum())
    gamma = matrix.neighbor_set(idx)
    rhs = (4.0 * eps / (1.0 - 4.0 * eps)) * float(np.abs(x[idx]).sum()) + (
        2.0 / ((1.0 - 4.0 * eps) * d)
    ) * float(np.abs(e[gamma]).sum())
    return lhs <= rhs + slack * (1.0 + abs(rhs))

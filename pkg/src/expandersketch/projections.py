"""Exact l1 projections onto sparsity models.

Projecting x onto a model maximizes the covered absolute weight
||x_S||_1 over admissible supports S, then copies x on the winning
support. Plain sparsity is a hard threshold, trees and loopless groups are
dynamic programs, and a brute-force enumeration oracle backs them all for
verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _groupdp
from .models import (
    DEFAULT_ENUMERATION_CAP,
    GroupModel,
    ModelSpec,
    PlainSparseModel,
    TreeModel,
    enumerate_supports,
)

_NEG = float("-inf")


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Optimal admissible support, the projected vector, and ||x_S||_1.

    The support is the selected admissible set itself, which may include
    coordinates where x is zero; the projected vector agrees with x on it
    and vanishes elsewhere.
    """

    support: frozenset[int]
    projected: np.ndarray
    covered_weight: float


def _result(x: np.ndarray, support_idx: np.ndarray) -> ProjectionResult:
    # math.fsum is correctly rounded, so supports with mathematically equal
    # covered weight report bit-identical values no matter how they were found.
    projected = np.zeros_like(x)
    projected[support_idx] = x[support_idx]
    return ProjectionResult(
        support=frozenset(int(i) for i in support_idx),
        projected=projected,
        covered_weight=math.fsum(np.abs(x[support_idx])),
    )


def hard_threshold_support(x: np.ndarray, k: int) -> np.ndarray:
    """Sorted indices of the k largest |x_i|, ties to the lowest index."""
    x = np.asarray(x, dtype=float)
    if not 0 <= k <= x.size:
        raise ValueError(f"k must lie in [0, {x.size}]")
    order = np.argsort(-np.abs(x), kind="stable")
    return np.sort(order[:k])


def hard_threshold_vector(x: np.ndarray, k: int) -> np.ndarray:
    """x with all but its k largest-magnitude entries zeroed."""
    out = np.zeros_like(np.asarray(x, dtype=float))
    idx = hard_threshold_support(x, k)
    out[idx] = x[idx]
    return out


def hard_threshold(x: np.ndarray, k: int) -> ProjectionResult:
    x = np.asarray(x, dtype=float)
    return _result(x, hard_threshold_support(x, k))


def project_tree(x: np.ndarray, model: TreeModel) -> ProjectionResult:
    """Best rooted connected subtree of size <= budget by covered weight.

    Bottom-up table DP: per node v, table[j] is the best weight of a
    connected subset of v's subtree containing v with exactly j+1 nodes;
    children are merged one at a time (rightmost first) by a max-plus
    convolution truncated at the budget. Ties prefer fewer nodes, so the
    all-zero signal selects the root alone.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"signal must have shape ({model.n},), got {x.shape}")
    w = np.abs(x)
    k = model.budget
    n = model.n

    tables = np.full((n, k), _NEG)
    tables[:, 0] = w
    max_deg = max((len(c) for c in model.children), default=0)
    splits = np.zeros((n, max(max_deg, 1), k), dtype=np.int32)
    sizes = model.subtree_size

    for level_slots in reversed(model.level_slots):
        for slot, (parents, kids) in enumerate(level_slots):
            old = tables[parents]
            child = tables[kids]
            best = old.copy()
            arg = np.zeros((len(parents), k), dtype=np.int32)
            t_max = min(k - 1, int(sizes[kids].max()))
            for t in range(1, t_max + 1):
                cand = old[:, : k - t] + child[:, t - 1 : t]
                improved = cand > best[:, t:]
                best[:, t:] = np.where(improved, cand, best[:, t:])
                arg[:, t:] = np.where(improved, t, arg[:, t:])
            tables[parents] = best
            splits[parents, slot] = arg

    root = model.root
    root_table = tables[root, : min(k, n)]
    j_best = int(np.argmax(root_table))  # first max: fewest nodes on ties

    support: list[int] = []
    stack = [(root, j_best + 1)]
    while stack:
        v, j = stack.pop()
        support.append(v)
        order = model.merge_order[v]
        for slot in range(len(order) - 1, -1, -1):
            t = int(splits[v, slot, j - 1])
            if t:
                stack.append((order[slot], t))
                j -= t
        assert j == 1, "table reconstruction must terminate at the node itself"
    return _result(x, np.sort(np.asarray(support, dtype=np.int64)))


def project_group(x: np.ndarray, model: GroupModel) -> ProjectionResult:
    """Best union of <= budget groups by covered weight (loopless structures)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"signal must have shape ({model.n},), got {x.shape}")
    _, selected = _groupdp.max_group_coverage(np.abs(x), model, model.budget)
    union = np.unique(np.concatenate([model.group_arrays[j] for j in selected]))
    return _result(x, union)


def project(x: np.ndarray, model: ModelSpec) -> ProjectionResult:
    """Exact l1 projection onto any supported model."""
    if isinstance(model, PlainSparseModel):
        return hard_threshold(x, min(model.budget, model.n))
    if isinstance(model, TreeModel):
        return project_tree(x, model)
    if isinstance(model, GroupModel):
        return project_group(x, model)
    raise TypeError(f"unsupported model type: {type(model).__name__}")


def brute_force_project(
    x: np.ndarray,
    model: ModelSpec,
    *,
    max_sets: int = DEFAULT_ENUMERATION_CAP,
) -> ProjectionResult:
    """Independent enumeration oracle for ``project``.

    Maximizes the covered weight over every admissible set; ties go to the
    lexicographically smallest support (compared as sorted index tuples).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"signal must have shape ({model.n},), got {x.shape}")
    w = np.abs(x)
    best_weight = _NEG
    best_support: tuple[int, ...] = ()
    for s in enumerate_supports(model, include_empty=True, max_sets=max_sets):
        idx = tuple(sorted(s))
        weight = math.fsum(w[list(idx)]) if idx else 0.0
        if weight > best_weight or (weight == best_weight and idx < best_support):
            best_weight = weight
            best_support = idx
    return _result(x, np.asarray(best_support, dtype=np.int64))


def model_sigma(x: np.ndarray, model: ModelSpec) -> float:
    """Best l1 approximation error by a model-sparse vector:
    ||x||_1 minus the projection's covered weight (clamped at zero against
    float rounding; the true value is nonnegative by definition)."""
    x = np.asarray(x, dtype=float)
    return max(0.0, math.fsum(np.abs(x)) - project(x, model).covered_weight)

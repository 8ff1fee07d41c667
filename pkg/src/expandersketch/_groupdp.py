"""Weighted maximum coverage over loopless group structures.

Maximizes the total weight of coordinates covered by a union of at most k
groups, each coordinate counted once. For loopless structures the overlap
graph is a forest and every coordinate belongs to at most two (adjacent)
groups, so the double-count correction is exactly one term per selected
forest edge; a tree-shaped dynamic program over groups is then exact.

Weights must be nonnegative: covering more groups never hurts, hence the
optimum is attained with exactly min(k, M) groups and the DP solves that
single exact count.
"""

from __future__ import annotations

import math

import numpy as np

from .models import GroupForest, GroupModel

_NEG = float("-inf")


def max_group_coverage(
    weights: np.ndarray, model: GroupModel, budget: int
) -> tuple[float, tuple[int, ...]]:
    """Best coverage of nonnegative ``weights`` by <= ``budget`` groups.

    Returns (covered weight, selected group indices). The covered weight is
    recomputed as the plain sum over the selected union so callers comparing
    against an enumeration oracle see identical float arithmetic.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (model.n,):
        raise ValueError(f"weights must have shape ({model.n},), got {w.shape}")
    if budget < 1:
        raise ValueError("budget must be positive")
    k = min(budget, model.n_groups)
    if model.has_overlaps:
        selected = _forest_dp(w, model, k)
    else:
        group_w = np.bincount(model.coordinate_group, weights=w, minlength=model.n_groups)
        order = np.argsort(-group_w, kind="stable")
        selected = tuple(sorted(int(j) for j in order[:k]))
    union = np.unique(np.concatenate([model.group_arrays[j] for j in selected]))
    return math.fsum(w[union]), selected


def _forest_dp(w: np.ndarray, model: GroupModel, k: int) -> tuple[int, ...]:
    forest = model.forest
    group_w = [float(w[g].sum()) for g in model.group_arrays]
    overlap_w = [
        float(w[np.asarray(s, dtype=np.int64)].sum()) if s else 0.0
        for s in forest.shared_with_parent
    ]
    # tabs[v][j, b]: best weight in v's forest-subtree with exactly j selected
    # groups, b = whether v itself is selected. Overlap with v's own parent is
    # settled when v is merged into the parent.
    tabs: dict[int, np.ndarray] = {}
    args: dict[int, list[np.ndarray]] = {v: [] for v in range(model.n_groups)}
    for v in reversed(forest.order):
        t = np.full((k + 1, 2), _NEG)
        t[0, 0] = 0.0
        t[1, 1] = group_w[v]
        for c in forest.children[v]:
            tc = tabs.pop(c)
            ov = overlap_w[c]
            new = np.full((k + 1, 2), _NEG)
            arg = np.zeros((k + 1, 2, 2), dtype=np.int64)
            for b in (0, 1):
                for j in range(k + 1):
                    best = _NEG
                    best_jc = 0
                    best_bc = 0
                    for jc in range(j + 1):
                        tv = t[j - jc, b]
                        if tv == _NEG:
                            continue
                        for bc in (0, 1):
                            cv = tc[jc, bc]
                            if cv == _NEG:
                                continue
                            cand = tv + cv - (ov if b and bc else 0.0)
                            if cand > best:
                                best, best_jc, best_bc = cand, jc, bc
                    new[j, b] = best
                    arg[j, b, 0] = best_jc
                    arg[j, b, 1] = best_bc
            t = new
            args[v].append(arg)
        tabs[v] = t

    # Collapse each component to a table over j, then knapsack components.
    comp_val: list[np.ndarray] = []
    comp_b: list[np.ndarray] = []
    for r in forest.roots:
        t = tabs[r]
        val = np.where(t[:, 0] >= t[:, 1], t[:, 0], t[:, 1])
        b = (t[:, 1] > t[:, 0]).astype(np.int64)
        comp_val.append(val)
        comp_b.append(b)
    comb = np.full(k + 1, _NEG)
    comb[0] = 0.0
    comb_args: list[np.ndarray] = []
    for val in comp_val:
        new = np.full(k + 1, _NEG)
        arg = np.zeros(k + 1, dtype=np.int64)
        for j in range(k + 1):
            best = _NEG
            best_jr = 0
            for jr in range(j + 1):
                if comb[j - jr] == _NEG or val[jr] == _NEG:
                    continue
                cand = comb[j - jr] + val[jr]
                if cand > best:
                    best, best_jr = cand, jr
            new[j] = best
            arg[j] = best_jr
        comb = new
        comb_args.append(arg)

    selected: list[int] = []
    j = k
    for idx in range(len(forest.roots) - 1, -1, -1):
        jr = int(comb_args[idx][j])
        j -= jr
        root = forest.roots[idx]
        _reconstruct(root, jr, int(comp_b[idx][jr]), args, forest, selected)
    assert j == 0, "component allocation must consume the full budget"
    return tuple(sorted(selected))


def _reconstruct(
    v: int,
    j: int,
    b: int,
    args: dict[int, list[np.ndarray]],
    forest: GroupForest,
    selected: list[int],
) -> None:
    kids = forest.children[v]
    for idx in range(len(kids) - 1, -1, -1):
        arg = args[v][idx]
        jc = int(arg[j, b, 0])
        bc = int(arg[j, b, 1])
        j -= jc
        if jc > 0:
            _reconstruct(kids[idx], jc, bc, args, forest, selected)
    assert j == (1 if b else 0), "base state must match the selection flag"
    if b:
        selected.append(v)

"""Sparsity models: plain k-sparse supports, rooted connected subtrees of a
D-ary tree, and loopless overlapping group structures.

A model instance describes a family of admissible supports over [0, n).
Membership, exhaustive enumeration (for oracles and expansion verification)
and seeded random signal sampling all live here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Iterator, Union

import numpy as np

DEFAULT_ENUMERATION_CAP = 1_000_000


class EnumerationLimitError(RuntimeError):
    """Raised when a model has too many admissible sets to enumerate."""


class LooplessViolationError(ValueError):
    """Raised when a group structure's overlap graph contains a cycle."""


@dataclass(frozen=True)
class PlainSparseModel:
    """Supports of size at most ``budget`` over [0, n)."""

    n: int
    budget: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.budget:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class TreeModel:
    """Rooted connected subtrees of size at most ``budget``.

    The tree over [0, n) is given by a parent array with -1 marking the
    single root; every node may have at most ``arity`` children.
    """

    n: int
    arity: int
    parent: tuple[int, ...]
    budget: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "parent", tuple(int(p) for p in self.parent))
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.arity < 2:
            raise ValueError("arity must be at least 2")
        if len(self.parent) != self.n:
            raise ValueError("parent array length must equal n")
        if not 1 <= self.budget <= self.n:
            raise ValueError("budget must lie in [1, n]")
        roots = [i for i, p in enumerate(self.parent) if p == -1]
        if len(roots) != 1:
            raise ValueError(f"tree must have exactly one root, found {len(roots)}")
        counts = [0] * self.n
        for i, p in enumerate(self.parent):
            if p == -1:
                continue
            if not 0 <= p < self.n:
                raise ValueError(f"parent index {p} out of range")
            counts[p] += 1
            if counts[p] > self.arity:
                raise ValueError(f"node {p} has more than {self.arity} children")
        # Reachability from the root detects cycles and disconnected nodes.
        seen = 0
        stack = [roots[0]]
        children = self.children
        while stack:
            v = stack.pop()
            seen += 1
            stack.extend(children[v])
        if seen != self.n:
            raise ValueError("parent links contain a cycle or disconnected node")

    @classmethod
    def complete(cls, n: int, arity: int, budget: int) -> "TreeModel":
        """Heap-indexed complete tree: node i's parent is (i - 1) // arity."""
        parent = tuple(-1 if i == 0 else (i - 1) // arity for i in range(n))
        return cls(n=n, arity=arity, parent=parent, budget=budget)

    @cached_property
    def root(self) -> int:
        return self.parent.index(-1)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for i, p in enumerate(self.parent):
            if p != -1:
                kids[p].append(i)
        return tuple(tuple(c) for c in kids)

    @cached_property
    def depth(self) -> np.ndarray:
        d = np.full(self.n, -1, dtype=np.int64)
        d[self.root] = 0
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                d[c] = d[v] + 1
                stack.append(c)
        return d

    @cached_property
    def levels(self) -> tuple[np.ndarray, ...]:
        """Node arrays grouped by depth, shallowest first."""
        depth = self.depth
        return tuple(
            np.flatnonzero(depth == lev) for lev in range(int(depth.max()) + 1)
        )

    @cached_property
    def subtree_size(self) -> np.ndarray:
        size = np.ones(self.n, dtype=np.int64)
        for level in reversed(self.levels):
            for v in level:
                for c in self.children[v]:
                    size[v] += size[c]
        return size

    @cached_property
    def merge_order(self) -> tuple[tuple[int, ...], ...]:
        """Per node: its children in merge order (rightmost first)."""
        return tuple(tuple(reversed(c)) for c in self.children)

    @cached_property
    def level_slots(self) -> tuple[tuple[tuple[np.ndarray, np.ndarray], ...], ...]:
        """Per level, per child slot: (parent nodes, child nodes) arrays.

        Slot s pairs every node of the level having > s children with its
        s-th child in merge order; used to batch the projection DP.
        """
        out = []
        for level in self.levels:
            slots = []
            max_deg = max((len(self.children[v]) for v in level), default=0)
            for s in range(max_deg):
                pairs = [
                    (v, self.merge_order[v][s])
                    for v in level
                    if len(self.merge_order[v]) > s
                ]
                parents = np.array([p for p, _ in pairs], dtype=np.int64)
                kids = np.array([c for _, c in pairs], dtype=np.int64)
                slots.append((parents, kids))
            out.append(tuple(slots))
        return tuple(out)


@dataclass(frozen=True)
class GroupModel:
    """Unions of at most ``budget`` groups from a loopless group structure.

    Groups must cover [0, n) and their overlap graph (one node per group,
    an edge per overlapping pair) must be acyclic. Looplessness implies
    every coordinate belongs to at most two groups, and overlapping pairs
    form a forest; the projection machinery relies on both facts.
    """

    n: int
    groups: tuple[tuple[int, ...], ...]
    budget: int

    def __post_init__(self) -> None:
        norm = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        object.__setattr__(self, "groups", norm)
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.groups:
            raise ValueError("at least one group required")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        covered = np.zeros(self.n, dtype=bool)
        owners: dict[int, list[int]] = {}
        for j, g in enumerate(self.groups):
            if not g:
                raise ValueError(f"group {j} is empty")
            if len(set(g)) != len(g):
                raise ValueError(f"group {j} has repeated indices")
            for i in g:
                if not 0 <= i < self.n:
                    raise ValueError(f"group {j} index {i} out of range")
                covered[i] = True
                owners.setdefault(i, []).append(j)
        if not covered.all():
            missing = int(np.flatnonzero(~covered)[0])
            raise ValueError(f"groups must cover [0, n); coordinate {missing} uncovered")
        # Union-find over overlap edges: any edge closing a component is a loop.
        edges = sorted({(o[0], o[1]) for o in owners.values() if len(o) == 2})
        for o in owners.values():
            if len(o) > 2:
                raise LooplessViolationError(
                    f"coordinate shared by groups {o}: overlap graph has a cycle"
                )
        uf = list(range(len(self.groups)))

        def find(a: int) -> int:
            while uf[a] != a:
                uf[a] = uf[uf[a]]
                a = uf[a]
            return a

        for a, b in edges:
            ra, rb = find(a), find(b)
            if ra == rb:
                raise LooplessViolationError(
                    f"groups {a} and {b} close a cycle in the overlap graph"
                )
            uf[ra] = rb

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @cached_property
    def g_max(self) -> int:
        return max(len(g) for g in self.groups)

    @cached_property
    def group_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(g, dtype=np.int64) for g in self.groups)

    @cached_property
    def has_overlaps(self) -> bool:
        # Groups cover [0, n), so any repeated coordinate shows up as excess size.
        return sum(len(g) for g in self.groups) > self.n

    @cached_property
    def coordinate_group(self) -> np.ndarray:
        """Owning group per coordinate; only defined when groups are disjoint."""
        if self.has_overlaps:
            raise ValueError("coordinate_group is only defined for disjoint groups")
        owner = np.empty(self.n, dtype=np.int64)
        for j, g in enumerate(self.group_arrays):
            owner[g] = j
        return owner

    @cached_property
    def forest(self) -> "GroupForest":
        return _build_group_forest(self)


@dataclass(frozen=True)
class GroupForest:
    """Rooted orientation of a group model's (acyclic) overlap graph."""

    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    roots: tuple[int, ...]
    order: tuple[int, ...]  # parents before children
    shared_with_parent: tuple[tuple[int, ...], ...]


def _build_group_forest(model: GroupModel) -> GroupForest:
    m = model.n_groups
    adj: list[set[int]] = [set() for _ in range(m)]
    owners: dict[int, list[int]] = {}
    for j, g in enumerate(model.groups):
        for i in g:
            owners.setdefault(i, []).append(j)
    for o in owners.values():
        if len(o) == 2:
            adj[o[0]].add(o[1])
            adj[o[1]].add(o[0])
    parent = [-2] * m
    roots = []
    order = []
    for start in range(m):
        if parent[start] != -2:
            continue
        parent[start] = -1
        roots.append(start)
        queue = [start]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in sorted(adj[v]):
                if parent[w] == -2:
                    parent[w] = v
                    queue.append(w)
    children: list[list[int]] = [[] for _ in range(m)]
    for v, p in enumerate(parent):
        if p >= 0:
            children[p].append(v)
    shared = []
    for v, p in enumerate(parent):
        if p >= 0:
            shared.append(tuple(sorted(set(model.groups[v]) & set(model.groups[p]))))
        else:
            shared.append(())
    return GroupForest(
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        roots=tuple(roots),
        order=tuple(order),
        shared_with_parent=tuple(shared),
    )


ModelSpec = Union[PlainSparseModel, TreeModel, GroupModel]


def with_budget(model: ModelSpec, budget: int) -> ModelSpec:
    """Copy of the model at a different order."""
    if isinstance(model, TreeModel):
        budget = min(budget, model.n)
    return replace(model, budget=budget)


def _as_index_set(support: Iterable[int], n: int) -> frozenset[int]:
    s = frozenset(int(i) for i in support)
    for i in s:
        if not 0 <= i < n:
            raise ValueError(f"index {i} out of range [0, {n})")
    return s


def ancestor_closure(support: Iterable[int], model: TreeModel) -> frozenset[int]:
    """The support plus all its ancestors; minimal rooted connected cover."""
    closed = set(_as_index_set(support, model.n))
    stack = list(closed)
    while stack:
        p = model.parent[stack.pop()]
        if p != -1 and p not in closed:
            closed.add(p)
            stack.append(p)
    return frozenset(closed)


def is_member(support: Iterable[int], model: ModelSpec) -> bool:
    """Whether the support is contained in some admissible set of the model."""
    s = _as_index_set(support, model.n)
    if not s:
        return True
    if isinstance(model, PlainSparseModel):
        return len(s) <= model.budget
    if isinstance(model, TreeModel):
        return len(ancestor_closure(s, model)) <= model.budget
    from . import _groupdp

    weights = np.zeros(model.n)
    weights[list(s)] = 1.0
    covered, _ = _groupdp.max_group_coverage(weights, model, model.budget)
    return int(round(covered)) == len(s)


def enumerate_supports(
    model: ModelSpec,
    *,
    include_empty: bool = False,
    max_sets: int | None = DEFAULT_ENUMERATION_CAP,
) -> Iterator[frozenset[int]]:
    """Yield every admissible set of the model exactly once.

    Plain: all subsets of size <= budget. Tree: all rooted connected
    subtrees of size <= budget. Group: all distinct unions of <= budget
    groups. Raises EnumerationLimitError past ``max_sets`` yields.
    """
    count = 0

    def emit(s: frozenset[int]) -> frozenset[int]:
        nonlocal count
        count += 1
        if max_sets is not None and count > max_sets:
            raise EnumerationLimitError(
                f"model has more than {max_sets} admissible sets; "
                "too large for exhaustive enumeration"
            )
        return s

    if include_empty:
        yield emit(frozenset())
    if isinstance(model, PlainSparseModel):
        for size in range(1, min(model.budget, model.n) + 1):
            for combo in itertools.combinations(range(model.n), size):
                yield emit(frozenset(combo))
    elif isinstance(model, TreeModel):
        yield from _tree_supports(model, emit)
    else:
        seen: set[frozenset[int]] = set()
        for size in range(1, min(model.budget, model.n_groups) + 1):
            for combo in itertools.combinations(range(model.n_groups), size):
                s = frozenset(itertools.chain.from_iterable(model.groups[j] for j in combo))
                if s not in seen:
                    seen.add(s)
                    yield emit(s)


def _tree_supports(model: TreeModel, emit) -> Iterator[frozenset[int]]:
    children = model.children
    k = model.budget

    def rec(current: list[int], boundary: list[int], start: int):
        yield emit(frozenset(current))
        if len(current) == k:
            return
        for i in range(start, len(boundary)):
            v = boundary[i]
            current.append(v)
            yield from rec(current, boundary + list(children[v]), i + 1)
            current.pop()

    yield from rec([model.root], list(children[model.root]), 0)


def enumerate_member_sets(
    model: ModelSpec,
    *,
    max_sets: int | None = DEFAULT_ENUMERATION_CAP,
) -> Iterator[frozenset[int]]:
    """Yield every nonempty set contained in some admissible set, once each.

    This is the family the expansion property quantifies over.
    """
    if isinstance(model, PlainSparseModel):
        yield from enumerate_supports(model, max_sets=max_sets)
        return
    count = 0
    if model.n <= 63:
        seen_masks: set[int] = set()
        for top in enumerate_supports(model, max_sets=max_sets):
            mask = 0
            for i in top:
                mask |= 1 << i
            sub = mask
            while sub:
                if sub not in seen_masks:
                    seen_masks.add(sub)
                    count += 1
                    if max_sets is not None and count > max_sets:
                        raise EnumerationLimitError(
                            f"more than {max_sets} member sets; too large for "
                            "exhaustive enumeration"
                        )
                    yield frozenset(i for i in range(model.n) if sub >> i & 1)
                sub = (sub - 1) & mask
        return
    seen: set[frozenset[int]] = set()
    for top in enumerate_supports(model, max_sets=max_sets):
        elems = sorted(top)
        for size in range(1, len(elems) + 1):
            for combo in itertools.combinations(elems, size):
                s = frozenset(combo)
                if s not in seen:
                    seen.add(s)
                    count += 1
                    if max_sets is not None and count > max_sets:
                        raise EnumerationLimitError(
                            f"more than {max_sets} member sets; too large for "
                            "exhaustive enumeration"
                        )
                    yield s


def nested_union(
    s1: Iterable[int],
    k1: int,
    s2: Iterable[int],
    k2: int,
    model: ModelSpec,
) -> bool:
    """Whether the union of a k1-member and a k2-member is a (k1+k2)-member."""
    a = _as_index_set(s1, model.n)
    b = _as_index_set(s2, model.n)
    if not is_member(a, with_budget(model, k1)):
        raise ValueError("first set is not a member at its stated budget")
    if not is_member(b, with_budget(model, k2)):
        raise ValueError("second set is not a member at its stated budget")
    return is_member(a | b, with_budget(model, k1 + k2))


def sample_support(model: ModelSpec, rng: np.random.Generator) -> frozenset[int]:
    """A random full-budget admissible support.

    Tree supports grow from the root by repeatedly attaching a uniformly
    random boundary child; the law is not uniform over subtrees.
    """
    if isinstance(model, PlainSparseModel):
        k = min(model.budget, model.n)
        return frozenset(int(i) for i in rng.choice(model.n, size=k, replace=False))
    if isinstance(model, TreeModel):
        selected = [model.root]
        boundary = list(model.children[model.root])
        while len(selected) < model.budget:
            pick = int(rng.integers(len(boundary)))
            v = boundary.pop(pick)
            selected.append(v)
            boundary.extend(model.children[v])
        return frozenset(selected)
    if model.budget > model.n_groups:
        raise ValueError("budget exceeds the number of groups; cannot sample")
    chosen = rng.choice(model.n_groups, size=model.budget, replace=False)
    return frozenset(
        int(i) for i in itertools.chain.from_iterable(model.groups[j] for j in chosen)
    )


def sample_model_signal(
    model: ModelSpec, seed: int | np.random.Generator
) -> np.ndarray:
    """Random signal with a full-budget admissible support and i.i.d.
    standard Gaussian values on it; deterministic in the seed."""
    rng = np.random.default_rng(seed)
    support = sorted(sample_support(model, rng))
    x = np.zeros(model.n)
    x[support] = rng.standard_normal(len(support))
    return x

"""Rooted spanning trees (arborescences) and marked functional graphs.

Every tree is stored as its out-edge vector: ``targets[i]`` is the head of
the single edge leaving ``i``, and ``None`` marks the root (or, for marked
graphs, an unmarked vertex).  Enumeration walks the vertices in index order
and picks each out-edge in increasing target order, pruning a branch as soon
as the new edge closes a directed cycle, so trees stream out in
lexicographic order of their out-edge vectors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import EmptyMarkedSet, EnumerationCapExceeded, VertexOutOfRange
from .graph import ReactionGraph, _check_vertex, complete_graph
from .linalg import bareiss_det

DEFAULT_TREE_CAP = 10**7
DEFAULT_MAX_COMPLETE_N = 12
CAP_ENV_VAR = "MARKOVTREE_TREE_CAP"


def tree_cap() -> int:
    """Enumeration cap, overridable through ``MARKOVTREE_TREE_CAP``."""
    raw = os.environ.get(CAP_ENV_VAR)
    return int(raw) if raw else DEFAULT_TREE_CAP


@dataclass(frozen=True)
class Arborescence:
    root: int
    targets: tuple[int | None, ...]

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, t) for i, t in enumerate(self.targets) if t is not None)

    @property
    def out_edge(self) -> dict[int, int]:
        return {i: t for i, t in enumerate(self.targets) if t is not None}

    @classmethod
    def from_edges(cls, n: int, root: int, edges) -> Arborescence:
        targets: list[int | None] = [None] * n
        for i, j in edges:
            if targets[i] is not None:
                raise ValueError(f"vertex {i} has two outgoing edges")
            targets[i] = j
        t = cls(root, tuple(targets))
        if not is_arborescence(t.targets, root):
            raise ValueError(f"edges {sorted(edges)} do not form a tree rooted at {root}")
        return t

    def with_edge_from(self, source: int, target: int) -> tuple[int, ...]:
        """Out-edge vector of the functional graph ``t + (source -> target)``.

        Only defined for ``source == root``, the one vertex without an
        out-edge.
        """
        if source != self.root:
            raise ValueError("only the root can receive an additional out-edge")
        out = list(self.targets)
        out[source] = target
        return tuple(out)


def is_arborescence(targets: Sequence[int | None], root: int) -> bool:
    """Check edge count, no self-loops, and that every vertex reaches ``root``."""
    n = len(targets)
    if not 0 <= root < n or targets[root] is not None:
        return False
    for v in range(n):
        if v != root and (targets[v] is None or targets[v] == v or not 0 <= targets[v] < n):
            return False
    for v in range(n):
        u, steps = v, 0
        while u != root:
            u = targets[u]
            steps += 1
            if steps > n - 1:
                return False
    return True


def path_to_root(t: Arborescence, v: int) -> list[int]:
    _check_vertex(t.n, v)
    path = [v]
    while path[-1] != t.root:
        path.append(t.targets[path[-1]])
    return path


def add_edge_unique_cycle(t: Arborescence, target: int) -> list[int]:
    """The single directed cycle of ``t`` plus the edge ``root -> target``.

    Returned as a vertex list starting at the root.
    """
    _check_vertex(t.n, target)
    if target == t.root:
        raise ValueError("target must differ from the root")
    return [t.root] + path_to_root(t, target)[:-1]


def _closes_cycle(targets, v, t) -> bool:
    # the partial assignment is acyclic, so this walk ends at an unassigned vertex
    u = t
    while u != v:
        u = targets[u]
        if u is None:
            return False
    return True


def _backtrack(succ, root: int) -> Iterator[tuple[int | None, ...]]:
    n = len(succ)
    order = [v for v in range(n) if v != root]
    targets: list[int | None] = [None] * n
    last = len(order)

    def rec(depth):
        if depth == last:
            yield tuple(targets)
            return
        v = order[depth]
        for t in succ[v]:
            if not _closes_cycle(targets, v, t):
                targets[v] = t
                yield from rec(depth + 1)
        targets[v] = None

    yield from rec(0)


def tree_weight_sum(succ, weight, root: int, zero, one):
    """Sum over arborescences rooted at ``root`` of the product of edge weights.

    ``weight[i][j]`` is the weight of edge ``(i, j)``.  Products are folded
    into the recursion instead of being formed per tree, and the choices of
    the last two vertices are summed in one step.  Vertices are assigned in
    breadth-first order away from the root along reversed edges, which
    closes cycles early.
    """
    n = len(succ)
    pred = [[] for _ in range(n)]
    for i in range(n):
        for j in succ[i]:
            pred[j].append(i)
    order, seen = [], {root}
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for u in pred[v]:
                if u not in seen:
                    seen.add(u)
                    order.append(u)
                    nxt.append(u)
        frontier = nxt
    if len(order) != n - 1:
        return zero
    if n == 1:
        return one
    targets: list[int | None] = [None] * n
    if n == 2:
        v = order[0]
        return sum((weight[v][t] for t in succ[v]), zero)
    pair = n - 3

    def head_sums(v):
        # weight of edges out of v, grouped by where their tree path currently ends
        sums = {}
        row = weight[v]
        for t in succ[v]:
            u = t
            while targets[u] is not None:
                u = targets[u]
            sums[u] = sums.get(u, zero) + row[t]
        return sums

    def rec(depth):
        v = order[depth]
        if depth == pair:
            # the last two vertices a, b: a and b may each point into the
            # root's component, or one of them into the other's, not both
            b = order[depth + 1]
            sa, sb = head_sums(v), head_sums(b)
            a_root, a_b = sa.get(root, zero), sa.get(b, zero)
            b_root, b_a = sb.get(root, zero), sb.get(v, zero)
            return a_root * (b_root + b_a) + a_b * b_root
        row = weight[v]
        total = zero
        for t in succ[v]:
            u = t
            while u is not None and u != v:
                u = targets[u]
            if u is None:
                targets[v] = t
                total += row[t] * rec(depth + 1)
        targets[v] = None
        return total

    return rec(0)


def count_arborescences(g: ReactionGraph, root: int) -> int:
    """Number of arborescences in ``g`` rooted at ``root`` (Kirchhoff count on the support)."""
    _check_vertex(g.n, root)
    keep = [v for v in range(g.n) if v != root]
    pos = {v: idx for idx, v in enumerate(keep)}
    lap = [[0] * len(keep) for _ in keep]
    for (i, j) in g.weights:
        if i == root:
            continue
        lap[pos[i]][pos[i]] += 1
        if j != root:
            lap[pos[i]][pos[j]] -= 1
    return bareiss_det(lap)


def enumerate_arborescences(g: ReactionGraph, root: int, *, cap: int | None = None) -> Iterator[Arborescence]:
    """Stream every arborescence of ``g`` rooted at ``root`` in canonical order.

    Raises :class:`EnumerationCapExceeded` up front when the tree count of
    ``g`` exceeds ``cap``; nothing is ever silently truncated.
    """
    _check_vertex(g.n, root)
    cap = tree_cap() if cap is None else cap
    count = count_arborescences(g, root)
    if count > cap:
        raise EnumerationCapExceeded(count, cap)
    if count == 0:
        return iter(())
    return (Arborescence(root, t) for t in _backtrack(g.succ, root))


def count_arborescences_complete(
    n: int,
    root: int = 0,
    *,
    cap: int | None = None,
    max_n: int = DEFAULT_MAX_COMPLETE_N,
) -> int:
    """``n ** (n - 2)`` trees per root on the complete graph.

    The closed form is cross-checked by exhaustive enumeration whenever
    ``n <= max_n`` and the count fits under the cap.
    """
    if n < 1:
        raise ValueError("n must be positive")
    _check_vertex(n, root)
    closed = 1 if n == 1 else n ** (n - 2)
    cap = tree_cap() if cap is None else cap
    if n <= max_n and closed <= cap:
        g = complete_graph(n)
        ones = [[1] * n for _ in range(n)]
        counted = tree_weight_sum(g.succ, ones, root, 0, 1)
        if counted != closed:
            raise AssertionError(f"enumeration found {counted} trees, closed form gives {closed}")
    return closed


@dataclass(frozen=True)
class MarkedFunctionalGraph:
    """Acyclic graph in which each marked vertex has exactly one out-edge."""

    marked: frozenset[int]
    targets: tuple[int | None, ...]

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, t) for i, t in enumerate(self.targets) if t is not None)


def _normalize_marked(n: int, marked) -> tuple[int, ...]:
    marked = tuple(sorted(set(marked)))
    if not marked:
        raise EmptyMarkedSet("the marked vertex set must be nonempty")
    for v in marked:
        if not 0 <= v < n:
            raise VertexOutOfRange(v, n)
    return marked


def enumerate_marked_graphs(n: int, marked) -> Iterator[MarkedFunctionalGraph]:
    """All acyclic out-edge assignments on ``marked`` over the complete graph on ``n`` vertices."""
    order = _normalize_marked(n, marked)
    frozen = frozenset(order)
    targets: list[int | None] = [None] * n

    def rec(depth):
        if depth == len(order):
            yield MarkedFunctionalGraph(frozen, tuple(targets))
            return
        v = order[depth]
        for t in range(n):
            if t != v and not _closes_cycle(targets, v, t):
                targets[v] = t
                yield from rec(depth + 1)
        targets[v] = None

    return rec(0)


def count_marked_graphs(
    n: int,
    marked,
    *,
    cap: int | None = None,
    max_n: int = DEFAULT_MAX_COMPLETE_N,
) -> int:
    """``(n - k) * n ** (k - 1)`` marked functional graphs for ``k`` marked vertices.

    Cross-checked by exhaustive enumeration under the same limits as
    :func:`count_arborescences_complete`.
    """
    order = _normalize_marked(n, marked)
    k = len(order)
    closed = (n - k) * n ** (k - 1)
    cap = tree_cap() if cap is None else cap
    if n <= max_n and closed <= cap:
        counted = sum(1 for _ in enumerate_marked_graphs(n, order))
        if counted != closed:
            raise AssertionError(f"enumeration found {counted} graphs, closed form gives {closed}")
    return closed


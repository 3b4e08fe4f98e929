"""Reaction graph of a stochastic matrix and its communicating-class structure."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .core import STRICT, Scalar, StochasticMatrix
from .errors import VertexOutOfRange


@dataclass(frozen=True)
class ReactionGraph:
    """Directed graph with an edge ``(i, j)`` for every qualifying off-diagonal entry.

    ``succ[i]`` and ``pred[j]`` are sorted neighbour tuples; ``weights``
    maps each edge to its matrix entry.
    """

    n: int
    weights: dict[tuple[int, int], Scalar]
    succ: tuple[tuple[int, ...], ...]
    pred: tuple[tuple[int, ...], ...]

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.weights))

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.weights

    @classmethod
    def from_edges(cls, n: int, weights) -> ReactionGraph:
        weights = dict(weights)
        succ = [[] for _ in range(n)]
        pred = [[] for _ in range(n)]
        for i, j in sorted(weights):
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) in reaction graph")
            succ[i].append(j)
            pred[j].append(i)
        return cls(n, weights, tuple(map(tuple, succ)), tuple(map(tuple, pred)))


def build_graph(M: StochasticMatrix) -> ReactionGraph:
    """Edges are ``m_ij > 0`` in strict mode and ``m_ij != 0`` in generalized mode."""
    strict = M.mode == STRICT
    weights = {}
    for i, row in enumerate(M.entries):
        for j, x in enumerate(row):
            if i != j and (x > 0 if strict else x != 0):
                weights[i, j] = x
    return ReactionGraph.from_edges(M.n, weights)


def complete_graph(n: int) -> ReactionGraph:
    return ReactionGraph.from_edges(n, {(i, j): 1 for i in range(n) for j in range(n) if i != j})


def _check_vertex(n: int, v: int) -> None:
    if not (isinstance(v, int) and 0 <= v < n):
        raise VertexOutOfRange(v, n)


def strongly_connected_components(succ) -> list[list[int]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for start in range(n):
        if index[start] != -1:
            continue
        work = [(start, 0)]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack[start] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


class ClassKind(enum.Enum):
    DISCONNECTED = "Z1"
    CLOSED_RECEIVING = "Z2"
    REMAINING = "Z_R"

    @property
    def closed(self) -> bool:
        return self is not ClassKind.REMAINING


_KIND_ORDER = {ClassKind.DISCONNECTED: 0, ClassKind.CLOSED_RECEIVING: 1, ClassKind.REMAINING: 2}


@dataclass(frozen=True)
class ClassDecomposition:
    """Communicating classes listed Z1 first, then Z2, then Z_R.

    Within a group classes are sorted by their smallest state.
    """

    n: int
    classes: tuple[tuple[int, ...], ...]
    kinds: tuple[ClassKind, ...]

    def class_of(self, v: int) -> int:
        for idx, c in enumerate(self.classes):
            if v in c:
                return idx
        raise VertexOutOfRange(v, self.n)

    @property
    def closed_classes(self) -> tuple[tuple[int, ...], ...]:
        """Classes in Z1 and Z2, the ones that carry invariant mass."""
        return tuple(c for c, k in zip(self.classes, self.kinds) if k.closed)

    def union(self, kind: ClassKind) -> frozenset[int]:
        return frozenset(v for c, k in zip(self.classes, self.kinds) if k is kind for v in c)


def communicating_classes(g: ReactionGraph) -> ClassDecomposition:
    comps = strongly_connected_components(g.succ)
    label = [0] * g.n
    for idx, comp in enumerate(comps):
        for v in comp:
            label[v] = idx
    has_out = [False] * len(comps)
    has_in = [False] * len(comps)
    has_internal = [False] * len(comps)
    for i, j in g.weights:
        a, b = label[i], label[j]
        if a == b:
            has_internal[a] = True
        else:
            has_out[a] = True
            has_in[b] = True

    kinds = []
    for idx in range(len(comps)):
        if len(comps) == 1:
            # a lone spanning class: Z2 if it has any edge at all
            kind = ClassKind.CLOSED_RECEIVING if has_internal[idx] else ClassKind.DISCONNECTED
        elif has_out[idx]:
            kind = ClassKind.REMAINING
        elif has_in[idx]:
            kind = ClassKind.CLOSED_RECEIVING
        else:
            kind = ClassKind.DISCONNECTED
        kinds.append(kind)

    order = sorted(range(len(comps)), key=lambda c: (_KIND_ORDER[kinds[c]], comps[c][0]))
    return ClassDecomposition(
        g.n,
        tuple(tuple(comps[c]) for c in order),
        tuple(kinds[c] for c in order),
    )


@dataclass(frozen=True)
class ReachabilitySet:
    """States with a directed path to ``target``; the target is always a member."""

    target: int
    members: frozenset[int]

    def __contains__(self, v) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)


def reachability_set(g: ReactionGraph, k: int) -> ReachabilitySet:
    _check_vertex(g.n, k)
    seen = {k}
    queue = deque([k])
    while queue:
        v = queue.popleft()
        for u in g.pred[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return ReachabilitySet(k, frozenset(seen))


def is_irreducible(g: ReactionGraph) -> bool:
    comps = strongly_connected_components(g.succ)
    return len(comps) == 1

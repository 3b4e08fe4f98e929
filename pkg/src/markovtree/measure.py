"""Invariant measures from rooted spanning trees.

The weight of state ``k`` is the sum, over all spanning trees directed
towards ``k``, of the product of the transition weights on the tree edges.
Three routes are provided:

* :func:`invariant_tree_sum` enumerates the trees of the reaction graph,
* :func:`invariant_cofactor` takes principal minors of ``I - M``,
* :func:`invariant_detailed_balance` orients one undirected spanning tree
  towards every state in turn, which is enough for detailed-balanced chains.

All of them return unnormalised weights together with their sum.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .core import STRICT, Scalar, StochasticMatrix, validate_stochastic
from .errors import (
    DetailedBalanceViolation,
    DimensionMismatch,
    EnumerationCapExceeded,
    TreeEdgeNotInGraph,
    TreeNotSpanning,
    ValidationError,
)
from .graph import ClassDecomposition, _check_vertex, build_graph, communicating_classes, reachability_set
from .linalg import bareiss_det, integer_rows
from .trees import Arborescence, count_arborescences, tree_cap, tree_weight_sum

TREE_SUM = "tree_sum"
COFACTOR = "cofactor"
DETAILED_BALANCE = "detailed_balance"
SOLVE = "solve"
POWER = "power"

INVARIANCE_TOL = 1e-12
DB_TOL = 1e-10
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class UndirectedTree:
    """Spanning tree on ``n`` vertices given by ``n - 1`` unordered edges."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple(sorted((min(e), max(e)) for e in self.edges))
        object.__setattr__(self, "edges", edges)
        if len(edges) != self.n - 1 or len(set(edges)) != len(edges):
            raise TreeNotSpanning(f"a spanning tree on {self.n} vertices has {self.n - 1} distinct edges")
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in edges:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise TreeNotSpanning(f"invalid tree edge {{{i}, {j}}}")
            ri, rj = find(i), find(j)
            if ri == rj:
                raise TreeNotSpanning(f"edge {{{i}, {j}}} closes a cycle")
            parent[ri] = rj

    @property
    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    @classmethod
    def parse(cls, text: str, n: int, *, one_based: bool = True) -> UndirectedTree:
        """Parse an edge list such as ``"1-2,2-3"``."""
        off = 1 if one_based else 0
        edges = []
        for part in text.replace(" ", "").split(","):
            if not part:
                continue
            a, sep, b = part.partition("-")
            if not sep:
                raise ValueError(f"bad tree edge {part!r}; expected 'i-j'")
            edges.append((int(a) - off, int(b) - off))
        return cls(n, tuple(edges))


@dataclass(frozen=True)
class InvariantMeasure:
    weights: tuple[Scalar, ...]
    normalizer: Scalar
    method: str
    exact: bool
    support: tuple[int, ...]
    tree: UndirectedTree | None = None
    info: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def is_zero(self) -> bool:
        return not self.support

    def normalized(self) -> tuple[Scalar, ...]:
        if self.normalizer == 0:
            raise ZeroDivisionError("the measure sums to zero and cannot be normalised")
        return tuple(w / self.normalizer for w in self.weights)


def make_measure(weights: Sequence[Scalar], method: str, exact: bool, **kwargs) -> InvariantMeasure:
    weights = tuple(weights)
    if exact:
        z = sum(weights, Fraction(0))
    else:
        z = math.fsum(weights)
    support = tuple(k for k, w in enumerate(weights) if w != 0)
    return InvariantMeasure(weights, z, method, exact, support, **kwargs)


def invariant_tree_sum(M: StochasticMatrix, *, cap: int | None = None) -> InvariantMeasure:
    """Weights from the rooted spanning trees of the reaction graph.

    Valid for reducible and signed (generalized-mode) matrices; states
    that not every other state can reach get weight zero.  In exact mode the
    fold runs on integers after clearing each row's denominators.
    """
    g = build_graph(M)
    n = M.n
    cap = tree_cap() if cap is None else cap
    for root in range(n):
        count = count_arborescences(g, root)
        if count > cap:
            raise EnumerationCapExceeded(count, cap)
    if M.exact:
        nums, scales = integer_rows(M.entries)
        weights = []
        for root in range(n):
            s = tree_weight_sum(g.succ, nums, root, 0, 1)
            denom = math.prod(scales[i] for i in range(n) if i != root)
            weights.append(Fraction(s, denom))
    else:
        weights = [tree_weight_sum(g.succ, M.entries, root, 0.0, 1.0) for root in range(n)]
    return make_measure(weights, TREE_SUM, M.exact)


def invariant_cofactor(M: StochasticMatrix) -> InvariantMeasure:
    """Weights as principal minors of the Laplacian ``I - M``.

    Float minors of strict matrices that come out slightly negative (above
    ``-CLAMP_TOL``) are clamped to zero with a warning.
    """
    n = M.n
    one = M.one
    lap = [[(one if i == j else 0) - x for j, x in enumerate(row)] for i, row in enumerate(M.entries)]
    weights = []
    if M.exact:
        nums, scales = integer_rows(lap)
        for j in range(n):
            minor = [[nums[r][c] for c in range(n) if c != j] for r in range(n) if r != j]
            denom = math.prod(scales[i] for i in range(n) if i != j)
            weights.append(Fraction(bareiss_det(minor), denom))
    else:
        arr = np.array(lap, dtype=float)
        for j in range(n):
            keep = [i for i in range(n) if i != j]
            d = float(np.linalg.det(arr[np.ix_(keep, keep)])) if keep else 1.0
            if M.mode == STRICT and d < 0:
                if d < -CLAMP_TOL:
                    raise ArithmeticError(f"principal minor {j} is negative: {d}")
                warnings.warn(f"clamping principal minor {j} = {d} to zero", RuntimeWarning, stacklevel=2)
                d = 0.0
            weights.append(d)
    return make_measure(weights, COFACTOR, M.exact)


class InvarianceResult(NamedTuple):
    ok: bool
    residual: Scalar


def check_invariance(M: StochasticMatrix, w: Sequence[Scalar], tol: float | None = None) -> InvarianceResult:
    """Test ``w^T M = w^T``.

    The residual is ``max_k |w_k - sum_j w_j m_jk|``.  With an exact matrix
    and exact weights the test is equality; otherwise the residual must stay
    below ``tol * max(1, max|w|)``.
    """
    if isinstance(w, InvariantMeasure):
        w = w.weights
    w = list(w)
    if len(w) != M.n:
        raise DimensionMismatch(f"vector of length {len(w)} for {M.n} states")
    exact = M.exact and all(isinstance(x, (int, Fraction)) for x in w)
    if exact:
        res = max(
            (abs(w[k] - sum((w[j] * M.entries[j][k] for j in range(M.n)), Fraction(0))) for k in range(M.n)),
            default=Fraction(0),
        )
        return InvarianceResult(res == 0, res)
    tol = INVARIANCE_TOL if tol is None else tol
    arr = M.to_numpy()
    wv = np.array([float(x) for x in w])
    res = float(np.max(np.abs(wv - wv @ arr))) if M.n else 0.0
    scale = max(1.0, float(np.max(np.abs(wv)))) if M.n else 1.0
    return InvarianceResult(res <= tol * scale, res)


@dataclass(frozen=True)
class StatePositivity:
    state: int
    reaches_all: bool
    positive: bool


@dataclass(frozen=True)
class PositivityCertificate:
    states: tuple[StatePositivity, ...]
    measure: InvariantMeasure

    @property
    def consistent(self) -> bool:
        """Every state is positive exactly when every state can reach it."""
        return all(s.reaches_all == s.positive for s in self.states)


def positivity_certificate(M: StochasticMatrix, *, cap: int | None = None) -> PositivityCertificate:
    if M.mode != STRICT:
        raise ValidationError("positivity certificates need a strict stochastic matrix")
    g = build_graph(M)
    w = invariant_tree_sum(M, cap=cap)
    rows = tuple(
        StatePositivity(k, len(reachability_set(g, k)) == M.n, w.weights[k] > 0) for k in range(M.n)
    )
    return PositivityCertificate(rows, w)


@dataclass(frozen=True)
class UniquenessReport:
    unique: bool
    w_zero: bool
    basis: tuple[InvariantMeasure, ...]
    classes: ClassDecomposition


def uniqueness_report(M: StochasticMatrix, *, cap: int | None = None) -> UniquenessReport:
    """One invariant measure per closed class, extended by zeros.

    A closed class has no transitions leaving it, so its block of ``M`` is a
    stochastic matrix in its own right and is used without renormalisation.
    """
    if M.mode != STRICT:
        raise ValidationError("uniqueness reports need a strict stochastic matrix")
    decomp = communicating_classes(build_graph(M))
    basis = []
    for cls in decomp.closed_classes:
        sub = validate_stochastic(M.submatrix(cls), M.mode, M.exact)
        local = invariant_tree_sum(sub, cap=cap)
        full = [M.zero] * M.n
        for idx, state in enumerate(cls):
            full[state] = local.weights[idx]
        basis.append(make_measure(full, TREE_SUM, M.exact))
    w = invariant_tree_sum(M, cap=cap)
    return UniquenessReport(len(basis) == 1, w.is_zero, tuple(basis), decomp)


@dataclass(frozen=True)
class DetailedBalanceReport:
    weakly_reversible: bool
    cycle_condition_holds: bool
    tolerance: float
    witness: tuple[int, int] | None = None
    worst_cycle: tuple[int, ...] | None = None
    forward_product: Scalar | None = None
    backward_product: Scalar | None = None
    max_log_ratio: float = 0.0
    cycles_checked: int = 0


def cycle_products(M: StochasticMatrix, cycle: Sequence[int]) -> tuple[Scalar, Scalar]:
    """Products of transition weights around ``cycle`` in both orientations."""
    fwd = bwd = M.one
    k = len(cycle)
    for idx in range(k):
        a, b = cycle[idx], cycle[(idx + 1) % k]
        fwd *= M.entries[a][b]
        bwd *= M.entries[b][a]
    return fwd, bwd


def _log(x) -> float:
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def _log_ratio(M: StochasticMatrix, cycle) -> float:
    k = len(cycle)
    s = 0.0
    for idx in range(k):
        a, b = cycle[idx], cycle[(idx + 1) % k]
        s += _log(M.entries[a][b]) - _log(M.entries[b][a])
    return abs(s)


def canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    """Rotate to the smallest vertex and orient so the second vertex is below the last."""
    k = len(cycle)
    start = min(range(k), key=lambda i: cycle[i])
    c = [cycle[(start + i) % k] for i in range(k)]
    if k > 2 and c[1] > c[-1]:
        c = [c[0]] + c[:0:-1]
    return tuple(c)


def _support_neighbours(M: StochasticMatrix) -> list[list[int]]:
    n = M.n
    return [[j for j in range(n) if j != i and (M.entries[i][j] > 0 or M.entries[j][i] > 0)] for i in range(n)]


def _bfs_forest(adj) -> tuple[list[int | None], list[int]]:
    n = len(adj)
    parent: list[int | None] = [None] * n
    depth = [-1] * n
    for start in range(n):
        if depth[start] != -1:
            continue
        depth[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if depth[u] == -1:
                    depth[u] = depth[v] + 1
                    parent[u] = v
                    queue.append(u)
    return parent, depth


def bfs_spanning_tree(M: StochasticMatrix) -> UndirectedTree:
    """Breadth-first spanning tree of the symmetrised support, rooted at state 0."""
    parent, _ = _bfs_forest(_support_neighbours(M))
    roots = [v for v in range(M.n) if parent[v] is None]
    if len(roots) > 1:
        raise TreeNotSpanning(f"the support graph has {len(roots)} connected components")
    return UndirectedTree(M.n, tuple((v, p) for v, p in enumerate(parent) if p is not None))


def _fundamental_cycle(u, v, parent, depth) -> list[int]:
    a, b = [u], [v]
    while depth[a[-1]] > depth[b[-1]]:
        a.append(parent[a[-1]])
    while depth[b[-1]] > depth[a[-1]]:
        b.append(parent[b[-1]])
    while a[-1] != b[-1]:
        a.append(parent[a[-1]])
        b.append(parent[b[-1]])
    # u -> v, then up the tree from v to the meeting vertex and down to u
    return b + a[:-1][::-1]


def detailed_balance_check(M: StochasticMatrix, tol: float = DB_TOL) -> DetailedBalanceReport:
    """Weak reversibility plus the cycle condition on a fundamental cycle basis.

    Each non-tree edge of a breadth-first spanning forest of the symmetrised
    support closes one cycle; the products around it in both directions must
    agree (exactly in exact mode, within ``tol`` on ``|log ratio|`` for
    floats).
    """
    if M.mode != STRICT:
        raise ValidationError("detailed balance checks need a strict stochastic matrix")
    n = M.n
    m = M.entries
    for i in range(n):
        for j in range(n):
            if i != j and m[i][j] > 0 and not m[j][i] > 0:
                return DetailedBalanceReport(False, False, tol, witness=(i, j))

    adj = _support_neighbours(M)
    parent, depth = _bfs_forest(adj)
    tree_edges = {(min(v, p), max(v, p)) for v, p in enumerate(parent) if p is not None}
    holds = True
    worst = None
    checked = 0
    for u in range(n):
        for v in adj[u]:
            if v < u or (u, v) in tree_edges:
                continue
            cyc = canonical_cycle(_fundamental_cycle(u, v, parent, depth))
            checked += 1
            dev = _log_ratio(M, cyc)
            if M.exact:
                fwd, bwd = cycle_products(M, cyc)
                ok = fwd == bwd
            else:
                ok = dev <= tol
            holds = holds and ok
            if worst is None or dev > worst[0]:
                worst = (dev, cyc)
    if worst is None:
        return DetailedBalanceReport(True, True, tol, cycles_checked=0)
    fwd, bwd = cycle_products(M, worst[1])
    return DetailedBalanceReport(
        True, holds, tol,
        worst_cycle=worst[1],
        forward_product=fwd,
        backward_product=bwd,
        max_log_ratio=worst[0],
        cycles_checked=checked,
    )


def orient_tree(t: UndirectedTree, root: int) -> Arborescence:
    """Direct every edge of ``t`` towards ``root``."""
    _check_vertex(t.n, root)
    adj = t.adjacency
    targets: list[int | None] = [None] * t.n
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                targets[u] = v
                queue.append(u)
    return Arborescence(root, tuple(targets))


def invariant_detailed_balance(
    M: StochasticMatrix,
    tree: UndirectedTree | None = None,
    *,
    check: bool = True,
    tol: float = DB_TOL,
) -> InvariantMeasure:
    """Weights from a single undirected spanning tree.

    ``w_k`` is the product of the weights of ``tree`` oriented towards
    ``k``.  Different trees give proportional results when the chain is
    detailed balanced; with ``check=True`` that is verified first and a
    :class:`DetailedBalanceViolation` is raised otherwise.  Without a tree
    the breadth-first tree of the support is used.
    """
    if check:
        report = detailed_balance_check(M, tol)
        if not report.cycle_condition_holds:
            raise DetailedBalanceViolation(report)
    if tree is None:
        tree = bfs_spanning_tree(M)
    if tree.n != M.n:
        raise TreeNotSpanning(f"tree has {tree.n} vertices, matrix has {M.n} states")
    m = M.entries
    for i, j in tree.edges:
        if not (m[i][j] > 0 and m[j][i] > 0):
            raise TreeEdgeNotInGraph(i, j)
    weights = []
    for k in range(M.n):
        arb = orient_tree(tree, k)
        w = M.one
        for i, j in arb.edges:
            w *= m[i][j]
        weights.append(w)
    return make_measure(weights, DETAILED_BALANCE, M.exact, tree=tree)

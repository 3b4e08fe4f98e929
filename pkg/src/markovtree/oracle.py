"""Independent baselines: elimination, power iteration, subset search, simulation.

Nothing here calls into the tree enumerator, so these routines can be used
to cross-check it.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import STRICT, StochasticMatrix, validate_stochastic
from .errors import InstanceTooLarge, ValidationError
from .graph import _check_vertex, build_graph

BRUTE_FORCE_MAX_N = 8
RANK_TOL = 1e-9


@dataclass(frozen=True)
class FixedSpaceBasis:
    """Basis of ``{v : v^T M = v^T}``; each vector has unit 1-norm and a positive dominant entry."""

    dimension: int
    vectors: tuple[tuple, ...]
    exact: bool


def _rref(a: list[list], exact: bool) -> tuple[list[list], list[int]]:
    """Reduced row echelon form with partial pivoting; returns the pivot columns."""
    rows, cols = len(a), len(a[0]) if a else 0
    a = [row[:] for row in a]
    scale = max((abs(x) for row in a for x in row), default=0)
    eps = 0 if exact else RANK_TOL * max(1.0, float(scale))
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = max(range(r, rows), key=lambda i: abs(a[i][c]))
        if abs(a[p][c]) <= eps:
            for i in range(r, rows):
                a[i][c] = 0 if exact else 0.0
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def null_space_solve(M: StochasticMatrix) -> FixedSpaceBasis:
    """Left fixed space of ``M`` by Gauss-Jordan elimination on ``(M - I)^T``."""
    n = M.n
    one = M.one
    zero = M.zero
    b = [[M.entries[j][i] - (one if i == j else zero) for j in range(n)] for i in range(n)]
    red, pivots = _rref(b, M.exact)
    free = [c for c in range(n) if c not in pivots]
    vectors = []
    for f in free:
        v = [zero] * n
        v[f] = one
        for row, c in enumerate(pivots):
            v[c] = -red[row][f]
        norm = sum(abs(x) for x in v)
        dominant = max(v, key=abs)
        sign = 1 if dominant > 0 else -1
        vectors.append(tuple(sign * x / norm for x in v))
    return FixedSpaceBasis(len(vectors), tuple(vectors), M.exact)


@dataclass(frozen=True)
class PowerResult:
    vector: np.ndarray
    converged: bool
    iterations: int


def power_iteration(
    M: StochasticMatrix,
    p0=None,
    max_iters: int = 100_000,
    tol: float = 1e-14,
) -> PowerResult:
    """Iterate ``p <- M^T p`` until the 1-norm change drops to ``tol``.

    Periodic chains need not converge; the flag reports that.
    """
    if M.mode != STRICT:
        raise ValidationError("power iteration needs a strict stochastic matrix")
    P = M.to_numpy()
    p = np.full(M.n, 1.0 / M.n) if p0 is None else np.asarray(p0, dtype=float)
    if p.shape != (M.n,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("p0 must be a probability vector of matching length")
    for it in range(1, max_iters + 1):
        nxt = p @ P
        change = float(np.abs(nxt - p).sum())
        p = nxt
        if change <= tol:
            return PowerResult(p, True, it)
    return PowerResult(p, False, max_iters)


def brute_force_tree_sum(M: StochasticMatrix, root: int, *, max_n: int = BRUTE_FORCE_MAX_N):
    """Tree weight of ``root`` by scanning every ``(n-1)``-subset of edges.

    Subsets are drawn from the reaction-graph edges that do not leave the
    root (no rooted tree uses any other edge) and kept when each non-root
    vertex has exactly one out-edge and every vertex reaches the root.
    """
    n = M.n
    if n > max_n:
        raise InstanceTooLarge(f"subset search is limited to n <= {max_n}, got {n}")
    _check_vertex(n, root)
    g = build_graph(M)
    candidates = [e for e in g.edges if e[0] != root]
    total = M.zero
    for subset in itertools.combinations(candidates, n - 1):
        out = {}
        for i, j in subset:
            if i in out:
                break
            out[i] = j
        else:
            if _all_reach(out, root, n):
                prod = M.one
                for e in subset:
                    prod *= g.weights[e]
                total += prod
    return total


def _all_reach(out: dict, root: int, n: int) -> bool:
    for v in range(n):
        steps = 0
        while v != root:
            v = out[v]
            steps += 1
            if steps >= n:
                return False
    return True


def simulate_chain(M: StochasticMatrix, start: int, steps: int, seed: int) -> np.ndarray:
    """Visit frequencies of one seeded trajectory of ``steps`` transitions."""
    if M.mode != STRICT:
        raise ValidationError("simulation needs a strict stochastic matrix")
    _check_vertex(M.n, start)
    P = M.to_numpy()
    cum = [list(itertools.accumulate(row)) for row in P.tolist()]
    last = [max(j for j in range(M.n) if P[i, j] > 0) for i in range(M.n)]
    draws = np.random.default_rng(seed).random(steps).tolist()
    counts = [0] * M.n
    state = start
    for u in draws:
        state = min(bisect.bisect_right(cum[state], u * cum[state][-1]), last[state])
        counts[state] += 1
    return np.array(counts, dtype=float) / steps


# seeded random instances --------------------------------------------------


def random_stochastic(n: int, rng: np.random.Generator, *, sparsity: float = 0.0, exact: bool = True) -> StochasticMatrix:
    """Uniform entries, those below ``sparsity`` zeroed, rows renormalised.

    Rows left empty become a self-loop of weight 1.
    """
    u = rng.random((n, n))
    mask = u >= sparsity
    if exact:
        vals = rng.integers(1, 16, size=(n, n))
        rows = []
        for i in range(n):
            row = [int(vals[i, j]) if mask[i, j] else 0 for j in range(n)]
            s = sum(row)
            if s == 0:
                row[i], s = 1, 1
            rows.append([Fraction(x, s) for x in row])
        return validate_stochastic(rows, STRICT, True)
    rows = np.where(mask, u, 0.0)
    for i in range(n):
        if rows[i].sum() == 0:
            rows[i, i] = 1.0
    rows = rows / rows.sum(axis=1, keepdims=True)
    return validate_stochastic(rows.tolist(), STRICT, False)


def random_reducible(n: int, rng: np.random.Generator, *, exact: bool = True) -> StochasticMatrix:
    """A matrix with at least two communicating classes.

    States are split into 2..4 blocks; transitions between blocks only run
    from later blocks to earlier ones, then the states are shuffled.
    """
    if n < 2:
        raise ValueError("a reducible matrix needs n >= 2")
    nblocks = int(rng.integers(2, min(n, 4) + 1))
    cuts = sorted(rng.choice(np.arange(1, n), size=nblocks - 1, replace=False).tolist())
    block = np.zeros(n, dtype=int)
    for c in cuts:
        block[c:] += 1
    inner_density = rng.uniform(0.3, 1.0)
    link = rng.random((nblocks, nblocks)) < 0.5
    raw = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            a, b = block[i], block[j]
            if a == b:
                keep = rng.random() < inner_density
            elif a > b:
                keep = link[a, b] and rng.random() < 0.5
            else:
                keep = False
            if keep:
                raw[i, j] = rng.integers(1, 10)
    for i in range(n):
        if raw[i].sum() == 0:
            raw[i, i] = 1
    perm = rng.permutation(n)
    raw = raw[np.ix_(perm, perm)]
    if exact:
        rows = [[Fraction(int(x), int(r.sum())) for x in r] for r in raw]
        return validate_stochastic(rows, STRICT, True)
    return validate_stochastic((raw / raw.sum(axis=1, keepdims=True)).tolist(), STRICT, False)


def random_detailed_balanced(n: int, rng: np.random.Generator, *, density: float = 0.6, exact: bool = True):
    """A reversible chain built from positive state weights and symmetric rates.

    Returns ``(M, pi)`` with ``pi_i m_ij = pi_j m_ji``.  A random path
    through all states keeps the support connected.
    """
    pi = [int(x) for x in rng.integers(1, 10, size=n)]
    sym = [[0] * n for _ in range(n)]
    order = rng.permutation(n).tolist()
    for a, b in zip(order, order[1:]):
        sym[a][b] = sym[b][a] = int(rng.integers(1, 10))
    for i in range(n):
        for j in range(i + 1, n):
            if sym[i][j] == 0 and rng.random() < density:
                sym[i][j] = sym[j][i] = int(rng.integers(1, 10))
    out = [sum(Fraction(sym[i][j], pi[i]) for j in range(n) if j != i) for i in range(n)]
    c = max(out, default=Fraction(0)) * Fraction(int(rng.integers(10, 20)), 10) or Fraction(1)
    rows = []
    for i in range(n):
        row = [Fraction(sym[i][j], pi[i]) / c if j != i else Fraction(0) for j in range(n)]
        row[i] = 1 - sum(row)
        rows.append(row)
    if not exact:
        rows = [[float(x) for x in row] for row in rows]
    return validate_stochastic(rows, STRICT, exact), pi


def random_spanning_tree(M: StochasticMatrix, rng: np.random.Generator):
    """Random spanning tree of the symmetrised support (shuffled Kruskal)."""
    from .measure import UndirectedTree

    n = M.n
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if M.entries[i][j] > 0 or M.entries[j][i] > 0]
    rng.shuffle(edges)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
    return UndirectedTree(n, tuple(chosen))


def cycle_graph_matrix(rates, *, exact: bool = True) -> StochasticMatrix:
    """Directed cycle ``0 -> 1 -> ... -> n-1 -> 0`` with the given forward rates.

    Each state keeps ``1 - rate`` on its diagonal.
    """
    n = len(rates)
    conv = Fraction if exact else float
    rows = []
    for i, r in enumerate(rates):
        row = [conv(0)] * n
        row[(i + 1) % n] = conv(r)
        row[i] = 1 - conv(r)
        rows.append(row)
    return validate_stochastic(rows, STRICT, exact)


def max_abs_diff(a, b) -> float:
    return max((abs(float(x) - float(y)) for x, y in zip(a, b)), default=0.0)

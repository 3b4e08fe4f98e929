"""Acceptance suite: ten numbered criteria, each with a wall-clock limit.

Run ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

import time
from collections import Counter
from contextlib import contextmanager
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from markovtree import (
    GENERALIZED,
    STRICT,
    UndirectedTree,
    build_graph,
    check_invariance,
    communicating_classes,
    detailed_balance_check,
    invariant_cofactor,
    invariant_detailed_balance,
    invariant_tree_sum,
    positivity_certificate,
    uniqueness_report,
    validate_stochastic,
)
from markovtree.graph import complete_graph
from markovtree.oracle import (
    brute_force_tree_sum,
    cycle_graph_matrix,
    null_space_solve,
    random_detailed_balanced,
    random_reducible,
    random_spanning_tree,
    random_stochastic,
)
from markovtree.trees import enumerate_arborescences, enumerate_marked_graphs

SEED = 20261016


@contextmanager
def within(limit):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < limit, f"took {elapsed:.1f} s, limit {limit} s"


def proportional(a, b):
    """Exact proportionality of two nonzero vectors with the same support."""
    if [x == 0 for x in a] != [y == 0 for y in b]:
        return False
    ratios = {x / y for x, y in zip(a, b) if y != 0}
    return len(ratios) == 1


def m(M, i, j):
    # 1-based entry access, to keep closed forms legible
    return M.entries[i - 1][j - 1]


@pytest.mark.acceptance(1, "three-state closed form", 1)
def test_closed_form_three_states():
    rng = np.random.default_rng(SEED)
    with within(1):
        for _ in range(20):
            M = random_stochastic(3, rng, exact=True)
            assert all(M.entries[i][j] > 0 for i in range(3) for j in range(3))
            expected = (
                m(M, 2, 1) * m(M, 3, 1) + m(M, 2, 3) * m(M, 3, 1) + m(M, 2, 1) * m(M, 3, 2),
                m(M, 1, 2) * m(M, 3, 2) + m(M, 1, 2) * m(M, 3, 1) + m(M, 1, 3) * m(M, 3, 2),
                m(M, 1, 3) * m(M, 2, 3) + m(M, 1, 3) * m(M, 2, 1) + m(M, 1, 2) * m(M, 2, 3),
            )
            assert invariant_tree_sum(M).weights == expected


@pytest.mark.acceptance(2, "five-state cycle", 1)
def test_five_cycle():
    rng = np.random.default_rng(SEED)
    rate_sets = [[Fraction(1, k) for k in range(2, 7)]]
    rate_sets += [[Fraction(int(rng.integers(1, 20)), 20) for _ in range(5)] for _ in range(10)]
    with within(1):
        for rates in rate_sets:
            M = cycle_graph_matrix(rates)
            m12, m23, m34, m45, m51 = (m(M, i, i % 5 + 1) for i in range(1, 6))
            expected = (
                m23 * m34 * m45 * m51,
                m12 * m34 * m45 * m51,
                m12 * m23 * m45 * m51,
                m12 * m23 * m34 * m51,
                m12 * m23 * m34 * m45,
            )
            w = invariant_tree_sum(M)
            assert w.weights == expected
            inv = [1 / m12, 1 / m23, 1 / m34, 1 / m45, 1 / m51]
            assert w.normalized() == tuple(x / sum(inv) for x in inv)


@pytest.mark.acceptance(3, "signed matrix", 1)
def test_signed_matrix():
    with within(1):
        M = validate_stochastic([[1, -1, 1], [1, 1, -1], [-1, 1, 1]], GENERALIZED)
        w = invariant_tree_sum(M)
        assert w.weights == (1, 1, 1)
        assert all(isinstance(x, (int, Fraction)) for x in w.weights)
        assert check_invariance(M, w.weights).residual == 0


@pytest.mark.acceptance(4, "tree sums are invariant on 500 random matrices", 60)
def test_tree_sum_invariance_corpus():
    rng = np.random.default_rng(SEED)
    with within(60):
        for _ in range(500):
            n = int(rng.integers(2, 9))
            sparsity = float(rng.choice([0.0, 0.2, 0.4, 0.6]))
            M = random_stochastic(n, rng, sparsity=sparsity, exact=True)
            exact = check_invariance(M, invariant_tree_sum(M).weights)
            assert exact.ok and exact.residual == 0
            F = M.to_float()
            approx = check_invariance(F, invariant_tree_sum(F).weights, 1e-12)
            assert approx.ok, approx.residual


@pytest.mark.acceptance(5, "tree and marked-graph counts on complete graphs", 120)
def test_counts_by_enumeration():
    with within(120):
        expected = {2: 1, 3: 3, 4: 16, 5: 125, 6: 1296, 7: 16807}
        for n, count in expected.items():
            assert count == n ** (n - 2)
            g = complete_graph(n)
            roots = range(n) if n <= 6 else [0, n - 1]
            for root in roots:
                assert sum(1 for _ in enumerate_arborescences(g, root)) == count
        for n in range(1, 7):
            for k in range(1, n + 1):
                for marked in combinations(range(n), k):
                    found = sum(1 for _ in enumerate_marked_graphs(n, marked))
                    assert found == (n - k) * n ** (k - 1), (n, marked)


def exchange_sides(n, j):
    g = complete_graph(n)
    s1 = Counter(t.with_edge_from(j, k) for t in enumerate_arborescences(g, j) for k in range(n) if k != j)
    s2 = Counter(t.with_edge_from(k, j) for k in range(n) if k != j for t in enumerate_arborescences(g, k))
    return s1, s2


@pytest.mark.acceptance(6, "exchange bijection", 60)
def test_exchange_bijection():
    with within(60):
        mismatches = 0
        for n in range(2, 7):
            for j in range(n):
                s1, s2 = exchange_sides(n, j)
                assert max(s1.values()) == 1 and max(s2.values()) == 1
                assert sum(s1.values()) == (n - 1) * n ** (n - 2)
                mismatches += sum(((s1 - s2) + (s2 - s1)).values())
        assert mismatches == 0


def reducible_corpus():
    rng = np.random.default_rng(SEED)
    return [random_reducible(int(rng.integers(2, 9)), rng) for _ in range(200)]


@pytest.mark.acceptance(7, "positivity and uniqueness", 60)
def test_positivity_and_uniqueness():
    with within(60):
        violations = 0
        zero_cases = nonzero_cases = 0
        for M in reducible_corpus():
            cert = positivity_certificate(M)
            violations += sum(s.reaches_all != s.positive for s in cert.states)
            if M.n >= 3:
                w_zero = invariant_tree_sum(M).is_zero
                non_unique = null_space_solve(M).dimension >= 2
                violations += w_zero != non_unique
                zero_cases += w_zero
                nonzero_cases += not w_zero
        assert violations == 0
        # the corpus exercises both sides of the equivalence
        assert zero_cases > 0 and nonzero_cases > 0


@pytest.mark.acceptance(8, "closed-class decomposition", 60)
def test_closed_class_decomposition():
    with within(60):
        for M in reducible_corpus():
            closed = communicating_classes(build_graph(M)).closed_classes
            assert null_space_solve(M).dimension == len(closed)
            report = uniqueness_report(M)
            assert len(report.basis) == len(closed)
            for cls, measure in zip(closed, report.basis):
                res = check_invariance(M, measure.weights)
                assert res.ok and res.residual == 0
                assert measure.support == cls


def section7_matrix(a, b, c, d, e, f):
    # a = m13, b = m32, c = m21, d = m31, e = m12, f = m23
    return validate_stochastic(
        [[1 - a - e, e, a], [c, 1 - c - f, f], [d, b, 1 - b - d]],
        STRICT,
    )


@pytest.mark.acceptance(9, "detailed balance single-tree measures", 60)
def test_detailed_balance():
    a, b, c = Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)
    d, e, f = Fraction(1, 6), Fraction(1, 2), Fraction(1, 2)
    assert a * b * c == d * e * f
    with within(60):
        M = section7_matrix(a, b, c, d, e, f)
        assert detailed_balance_check(M).cycle_condition_holds
        w1 = invariant_detailed_balance(M, UndirectedTree.parse("1-2,2-3", 3))
        w2 = invariant_detailed_balance(M, UndirectedTree.parse("1-3,3-2", 3))
        assert w1.weights == (b * c, b * e, e * f)
        assert w2.weights == (d * f, a * b, a * f)
        assert all(x / y == e / a for x, y in zip(w1.weights, w2.weights))

        rng = np.random.default_rng(SEED)
        for _ in range(100):
            n = int(rng.integers(2, 8))
            M, _ = random_detailed_balanced(n, rng)
            assert detailed_balance_check(M).cycle_condition_holds
            t1, t2 = random_spanning_tree(M, rng), random_spanning_tree(M, rng)
            u1 = invariant_detailed_balance(M, t1).weights
            u2 = invariant_detailed_balance(M, t2).weights
            assert proportional(u1, u2)
            assert proportional(u1, invariant_tree_sum(M).weights)


def triangle_corpus():
    rng = np.random.default_rng(SEED)
    corpus = []
    for n in range(1, 7):
        for sparsity in (0.0, 0.3, 0.6):
            corpus += [random_stochastic(n, rng, sparsity=sparsity) for _ in range(3)]
    corpus += [random_stochastic(7, rng, sparsity=0.6) for _ in range(4)]
    return corpus


@pytest.mark.acceptance(10, "tree sum, cofactor, subset search and elimination agree", 120)
def test_oracle_triangle():
    with within(120):
        irreducible = 0
        for M in triangle_corpus():
            tree = invariant_tree_sum(M).weights
            assert tree == invariant_cofactor(M).weights
            assert tree == tuple(brute_force_tree_sum(M, k) for k in range(M.n))
            F = M.to_float()
            basis = null_space_solve(F)
            if basis.dimension == 1 and all(x > 0 for x in tree):
                irreducible += 1
                ref = np.array(basis.vectors[0])
                for w in (invariant_tree_sum(F), invariant_cofactor(F)):
                    assert np.max(np.abs(np.array(w.normalized()) - ref)) <= 1e-10
        assert irreducible >= 20


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markovtree import (
    InstanceTooLarge,
    build_graph,
    check_invariance,
    communicating_classes,
    invariant_tree_sum,
    is_irreducible,
    validate_stochastic,
)
from markovtree.core import identity
from markovtree.oracle import (
    brute_force_tree_sum,
    cycle_graph_matrix,
    max_abs_diff,
    null_space_solve,
    power_iteration,
    random_reducible,
    random_stochastic,
    simulate_chain,
)

F = Fraction
RATES = [F(1, k) for k in range(2, 7)]
FIVE_CYCLE = cycle_graph_matrix(RATES)


def normalized_inverse_rates(rates):
    inv = [1 / r for r in rates]
    return [x / sum(inv) for x in inv]


def test_solve_five_cycle():
    basis = null_space_solve(FIVE_CYCLE)
    assert basis.dimension == 1 and basis.exact
    assert list(basis.vectors[0]) == normalized_inverse_rates(RATES)
    assert check_invariance(FIVE_CYCLE, basis.vectors[0]).residual == 0


def test_solve_identity():
    basis = null_space_solve(identity(3))
    assert basis.dimension == 3
    assert set(basis.vectors) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_solve_two_blocks():
    M = validate_stochastic([[F(1, 2), F(1, 2), 0, 0], [F(1, 3), F(2, 3), 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    basis = null_space_solve(M)
    assert basis.dimension == 2
    for v in basis.vectors:
        assert check_invariance(M, v).residual == 0
        assert sum(abs(x) for x in v) == 1


def test_solve_float():
    basis = null_space_solve(FIVE_CYCLE.to_float())
    assert basis.dimension == 1 and not basis.exact
    assert max_abs_diff(basis.vectors[0], normalized_inverse_rates(RATES)) <= 1e-12
    assert check_invariance(FIVE_CYCLE.to_float(), basis.vectors[0], 1e-10).ok


def test_power_one_step():
    res = power_iteration(validate_stochastic([[0.5, 0.5], [0.5, 0.5]]), p0=[1.0, 0.0])
    assert res.converged and res.iterations <= 2
    assert np.allclose(res.vector, [0.5, 0.5], atol=0, rtol=0)


def test_power_lazy_cycle():
    M = cycle_graph_matrix(RATES, exact=False)
    res = power_iteration(M)
    assert res.converged
    assert max_abs_diff(res.vector, normalized_inverse_rates(RATES)) <= 1e-8


def test_power_periodic_flagged():
    res = power_iteration(validate_stochastic([[0.0, 1.0], [1.0, 0.0]]), p0=[1.0, 0.0], max_iters=50)
    assert not res.converged and res.iterations == 50


def test_power_rejects_bad_start():
    with pytest.raises(ValueError):
        power_iteration(FIVE_CYCLE, p0=[0.5, 0.5])


def test_brute_force_examples():
    rng = np.random.default_rng(1)
    M = random_stochastic(3, rng)
    m = lambda i, j: M.entries[i - 1][j - 1]  # noqa: E731
    assert brute_force_tree_sum(M, 0) == m(2, 1) * m(3, 1) + m(2, 3) * m(3, 1) + m(2, 1) * m(3, 2)
    m12, m34, m45, m51 = RATES[0], RATES[2], RATES[3], RATES[4]
    assert brute_force_tree_sum(FIVE_CYCLE, 1) == m12 * m34 * m45 * m51
    assert brute_force_tree_sum(identity(4), 2) == 0


def test_brute_force_limit():
    with pytest.raises(InstanceTooLarge):
        brute_force_tree_sum(identity(9), 0)


def test_simulation_identity():
    freq = simulate_chain(identity(3), 0, 1000, seed=1)
    assert list(freq) == [1.0, 0.0, 0.0]


def test_simulation_stays_in_block():
    M = validate_stochastic([[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5], [0, 0, 0.5, 0.5]])
    freq = simulate_chain(M, 0, 10_000, seed=2)
    assert freq[2] == freq[3] == 0


def test_simulation_lazy_cycle():
    rates = [F(1, 2)] * 5
    M = cycle_graph_matrix(rates, exact=False)
    freq = simulate_chain(M, 0, 10**6, seed=3)
    assert max_abs_diff(freq, normalized_inverse_rates(rates)) <= 0.01


def test_simulation_is_seeded():
    M = cycle_graph_matrix(RATES, exact=False)
    assert list(simulate_chain(M, 0, 5000, seed=9)) == list(simulate_chain(M, 0, 5000, seed=9))


def test_simulation_within_statistical_tolerance():
    M = random_stochastic(5, np.random.default_rng(4), exact=False)
    steps = 200_000
    freq = simulate_chain(M, 0, steps, seed=5)
    w = invariant_tree_sum(M).normalized()
    assert max_abs_diff(freq, w) <= 5 / steps**0.5


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.4, 0.7]))
def test_brute_force_matches_tree_sum(n, seed, sparsity):
    # full-support n = 7 means millions of subsets per root; the acceptance suite covers sparse n = 7
    M = random_stochastic(n, np.random.default_rng(seed), sparsity=sparsity)
    assert tuple(brute_force_tree_sum(M, k) for k in range(n)) == invariant_tree_sum(M).weights


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.booleans())
def test_solve_dimension_counts_closed_classes(n, seed, reducible):
    rng = np.random.default_rng(seed)
    M = random_reducible(n, rng) if reducible and n >= 2 else random_stochastic(n, rng, sparsity=0.5)
    g = build_graph(M)
    basis = null_space_solve(M)
    assert basis.dimension == len(communicating_classes(g).closed_classes)
    for v in basis.vectors:
        assert check_invariance(M, v).residual == 0
    rank = np.linalg.matrix_rank(np.array([[float(x) for x in v] for v in basis.vectors]))
    assert rank == basis.dimension
    if is_irreducible(g):
        w = invariant_tree_sum(M)
        assert tuple(basis.vectors[0]) == w.normalized()

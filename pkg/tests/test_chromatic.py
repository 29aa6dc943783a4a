import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from sbmchroma.chromatic import (BudgetExceededError, alpha_h,
                                 balanced_extraction_colouring,
                                 dsatur_colouring, exact_chromatic,
                                 exact_colouring, find_balanced_independent_set,
                                 independent_set_probability, max_avg_degree,
                                 partition_objective)
from sbmchroma.functionals import GuardError
from sbmchroma.graphs import BlowUpSpec, SbmGraph, blow_up, sample_sbm
from sbmchroma.model import BlockVector, ModelError, ModelInstance, ProbMatrix


def complete_graph(n):
    return SbmGraph(n, [0] * n, [(u, v) for u in range(n)
                                 for v in range(u + 1, n)], k=1)


def cycle_graph(n):
    return SbmGraph(n, [0] * n, [(i, (i + 1) % n) for i in range(n)], k=1)


PETERSEN = SbmGraph(10, [0] * 10,
                    [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
                     (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
                     (0, 5), (1, 6), (2, 7), (3, 8), (4, 9)], k=1)


def brute_force_chromatic(g: SbmGraph) -> int:
    """Independent oracle: try all assignments with c colours, c ascending."""
    for c in range(1, g.n + 1):
        for assign in itertools.product(range(c), repeat=g.n):
            if all(assign[u] != assign[v] for u, v in g.edges):
                return c
    return 0


class TestExactChromatic:
    def test_complete(self):
        assert exact_chromatic(complete_graph(4)) == 4

    def test_odd_cycle(self):
        assert exact_chromatic(cycle_graph(5)) == 3

    def test_petersen_vs_bruteforce(self):
        assert brute_force_chromatic(PETERSEN) == 3
        assert exact_chromatic(PETERSEN) == 3

    def test_matches_bruteforce_on_random(self):
        rng = np.random.default_rng(0)
        for i in range(25):
            n = int(rng.integers(1, 8))
            edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                     if rng.random() < 0.5]
            g = SbmGraph(n, [0] * n, edges, k=1)
            assert exact_chromatic(g) == brute_force_chromatic(g)

    def test_budget_error_carries_bracket(self):
        g = sample_sbm(ModelInstance.gnp(40, 0.5), 5)
        with pytest.raises(BudgetExceededError) as err:
            exact_chromatic(g, budget=3)
        assert 1 <= err.value.lower <= err.value.upper <= 40

    def test_colouring_is_proper_and_canonical(self):
        g = sample_sbm(ModelInstance.gnp(30, 0.4), 9)
        col = exact_colouring(g)
        col.check_proper(g)
        assert sorted(set(col.colour_of.tolist())) == list(range(col.num_colours))


class TestDsatur:
    def test_empty_graph_one_colour(self):
        g = SbmGraph(5, [0] * 5, [], k=1)
        assert dsatur_colouring(g, 0).num_colours == 1

    def test_complete_graph(self):
        assert dsatur_colouring(complete_graph(6), 0).num_colours == 6

    def test_exact_on_bipartite(self):
        rng = np.random.default_rng(1)
        for i in range(40):
            n1, n2 = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            edges = [(u, n1 + v) for u in range(n1) for v in range(n2)
                     if rng.random() < 0.5]
            g = SbmGraph(n1 + n2, [0] * (n1 + n2), edges, k=1)
            col = dsatur_colouring(g, seed=i)
            col.check_proper(g)
            assert col.num_colours <= 2

    def test_deterministic_given_seed(self):
        g = sample_sbm(ModelInstance.gnp(40, 0.5), 3)
        a = dsatur_colouring(g, seed=5)
        b = dsatur_colouring(g, seed=5)
        assert np.array_equal(a.colour_of, b.colour_of)

    def test_never_below_exact(self):
        rng = np.random.default_rng(2)
        for i in range(20):
            n = int(rng.integers(2, 30))
            g = sample_sbm(ModelInstance.gnp(n, float(rng.uniform(0.2, 0.8))),
                           100 + i)
            assert dsatur_colouring(g, i).num_colours >= exact_chromatic(g)


class TestMad:
    def test_triangle(self):
        assert max_avg_degree(complete_graph(3)) == Fraction(2)

    def test_path_three(self):
        g = SbmGraph(3, [0] * 3, [(0, 1), (1, 2)], k=1)
        assert max_avg_degree(g) == Fraction(4, 3)

    def test_edgeless(self):
        assert max_avg_degree(SbmGraph(4, [0] * 4, [], k=1)) == Fraction(0)

    def test_flow_path_matches_bruteforce(self):
        # same graph through both code paths (padding forces the flow path)
        rng = np.random.default_rng(3)
        for i in range(10):
            n = int(rng.integers(4, 15))
            edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                     if rng.random() < 0.4]
            g_small = SbmGraph(n, [0] * n, edges, k=1)
            pad = 22 - n  # isolated vertices leave mad unchanged
            g_big = SbmGraph(22, [0] * 22, edges, k=1)
            assert max_avg_degree(g_big) == max_avg_degree(g_small)

    def test_chi_at_most_one_plus_floor_mad(self):
        rng = np.random.default_rng(4)
        for i in range(20):
            n = int(rng.integers(2, 26))
            g = sample_sbm(ModelInstance.gnp(n, float(rng.uniform(0.2, 0.8))),
                           200 + i)
            if g.m == 0:
                continue
            assert exact_chromatic(g) <= 1 + math.floor(max_avg_degree(g))


class TestPartitionObjective:
    def test_k3_examples(self):
        g = complete_graph(3)
        assert partition_objective(g, [[0], [1], [2]]) == Fraction(3)
        assert partition_objective(g, [[0, 1, 2]]) == Fraction(3)

    def test_colour_classes_give_chi(self):
        g = sample_sbm(ModelInstance.gnp(12, 0.5), 11)
        col = exact_colouring(g)
        classes = [[v for v in range(g.n) if col.colour_of[v] == c]
                   for c in range(col.num_colours)]
        assert partition_objective(g, classes) == Fraction(col.num_colours)

    def test_rejects_bad_partition(self):
        g = complete_graph(3)
        with pytest.raises(ModelError):
            partition_objective(g, [[0, 1]])
        with pytest.raises(ModelError):
            partition_objective(g, [[0, 1], [1, 2]])


class TestIndependenceProbability:
    def test_small_sets_are_certain(self):
        m = ModelInstance.gnp(5, 0.7)
        assert independent_set_probability(m, []) == 0.0
        assert independent_set_probability(m, [2]) == 0.0

    def test_three_vertices_one_block(self):
        m = ModelInstance.gnp(5, 0.5)
        got = independent_set_probability(m, [0, 1, 2])
        assert got == pytest.approx(-3 * math.log(2), abs=1e-12)

    def test_matrix_identity(self):
        # b^T Q b == -2 lnPr + sum_i q_ii b_i
        rng = np.random.default_rng(5)
        for _ in range(200):
            k = int(rng.integers(1, 4))
            sizes = rng.integers(1, 6, k)
            a = rng.uniform(0, 0.9, (k, k))
            m = ModelInstance(BlockVector(sizes, integer=True),
                              ProbMatrix((a + a.T) / 2))
            n = int(sizes.sum())
            picks = [v for v in range(n) if rng.random() < 0.6]
            block_of = np.repeat(np.arange(k), sizes)
            b = np.bincount(block_of[picks], minlength=k) if picks else np.zeros(k)
            lnp = independent_set_probability(m, picks)
            lhs = float(b @ m.q.entries @ b)
            rhs = -2.0 * lnp + float(np.diag(m.q.entries) @ b)
            assert lhs == pytest.approx(rhs, abs=1e-9)


class TestAlphaH:
    def test_edgeless_block_takes_everything(self):
        m = ModelInstance.gnp(3, 0.5)
        g = SbmGraph(3, [0] * 3, [], k=1)
        res = alpha_h(m, g, "exact")
        assert res.exact
        assert res.best_set == frozenset({0, 1, 2})
        assert res.h_value == pytest.approx(math.log(2), abs=1e-12)

    def test_single_vertex(self):
        m = ModelInstance.gnp(1, 0.5)
        g = SbmGraph(1, [0], [], k=1)
        assert alpha_h(m, g, "exact").h_value == 0.0

    def test_complete_graph_gives_zero(self):
        m = ModelInstance.gnp(6, 0.5)
        res = alpha_h(m, complete_graph(6), "exact")
        assert res.h_value == 0.0
        assert len(res.best_set) == 1

    def test_exact_equals_subset_bruteforce(self):
        rng = np.random.default_rng(6)
        for i in range(15):
            k = int(rng.integers(1, 3))
            sizes = rng.integers(2, 8, k)
            n = int(sizes.sum())
            if n > 15:
                continue
            a = rng.uniform(0.1, 0.8, (k, k))
            m = ModelInstance(BlockVector(sizes, integer=True),
                              ProbMatrix((a + a.T) / 2))
            g = sample_sbm(m, 300 + i)
            adj = g.adjacency_bits()
            best = 0.0
            for mask in range(1, 1 << n):
                vs = [v for v in range(n) if (mask >> v) & 1]
                if any((adj[u] >> v) & 1 for u in vs for v in vs if v > u):
                    continue
                h = -independent_set_probability(m, vs,
                                                 block_of=g.block_of) / len(vs)
                best = max(best, h)
            got = alpha_h(m, g, "exact").h_value
            assert got == pytest.approx(best, abs=1e-12)

    def test_heuristic_matches_exact_on_small(self):
        for i in range(5):
            m = ModelInstance.gnp(30, 0.5)
            g = sample_sbm(m, 400 + i)
            ex = alpha_h(m, g, "exact").h_value
            he = alpha_h(m, g, "heuristic", seed=i).h_value
            assert he <= ex + 1e-12
            assert he == pytest.approx(ex, abs=1e-9)

    def test_exact_mode_beyond_40_vertices_when_enumeration_fits(self):
        # the guard is "n <= 40 OR enumeration <= 1e7 nodes": dense graphs
        # at moderate n keep the count small and stay in-guard
        m = ModelInstance.gnp(50, 0.5)
        g = sample_sbm(m, 77)
        res = alpha_h(m, g, "exact")
        assert res.exact and res.h_value > 0

    def test_exact_node_cap_guard(self):
        # sparse mid-size instance: far too many independent sets
        m = ModelInstance.gnp(62, 0.08)
        g = sample_sbm(m, 0)
        with pytest.raises(GuardError):
            alpha_h(m, g, "exact")

    def test_exact_hard_size_guard(self):
        m = ModelInstance.gnp(600, 0.5)
        g = sample_sbm(m, 0)
        with pytest.raises(GuardError):
            alpha_h(m, g, "exact")


class TestFindBalanced:
    def test_singleton_target(self):
        m = ModelInstance(BlockVector.integral([3, 3]),
                          ProbMatrix([[0.5, 0.5], [0.5, 0.5]]))
        g = sample_sbm(m, 1)
        got = find_balanced_independent_set(m, g, BlockVector.integral([0, 1]),
                                            seed=0)
        assert got is not None and len(got) == 1
        assert g.block_of[next(iter(got))] == 1

    def test_empty_graph_any_feasible_target(self):
        m = ModelInstance(BlockVector.integral([4, 4]),
                          ProbMatrix(np.zeros((2, 2))))
        g = sample_sbm(m, 2)
        got = find_balanced_independent_set(m, g, BlockVector.integral([3, 2]),
                                            seed=0)
        assert got is not None
        assert g.b_vector(got).tolist() == [3, 2]

    def test_dense_infeasible_target_fails(self):
        # expected number of independent 10-sets in G(30, .9) is << 1
        m = ModelInstance.gnp(30, 0.9)
        for seed in range(20):
            g = sample_sbm(m, 500 + seed)
            got = find_balanced_independent_set(
                m, g, BlockVector.integral([10]), seed=seed, effort=4)
            assert got is None

    def test_result_is_independent(self):
        m = ModelInstance(BlockVector.integral([6, 6]),
                          ProbMatrix([[0.2, 0.1], [0.1, 0.2]]))
        g = sample_sbm(m, 3)
        got = find_balanced_independent_set(m, g, BlockVector.integral([2, 2]),
                                            seed=1)
        if got is not None:
            vs = sorted(got)
            assert not any(g.has_edge(u, v) for u in vs for v in vs if v > u)


class TestBalancedExtraction:
    def test_edgeless_graph_single_colour(self):
        m = ModelInstance(BlockVector.integral([6]), ProbMatrix([[0.0]]))
        g = sample_sbm(m, 0)
        col = balanced_extraction_colouring(m, g, seed=0)
        assert col.num_colours == 1

    def test_complete_blowup_needs_all_colours(self):
        spec = BlowUpSpec.from_edges(1, [], [5])
        g = blow_up(spec)
        m = ModelInstance(BlockVector.integral([5]), ProbMatrix([[0.9]]))
        col = balanced_extraction_colouring(m, g, seed=0)
        col.check_proper(g)
        assert col.num_colours == 5

    def test_proper_and_close_to_dsatur(self):
        m = ModelInstance.gnp(120, 0.5)
        ratios = []
        for seed in range(5):
            g = sample_sbm(m, 600 + seed)
            ext = balanced_extraction_colouring(m, g, epsilon=0.2, seed=seed)
            ext.check_proper(g)
            base = dsatur_colouring(g, seed=seed).num_colours
            ratios.append(ext.num_colours / base)
        assert np.median(ratios) <= 1.15

    def test_rejects_bad_epsilon(self):
        m = ModelInstance.gnp(5, 0.5)
        g = sample_sbm(m, 1)
        with pytest.raises(ModelError):
            balanced_extraction_colouring(m, g, epsilon=1.5)

    def test_exact_never_above_heuristics(self):
        rng = np.random.default_rng(8)
        for i in range(12):
            k = int(rng.integers(1, 3))
            sizes = rng.integers(4, 14, k)
            if sizes.sum() > 40:
                continue
            a = rng.uniform(0.2, 0.7, (k, k))
            m = ModelInstance(BlockVector(sizes, integer=True),
                              ProbMatrix((a + a.T) / 2))
            g = sample_sbm(m, 700 + i)
            chi = exact_chromatic(g)
            assert chi <= dsatur_colouring(g, seed=i).num_colours
            assert chi <= balanced_extraction_colouring(m, g, seed=i).num_colours


class TestMinPartitionEqualsChi:
    def test_small_graphs(self):
        # min over ALL partitions of sum(1 + mad) == chi, exactly
        from tests_util_partitions import all_partitions  # local helper
        rng = np.random.default_rng(7)
        for i in range(20):
            n = int(rng.integers(1, 7))
            edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                     if rng.random() < 0.5]
            g = SbmGraph(n, [0] * n, edges, k=1)
            best = min(partition_objective(g, parts)
                       for parts in all_partitions(list(range(n))))
            assert best == Fraction(exact_chromatic(g))

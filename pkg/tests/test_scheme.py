import math
from itertools import combinations

import numpy as np
import pytest

from pairkey.graph import Graph, degree, isolated_count
from pairkey.montecarlo import estimate_edge_prob
from pairkey.scheme import (
    PairingTable,
    SchemeParams,
    build_key_rings,
    k_adjacency_graph,
    membership_matrix,
    sample_pairing,
)


def rng(seed=12345):
    return np.random.default_rng(seed)


def make_table(n, K, gamma_sets):
    gamma = np.array([sorted(s) for s in gamma_sets])
    return PairingTable(n=n, K=K, gamma=gamma)


class TestSchemeParams:
    def test_rejects_k_geq_n(self):
        with pytest.raises(ValueError):
            SchemeParams(n=4, K=4)

    def test_rejects_tiny(self):
        with pytest.raises(ValueError):
            SchemeParams(n=1, K=1)
        with pytest.raises(ValueError):
            SchemeParams(n=5, K=0)


class TestSamplePairing:
    def test_n2_forced(self):
        for seed in range(5):
            pt = sample_pairing(SchemeParams(n=2, K=1), rng(seed))
            assert pt.partners(1) == {2}
            assert pt.partners(2) == {1}

    def test_k_equals_n_minus_1_forced(self):
        pt = sample_pairing(SchemeParams(n=4, K=3), rng())
        for i in range(1, 5):
            assert pt.partners(i) == set(range(1, 5)) - {i}

    def test_sizes_and_no_self(self):
        pt = sample_pairing(SchemeParams(n=30, K=7), rng())
        for i in range(1, 31):
            s = pt.partners(i)
            assert len(s) == 7 and i not in s

    def test_uniform_binary_choice(self):
        # n=3, K=1: node 1 picks node 2 with probability exactly 1/2
        trials = 100_000
        r = rng(7)
        hits = 0
        params = SchemeParams(n=3, K=1)
        for _ in range(trials):
            hits += 2 in sample_pairing(params, r).partners(1)
        sigma = math.sqrt(0.25 / trials)
        assert abs(hits / trials - 0.5) <= 3 * sigma

    def test_subset_uniformity_chi_square(self):
        # n=5, K=2: 6 possible partner sets for node 1, all equally likely
        trials = 30_000
        r = rng(11)
        counts = {frozenset(c): 0 for c in combinations((2, 3, 4, 5), 2)}
        params = SchemeParams(n=5, K=2)
        for _ in range(trials):
            counts[frozenset(sample_pairing(params, r).partners(1))] += 1
        expected = trials / 6
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        # 5 dof; P(chi2 > 20.5) ~ 1e-3
        assert chi2 < 20.5

    def test_membership_rate(self):
        # P(i in Gamma_j) = K/(n-1)
        n, K, trials = 12, 4, 20_000
        r = rng(3)
        params = SchemeParams(n=n, K=K)
        hits = sum(1 in sample_pairing(params, r).partners(5) for _ in range(trials))
        q = K / (n - 1)
        assert abs(hits / trials - q) <= 3 * math.sqrt(q * (1 - q) / trials)

    def test_deterministic_given_seed(self):
        a = sample_pairing(SchemeParams(n=20, K=5), rng(99))
        b = sample_pairing(SchemeParams(n=20, K=5), rng(99))
        assert np.array_equal(a.gamma, b.gamma)


class TestKeyRings:
    def test_n2_mutual(self):
        pt = make_table(2, 1, [{2}, {1}])
        rings = build_key_rings(pt)
        assert rings[0].keys == {(1, 2, 1), (2, 1, 1)}
        assert len(rings[0].keys) == 2 and len(rings[1].keys) == 2

    def test_cycle_example(self):
        pt = make_table(3, 1, [{2}, {3}, {1}])
        rings = build_key_rings(pt)
        assert all(len(r.keys) == 2 for r in rings)

    def test_ring_size_formula(self):
        pt = sample_pairing(SchemeParams(n=25, K=4), rng(5))
        rings = build_key_rings(pt)
        for i in range(1, 26):
            chosen_by = sum(pt.is_paired(j, i) for j in range(1, 26) if j != i)
            assert len(rings[i - 1].keys) == 4 + chosen_by

    def test_pair_overlap_zero_one_two(self):
        pt = sample_pairing(SchemeParams(n=10, K=3), rng(8))
        rings = build_key_rings(pt)
        for i in range(1, 11):
            for j in range(i + 1, 11):
                overlap = len(rings[i - 1].keys & rings[j - 1].keys)
                assert overlap in (0, 1, 2)
                mutual = pt.is_paired(i, j) and pt.is_paired(j, i)
                assert (overlap == 2) == mutual

    def test_overlap_matches_pairing_predicate(self):
        # ring intersection nonempty iff one side picked the other
        pt = sample_pairing(SchemeParams(n=15, K=3), rng(21))
        rings = build_key_rings(pt)
        for i in range(1, 16):
            for j in range(i + 1, 16):
                via_rings = bool(rings[i - 1].keys & rings[j - 1].keys)
                via_pairing = pt.is_paired(i, j) or pt.is_paired(j, i)
                assert via_rings == via_pairing


class TestKAdjacencyGraph:
    def test_hand_traced(self):
        pt = make_table(3, 1, [{2}, {3}, {2}])
        assert k_adjacency_graph(pt) == Graph(3, [(1, 2), (2, 3)])

    def test_complete_when_k_max(self):
        pt = sample_pairing(SchemeParams(n=6, K=5), rng())
        assert k_adjacency_graph(pt).edge_count == 15

    def test_edge_rate_matches_formula(self):
        # lambda_5(2) = 2*2/4 - (2/4)^2 = 0.75, via the pair-edge estimator
        est, se = estimate_edge_prob(n=5, K=2, p=1.0, trials=100_000, seed=17)
        assert abs(est - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / 100_000)

    def test_degree_at_least_k_no_isolated(self):
        pt = sample_pairing(SchemeParams(n=40, K=3), rng(2))
        h = k_adjacency_graph(pt)
        assert isolated_count(h) == 0
        assert all(degree(h, i) >= 3 for i in range(1, 41))

    def test_mean_degree(self):
        n, K, reps = 20, 3, 2000
        r = rng(31)
        params = SchemeParams(n=n, K=K)
        degs = []
        for _ in range(reps):
            h = k_adjacency_graph(sample_pairing(params, r))
            degs.extend(degree(h, i) for i in range(1, n + 1))
        expected = K + (n - K - 1) * K / (n - 1)
        degs = np.asarray(degs, dtype=float)
        stderr = degs.std() / math.sqrt(reps)  # nodes within a draw correlate
        assert abs(degs.mean() - expected) <= 3 * stderr

    def test_graph_matches_membership_matrix(self):
        pt = sample_pairing(SchemeParams(n=12, K=4), rng(13))
        m = membership_matrix(pt)
        h = k_adjacency_graph(pt)
        adj = m | m.T
        for i in range(1, 13):
            for j in range(i + 1, 13):
                assert h.has_edge(i, j) == bool(adj[i - 1, j - 1])


def test_pairing_table_text_format():
    pt = make_table(3, 1, [{3}, {1}, {2}])
    assert pt.to_text() == "1: 3\n2: 1\n3: 2\n"

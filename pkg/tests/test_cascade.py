import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from interdep.cascade import (
    ConfigurationSet,
    ExpectedLossVector,
    NotATreeError,
    build_utility_matrices,
    estimate_component_losses,
    expected_losses,
    sample_live_edge_graph,
    simulate_cascade_bfs,
    tree_expected_losses,
)
from interdep.graph_model import (
    CascadeModel,
    DependencyGraph,
    apply_edge_noise,
    assign_worths,
    generate_erdos_renyi,
    generate_preferential_attachment,
)
from oracles import enumerate_component_losses, path_product_losses


def path3(p=0.5, w=(1.0, 1.0, 1.0)):
    return DependencyGraph.from_edges(3, [(0, 1, p), (1, 2, p)], worths=w)


def triangle(p=0.5):
    return DependencyGraph.from_edges(3, [(0, 1, p), (0, 2, p), (1, 2, p)], worths=[1.0, 1.0, 1.0])


def random_tree(rng, n):
    edges = [(int(rng.integers(v)), v, float(rng.random())) for v in range(1, n)]
    perm = rng.permutation(n)
    edges = [(int(perm[a]), int(perm[b]), p) for a, b, p in edges]
    return DependencyGraph.from_edges(n, edges, worths=rng.random(n))


class TestLiveEdgeSampling:
    def test_all_live(self):
        g = generate_erdos_renyi(20, 1.0, seed=0).with_prob(1.0)
        labels = sample_live_edge_graph(g, np.random.default_rng(0))
        assert np.all(labels == 0)

    def test_none_live(self):
        g = generate_erdos_renyi(20, 0.5, seed=0).with_prob(0.0)
        labels = sample_live_edge_graph(g, np.random.default_rng(0))
        assert labels.tolist() == list(range(20))

    def test_path_all_connected_quarter(self):
        rng = np.random.default_rng(1)
        K = 20000
        hits = sum(len(set(sample_live_edge_graph(path3(), rng))) == 1 for _ in range(K))
        # enumerating the 4 live-edge subsets gives exactly 1/4
        assert abs(hits / K - 0.25) < 4 * np.sqrt(0.25 * 0.75 / K)

    def test_rejects_directed(self):
        g = DependencyGraph.from_edges(2, [(0, 1, 0.5)], directed=True)
        with pytest.raises(ValueError):
            sample_live_edge_graph(g, np.random.default_rng(0))

    def test_deterministic(self):
        g = generate_erdos_renyi(30, 0.2, seed=3)
        a = sample_live_edge_graph(g, np.random.default_rng(7))
        b = sample_live_edge_graph(g, np.random.default_rng(7))
        assert np.array_equal(a, b)


class TestBFS:
    def test_p0(self):
        g = generate_erdos_renyi(10, 0.5, seed=0).with_prob(0.0)
        assert simulate_cascade_bfs(g, 3, np.random.default_rng(0)) == {3}

    def test_p1_reachable(self):
        g = DependencyGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0)], directed=True)
        assert simulate_cascade_bfs(g, 0, np.random.default_rng(0)) == {0, 1, 2}
        assert simulate_cascade_bfs(g, 1, np.random.default_rng(0)) == {1, 2}

    def test_matches_component_sizes(self):
        g = generate_erdos_renyi(8, 0.4, seed=11)
        rng = np.random.default_rng(5)
        K = 10000
        start = 0
        bfs = [len(simulate_cascade_bfs(g, start, rng)) for _ in range(K)]
        comp = []
        for _ in range(K):
            labels = sample_live_edge_graph(g, rng)
            comp.append(int((labels == labels[start]).sum()))
        bfs_counts = np.bincount(bfs, minlength=9)
        comp_counts = np.bincount(comp, minlength=9)
        keep = (bfs_counts + comp_counts) > 0
        _, pval, _, _ = stats.chi2_contingency(np.vstack([bfs_counts[keep], comp_counts[keep]]))
        assert pval > 0.01


class TestEstimator:
    def test_p1_total(self):
        g = assign_worths(generate_preferential_attachment(30, 2, 1.0, seed=0).with_prob(1.0), "uniform01", seed=1)
        for K in (1, 7, 300):
            L = estimate_component_losses(g, K, master_seed=3)
            assert np.all(L.loss_def == L.loss_def[0])
            assert L.loss_def[0] == pytest.approx(g.worths.sum(), rel=1e-14)
            assert np.all(L.stderr_def == 0)

    def test_p0_intrinsic(self):
        g = assign_worths(generate_erdos_renyi(30, 0.3, seed=0).with_prob(0.0), "uniform01", seed=1)
        L = estimate_component_losses(g, 50, master_seed=3)
        assert np.array_equal(L.loss_def, g.worths)

    def test_triangle(self):
        exact = enumerate_component_losses(3, triangle().edges, [1, 1, 1])
        assert exact == pytest.approx([2.25] * 3, abs=1e-12)
        L = estimate_component_losses(triangle(), 100_000, master_seed=0)
        assert np.all(np.abs(L.loss_def - 2.25) <= 3 * L.stderr_def)

    def test_bounds(self):
        g = assign_worths(generate_erdos_renyi(40, 0.1, seed=2), "uniform01", seed=2)
        L = estimate_component_losses(g, 500, master_seed=1)
        assert np.all(L.loss_def >= g.worths - 1e-12)
        assert np.all(L.loss_def <= g.worths.sum() + 1e-12)

    def test_general_sum_columns(self):
        g = path3().with_worths([1.0, 1.0, 1.0], [2.0, 0.0, 0.0])
        L = estimate_component_losses(g, 20000, master_seed=0)
        # attacker worth sits on node 0 only: L_atk(t) = 2 Pr[0 in C(t)]
        assert L.loss_atk[0] == 2.0
        assert abs(L.loss_atk[2] - 0.5) < 4 * L.stderr_atk[2]

    def test_seed_determinism_and_workers(self):
        g = assign_worths(generate_erdos_renyi(60, 0.05, seed=2), "uniform01", seed=2)
        a = estimate_component_losses(g, 3000, master_seed=42, workers=1)
        b = estimate_component_losses(g, 3000, master_seed=42, workers=4)
        c = estimate_component_losses(g, 3000, master_seed=43)
        assert np.array_equal(a.loss_def, b.loss_def)
        assert np.array_equal(a.stderr_def, b.stderr_def)
        assert not np.array_equal(a.loss_def, c.loss_def)

    def test_blocks_replay_single_samples(self):
        g = assign_worths(generate_erdos_renyi(15, 0.2, seed=1), "uniform01", seed=1)
        K = 40
        L = estimate_component_losses(g, K, master_seed=9)
        rng = np.random.default_rng([9, 0])
        vals = []
        for _ in range(K):
            labels = sample_live_edge_graph(g, rng)
            sums = {lab: g.worths[labels == lab].sum() for lab in set(labels.tolist())}
            vals.append([sums[lab] for lab in labels.tolist()])
        assert np.allclose(L.loss_def, np.mean(vals, axis=0), rtol=0, atol=1e-12)

    def test_dense_equals_sparse_at_zero_noise(self):
        g = assign_worths(generate_erdos_renyi(25, 0.1, seed=4), "uniform01", seed=4)
        a = estimate_component_losses(CascadeModel(g), 500, master_seed=1)
        b = estimate_component_losses(apply_edge_noise(g, 0.0, 0.5), 500, master_seed=1)
        assert np.array_equal(a.loss_def, b.loss_def)

    def test_directed(self):
        # chain 0 -> 1 -> 2, p = 0.5: L(0) = 1 + .5 + .25, L(1) = 1.5, L(2) = 1
        g = DependencyGraph.from_edges(3, [(0, 1, 0.5), (1, 2, 0.5)], directed=True, worths=[1.0, 1.0, 1.0])
        L = estimate_component_losses(g, 20000, master_seed=0)
        assert L.loss_def[2] == 1.0
        assert np.all(np.abs(L.loss_def - [1.75, 1.5, 1.0]) <= 4 * L.stderr_def + 1e-12)

    def test_matches_bfs_average(self):
        g = assign_worths(generate_erdos_renyi(10, 0.3, seed=8), "uniform01", seed=8)
        K = 10000
        L = estimate_component_losses(g, K, master_seed=2)
        rng = np.random.default_rng(77)
        for t in (0, 4):
            vals = [g.worths[list(simulate_cascade_bfs(g, t, rng))].sum() for _ in range(K)]
            se = np.sqrt(np.var(vals, ddof=1) / K + L.stderr_def[t] ** 2)
            # two-sample z test at alpha = 0.01
            assert abs(np.mean(vals) - L.loss_def[t]) < 2.576 * se

    def test_monotone_in_p_with_common_streams(self):
        g = assign_worths(generate_erdos_renyi(20, 0.2, seed=5), "uniform01", seed=5)
        lo = estimate_component_losses(g, 2000, master_seed=6)
        prob = g.prob.copy()
        prob[0] = min(1.0, prob[0] + 0.3)
        hi = estimate_component_losses(DependencyGraph(g.n, g.src, g.dst, prob, False, g.worths), 2000,
                                       master_seed=6)
        # same uniforms, higher threshold on one edge: live sets only grow
        assert np.all(hi.loss_def >= lo.loss_def - 1e-12)


class TestTree:
    def test_single_node(self):
        g = DependencyGraph.from_edges(1, [], worths=[3.0])
        assert tree_expected_losses(g).loss_def.tolist() == [3.0]

    def test_path(self):
        L = tree_expected_losses(path3())
        assert L.loss_def == pytest.approx([1.75, 2.0, 1.75], abs=1e-15)

    def test_not_a_tree(self):
        with pytest.raises(NotATreeError):
            tree_expected_losses(triangle())
        with pytest.raises(NotATreeError):
            tree_expected_losses(DependencyGraph.from_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)]))
        with pytest.raises(NotATreeError):
            tree_expected_losses(DependencyGraph.from_edges(2, [(0, 1, 0.5)], directed=True))

    def test_random_trees_against_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(1, 51))
            g = random_tree(rng, n)
            L = tree_expected_losses(g)
            ref = path_product_losses(n, g.edges, g.worths)
            assert np.max(np.abs(L.loss_def - ref)) <= 1e-9

    def test_monte_carlo_consistency(self):
        rng = np.random.default_rng(1)
        inside = total = 0
        for k in range(10):
            g = random_tree(rng, 30)
            exact = tree_expected_losses(g).loss_def
            est = estimate_component_losses(g, 10000, master_seed=k)
            ok = np.abs(est.loss_def - exact) <= 4 * est.stderr_def + 1e-12
            inside += ok.sum()
            total += len(ok)
        assert inside / total >= 0.99

    def test_dispatch(self):
        t = tree_expected_losses(path3())
        assert np.array_equal(expected_losses(path3(), 10, 0).loss_def, t.loss_def)
        assert expected_losses(path3(), 10, 0, method="sample").n_samples == 10
        assert expected_losses(triangle(), 10, 0).n_samples == 10


@settings(max_examples=40)
@given(st.integers(1, 40), st.integers(0, 2**32))
def test_tree_property(n, seed):
    g = random_tree(np.random.default_rng(seed), n)
    L = tree_expected_losses(g)
    ref = path_product_losses(n, g.edges, g.worths)
    assert np.allclose(L.loss_def, ref, rtol=0, atol=1e-9)
    assert np.all(L.loss_def >= g.worths - 1e-12)


class TestUtilities:
    def test_two_config(self):
        L = ExpectedLossVector.exact([2.0, 1.0], [2.0, 1.0])
        u = build_utility_matrices(L, ConfigurationSet.two_level(2, 0.3))
        assert u.U.tolist() == [[-2.0, -1.0], [0.0, 0.0]]
        assert np.array_equal(u.V, -u.U)

    def test_partial_option(self):
        c = 0.4
        L = ExpectedLossVector.exact([2.0, 1.0], [2.0, 1.0])
        cfg = ConfigurationSet.uniform(2, [(0, 1.0), (c, 0.0), (c / 8, 0.5)])
        u = build_utility_matrices(L, cfg)
        assert u.U[2].tolist() == [-1.0, -0.5]

    def test_zero_beta(self):
        L = ExpectedLossVector.exact([2.0, 1.0], [5.0, 1.0])
        cfg = ConfigurationSet.uniform(2, [(0, 0.0), (1, 0.0)])
        u = build_utility_matrices(L, cfg, zero_sum=False)
        assert not u.U.any() and not u.V.any()
        assert not np.signbit(u.U).any()

    def test_general_sum(self):
        L = ExpectedLossVector.exact([2.0, 1.0], [5.0, 3.0])
        u = build_utility_matrices(L, ConfigurationSet.two_level(2, 0.1), zero_sum=False)
        assert u.V[0].tolist() == [5.0, 3.0]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            build_utility_matrices(ExpectedLossVector.exact([1.0], [1.0]), ConfigurationSet.two_level(2, 0.1))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ConfigurationSet([[0.0]], [[1.5]])
        with pytest.raises(ValueError):
            ConfigurationSet([[-1.0]], [[0.5]])

    def test_loss_csv_roundtrip(self):
        L = estimate_component_losses(triangle(), 100, master_seed=0)
        text = L.to_csv()
        assert text.splitlines()[0] == "target,loss_def,loss_atk,stderr"
        back = ExpectedLossVector.from_csv(text)
        assert np.array_equal(back.loss_def, L.loss_def)
        assert np.array_equal(back.stderr_def, L.stderr_def)

import copy
import math

import numpy as np
import pytest

from interdep.baselines import independence_policy
from interdep.cascade import ConfigurationSet, build_utility_matrices, expected_losses
from interdep.game import evaluate_policy, solve_multiple_lp
from interdep.scenario import derive_seed, scenario_from_dict
from interdep.sweeps import (
    AGG_FIELDS,
    DEFAULT_BASE,
    ROW_FIELDS,
    SweepRow,
    SweepSpec,
    aggregate,
    aggregate_to_csv,
    failed,
    rows_from_csv,
    rows_to_csv,
    run_config_menu_comparison,
    run_cost_sweep,
    run_density_sweep,
    run_failure_mode_comparison,
    run_mu_sweep,
    run_noise_sweep,
    run_sampling_sufficiency,
    run_sweep,
    series,
    write_sweep,
)


def small_base(n=30, **graph):
    base = copy.deepcopy(DEFAULT_BASE)
    base["graph"]["n"] = n
    base["graph"].update(graph)
    return base


def spec(kind, values, reps=3, **kw):
    kw.setdefault("base", small_base())
    kw.setdefault("samples", 500)
    return SweepSpec(kind, values, reps, timings=False, **kw)


def by_key(rows):
    return {(r.param, r.method, r.seed): r for r in rows}


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("height", [1.0])
    with pytest.raises(ValueError):
        SweepSpec("cost", [])
    with pytest.raises(ValueError):
        SweepSpec("cost", [1.0], replications=0)
    assert SweepSpec("density").fixed_cost == 0.04
    assert len(SweepSpec("cost").values) == 20


def test_runner_checks_kind():
    with pytest.raises(ValueError):
        run_cost_sweep(spec("noise", [0.0]))


class TestCost:
    rows = None

    @classmethod
    def setup_class(cls):
        cls.rows = run_cost_sweep(spec("cost", [0.0, 0.1, 1.0, 1e3]))

    def test_free_defense(self):
        for r in self.rows:
            if r.param == 0.0:
                assert r.exp_cost == 0.0 and r.exp_loss == 0.0

    def test_prohibitive_defense(self):
        # nothing defended: the attacker takes the largest expected loss
        for seed in range(3):
            sc = scenario_from_dict({**small_base(), "configurations": 0.0}, seed)
            L = expected_losses(sc.model(), 500, derive_seed(seed, "cascades"))
            row = by_key(self.rows)[(1e3, "optimal", seed)]
            assert row.exp_cost == 0.0
            assert row.exp_loss == pytest.approx(L.loss_def.max(), abs=1e-12)

    def test_accounting_identity(self):
        for r in self.rows:
            assert r.neg_utility == pytest.approx(r.exp_loss + r.exp_cost, abs=1e-6)

    def test_optimal_dominates(self):
        k = by_key(self.rows)
        for (c, m, s), r in k.items():
            assert k[(c, "optimal", s)].neg_utility <= r.neg_utility + 1e-6

    def test_canonical_order(self):
        keys = [r.sort_key() for r in self.rows]
        assert keys == sorted(keys)
        assert len(self.rows) == 4 * 3 * 3


def test_noise_zero_matches_plain_pipeline():
    sp = spec("noise", [0.0, 0.01], reps=2, noise_ps=[0.5])
    rows = by_key(run_noise_sweep(sp))
    for seed in range(2):
        doc = copy.deepcopy(sp.base)
        doc["graph"]["cascade_prob"] = 0.5
        sc = scenario_from_dict({**doc, "configurations": sp.fixed_cost}, seed)
        L = expected_losses(sc.model(), sp.samples, derive_seed(seed, "cascades"), "sample")
        u = build_utility_matrices(L, sc.configs)
        pol = solve_multiple_lp(u.U, u.V, sc.configs.cost, sc.priors).policy
        ev = evaluate_policy(pol, u.U, u.V, sc.configs.cost, sc.priors)
        row = rows[(0.0, "optimal[p=0.5]", seed)]
        assert (row.exp_loss, row.exp_cost) == (ev.expected_loss, ev.expected_cost)
        # extra cascade paths can only hurt
        assert rows[(0.01, "optimal[p=0.5]", seed)].neg_utility >= row.neg_utility - 0.05


def test_density_extremes():
    rows = run_density_sweep(spec("density", [0.25, 8.0], reps=4, base=small_base(40)))
    sparse = [r for r in rows if r.param == 0.25]
    dense = [r for r in rows if r.param == 8.0]
    # at c = 0.04 dense graphs are cheap to defend outright, so compare utility, not loss
    assert np.mean([r.neg_utility for r in dense]) > np.mean([r.neg_utility for r in sparse])
    # almost no cascades: loss bounded by a couple of worths (each <= 1)
    assert all(r.exp_loss <= 2.0 for r in sparse)


def test_mu_series_present():
    rows = run_mu_sweep(spec("mu", [0.0, 1.0], reps=1, costs=[0.1, 1.0]))
    assert {r.method for r in rows} == {"optimal[pa:mu=0]", "optimal[pa:mu=1]", "optimal[er]"}
    assert sorted({r.param for r in rows}) == [0.1, 1.0]


def test_failure_modes():
    vals = [0.05, 0.5]
    same = by_key(run_failure_mode_comparison(spec("failure", vals, reps=2, true_r=1.0)))
    for seed in range(2):
        for c in vals:
            assert same[(c, "optimal", seed)].neg_utility == pytest.approx(
                same[(c, "attack_only", seed)].neg_utility, abs=1e-9)
    rnd = by_key(run_failure_mode_comparison(spec("failure", vals, reps=2, true_r=0.0)))
    for seed in range(2):
        for c in vals:
            assert rnd[(c, "optimal", seed)].neg_utility <= rnd[(c, "attack_only", seed)].neg_utility + 1e-6


def test_config_menus_dominate():
    rows = by_key(run_config_menu_comparison(spec("configs", [0.1, 1.0], reps=2)))
    for seed in range(2):
        for c in (0.1, 1.0):
            two = rows[(c, "optimal[2cfg]", seed)].neg_utility
            half = rows[(c, "optimal[1/2-1/8]", seed)].neg_utility
            quarter = rows[(c, "optimal[3/4-1/8]", seed)].neg_utility
            assert half <= two + 1e-6
            assert quarter <= half + 1e-6


def test_zero_samples_is_independence():
    sp = spec("samples", [0, 100], reps=2, eval_samples=2000)
    rows = by_key(run_sampling_sufficiency(sp))
    for seed in range(2):
        sc = scenario_from_dict({**sp.base, "configurations": sp.fixed_cost}, seed)
        ref = expected_losses(sc.model(), sp.eval_samples, derive_seed(seed, "reference"))
        u = build_utility_matrices(ref, sc.configs)
        pol = independence_policy(sc.graph, sc.configs, sc.priors)
        ev = evaluate_policy(pol, u.U, u.V, sc.configs.cost, sc.priors)
        assert rows[(0.0, "optimal", seed)].neg_utility == pytest.approx(ev.expected_loss + ev.expected_cost,
                                                                         abs=1e-9)


def test_budget_sweep_respects_budget():
    rows = run_sweep(spec("budget", [0.0, 0.5], reps=2))
    for r in rows:
        assert r.exp_cost <= r.param + 1e-7
    assert {r.method for r in rows} == {"optimal", "independence", "degree_heuristic"}


def test_worker_count_does_not_change_output():
    sp = spec("cost", [0.05, 0.5], reps=4)
    one = rows_to_csv(run_sweep(sp))
    sp.workers = 3
    assert rows_to_csv(run_sweep(sp)) == one


def test_timings_recorded_when_enabled():
    sp = SweepSpec("cost", [0.5], 1, base=small_base(), samples=200, methods=["optimal"])
    (row,) = run_sweep(sp)
    assert row.solve_ms > 0


def test_failures_become_marker_rows():
    base = small_base()
    base["graph"]["generator"] = "nope"
    rows = run_sweep(spec("cost", [0.1], reps=2, base=base))
    assert len(failed(rows)) == 2
    assert rows[0].method == "error:ScenarioError" and math.isnan(rows[0].param)
    assert aggregate(rows) == []


def test_csv_round_trip(tmp_path):
    rows = run_sweep(spec("cost", [0.1, 1.0], reps=2))
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(ROW_FIELDS)
    assert rows_from_csv(text) == rows
    p1, p2 = write_sweep(rows, tmp_path / "out", "cost")
    assert p1.read_text() == text
    assert p2.read_text().splitlines()[0] == ",".join(AGG_FIELDS)
    j1, _ = write_sweep(rows, tmp_path / "out", "cost", fmt="json")
    assert j1.suffix == ".json"


def test_aggregate_stats():
    rows = [SweepRow(1.0, "optimal", s, float(s), 0.0, float(s)) for s in range(4)]
    (rec,) = aggregate(rows)
    assert rec["n"] == 4
    assert rec["exp_loss_mean"] == 1.5
    assert rec["exp_loss_se"] == pytest.approx(np.std([0, 1, 2, 3], ddof=1) / 2)
    assert "optimal" in aggregate_to_csv([rec])


def test_series_groups_by_seed():
    rows = run_sweep(spec("cost", [1.0, 0.1], reps=2, methods=["optimal"]))
    s = series(rows, "optimal")
    assert sorted(s) == [0, 1]
    assert [p for p, _ in s[0]] == [0.1, 1.0]

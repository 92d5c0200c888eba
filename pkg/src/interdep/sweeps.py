"""Parameter sweeps over generated scenarios, with CSV output.

Every sweep row is a pure function of (base scenario, replication seed,
swept value): graphs, worths and cascade samples come from seeds derived
from the replication seed, and rows are emitted in (param, method, seed)
order whatever the worker count.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import degree_heuristic_policy, independence_policy
from .cascade import ConfigurationSet, ExpectedLossVector, build_utility_matrices, expected_losses
from .game import GamePriors, evaluate_policy, solve_multiple_lp
from .graph_model import CascadeModel, apply_edge_noise
from .scenario import derive_seed, scenario_from_dict

KINDS = ("cost", "noise", "density", "mu", "failure", "configs", "samples", "budget")
ROW_FIELDS = ["param", "method", "seed", "exp_loss", "exp_cost", "neg_utility", "solve_ms", "sample_ms"]
AGG_FIELDS = ["param", "method", "n", "exp_loss_mean", "exp_loss_se", "exp_cost_mean", "exp_cost_se",
              "neg_utility_mean", "neg_utility_se"]

# default grids per kind, used when no values are given
DEFAULT_VALUES = {
    "cost": [0.0] + np.geomspace(0.01, 20.0, 19).round(6).tolist(),
    "noise": [0.0, 0.001, 0.005, 0.01, 0.02, 0.05],
    "density": [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0],
    "mu": [0.0, 0.5, 1.0, 1.5, 2.0],
    "failure": np.geomspace(0.01, 100.0, 13).round(6).tolist(),
    "configs": np.geomspace(0.01, 100.0, 13).round(6).tolist(),
    "samples": [0, 10, 100, 1000, 10000],
    "budget": [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
}
DEFAULT_FIXED_COST = {"density": 0.04}

DEFAULT_BASE = {
    "graph": {"generator": "pa", "n": 100, "m": 1, "mu": 1.0, "cascade_prob": 0.5},
    "worths": {"mode": "uniform01"},
    "priors": {"r": 1.0, "g": "uniform"},
    "zero_sum": True,
}


@dataclass
class SweepSpec:
    """One sweep: ``kind`` picks the swept quantity, ``values`` its grid.

    kind        values are                   secondary knobs
    cost        defense cost c               methods
    noise       epsilon                      noise_ps, fixed_cost
    density     expected ER degree           fixed_cost (default 0.04)
    mu          PA exponent mu               costs (param column = c)
    failure     defense cost c               true_r
    configs     defense cost c
    samples     sample count K (0 = none)    eval_samples, fixed_cost
    budget      total budget B               fixed_cost
    """

    kind: str
    values: list = None
    replications: int = 100
    seed: int = 0
    base: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_BASE))
    samples: int = 10_000
    loss_method: str = "auto"
    fixed_cost: float = None
    costs: list = field(default_factory=lambda: [0.05, 0.2, 0.5, 1.0])
    noise_ps: list = field(default_factory=lambda: [0.5, 0.1])
    true_r: float = 0.0
    eval_samples: int = 100_000
    methods: list = field(default_factory=lambda: ["optimal", "independence", "degree_heuristic"])
    workers: int = 1
    timings: bool = True
    prune: bool = True
    backend: str = "auto"
    base_dir: str = None  # relative paths in ``base`` resolve against this

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}; expected one of {KINDS}")
        if self.values is None:
            self.values = list(DEFAULT_VALUES[self.kind])
        if self.fixed_cost is None:
            self.fixed_cost = DEFAULT_FIXED_COST.get(self.kind, 0.1)
        if not len(self.values):
            raise ValueError("sweep needs at least one value")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        self.values = [float(v) for v in self.values]

    @property
    def seeds(self):
        return [self.seed + i for i in range(self.replications)]


@dataclass(frozen=True)
class SweepRow:
    param: float
    method: str
    seed: int
    exp_loss: float
    exp_cost: float
    neg_utility: float
    solve_ms: float = 0.0
    sample_ms: float = 0.0

    def sort_key(self):
        p = self.param
        return (math.isnan(p), p, self.method, self.seed)


class _Clock:
    def __init__(self, on):
        self.on = on

    def __call__(self, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        ms = (time.perf_counter() - t0) * 1000 if self.on else 0.0
        return out, ms


def _row(param, method, seed, ev, solve_ms=0.0, sample_ms=0.0):
    return SweepRow(float(param), method, int(seed), float(ev.expected_loss), float(ev.expected_cost),
                    float(ev.expected_loss + ev.expected_cost), solve_ms, sample_ms)


def _with_graph(base, **changes):
    doc = copy.deepcopy(base)
    doc["graph"] = {**doc["graph"], **changes}
    return doc


def _materialize(spec, doc, seed):
    if "configurations" not in doc:
        doc = {**doc, "configurations": {"two_level": 0.0}}
    return scenario_from_dict(doc, seed, spec.base_dir)


def _losses(spec, model, seed, clock, method=None, K=None):
    return clock(expected_losses, model, spec.samples if K is None else K,
                 derive_seed(seed, "cascades"), method or spec.loss_method)


def _solve(spec, utils, costs, priors, clock, **kw):
    res, ms = clock(solve_multiple_lp, utils.U, utils.V, costs, priors, prune=spec.prune,
                    backend=spec.backend, **kw)
    return res.policy, ms


def _optimal_row(spec, param, method, seed, losses, cfg, priors, clock, sample_ms, zero_sum=True):
    u = build_utility_matrices(losses, cfg, zero_sum)
    pol, ms = _solve(spec, u, cfg.cost, priors, clock)
    ev = evaluate_policy(pol, u.U, u.V, cfg.cost, priors)
    return _row(param, method, seed, ev, ms, sample_ms), ev


# --- per-replication bodies -------------------------------------------------


def _cost_rep(spec, seed, clock):
    sc = _materialize(spec, spec.base, seed)
    losses, sample_ms = _losses(spec, sc.model(), seed, clock)
    rows = []
    for c in spec.values:
        cfg = ConfigurationSet.two_level(sc.graph.n, c)
        u = build_utility_matrices(losses, cfg, sc.zero_sum)
        pol, ms = _solve(spec, u, cfg.cost, sc.priors, clock)
        opt = evaluate_policy(pol, u.U, u.V, cfg.cost, sc.priors)
        if "optimal" in spec.methods:
            rows.append(_row(c, "optimal", seed, opt, ms, sample_ms))
        if "independence" in spec.methods:
            ind, ms = clock(independence_policy, sc.graph, cfg, sc.priors, zero_sum=sc.zero_sum,
                            prune=spec.prune, backend=spec.backend)
            rows.append(_row(c, "independence", seed,
                             evaluate_policy(ind, u.U, u.V, cfg.cost, sc.priors), ms))
        if "degree_heuristic" in spec.methods:
            # same spend as the optimum, so the comparison isolates allocation
            deg, ms = clock(degree_heuristic_policy, sc.graph, cfg, opt.expected_cost)
            rows.append(_row(c, "degree_heuristic", seed,
                             evaluate_policy(deg, u.U, u.V, cfg.cost, sc.priors), ms))
    return rows


def _noise_rep(spec, seed, clock):
    rows = []
    for p in spec.noise_ps:
        doc = _with_graph(spec.base, cascade_prob=p)
        sc = _materialize(spec, doc, seed)
        cfg = ConfigurationSet.two_level(sc.graph.n, spec.fixed_cost)
        for eps in spec.values:
            model = apply_edge_noise(sc.graph, eps, p) if eps > 0 else CascadeModel(sc.graph)
            # sampled even on trees so eps = 0 matches the noisy pipeline stream for stream
            losses, sample_ms = _losses(spec, model, seed, clock, method="sample")
            row, _ = _optimal_row(spec, eps, f"optimal[p={p:g}]", seed, losses, cfg, sc.priors,
                                  clock, sample_ms, sc.zero_sum)
            rows.append(row)
    return rows


def _density_rep(spec, seed, clock):
    rows = []
    n = int(spec.base["graph"].get("n", 100))
    for deg in spec.values:
        doc = _with_graph(spec.base, generator="er", p=min(1.0, deg / max(n - 1, 1)))
        sc = _materialize(spec, doc, seed)
        cfg = ConfigurationSet.two_level(sc.graph.n, spec.fixed_cost)
        losses, sample_ms = _losses(spec, sc.model(), seed, clock)
        row, _ = _optimal_row(spec, deg, "optimal", seed, losses, cfg, sc.priors, clock, sample_ms,
                              sc.zero_sum)
        rows.append(row)
    return rows


def _mu_rep(spec, seed, clock):
    rows = []
    g = spec.base["graph"]
    n = int(g.get("n", 100))
    m = int(g.get("m", 1))
    # ER reference at PA's average degree
    er_p = min(1.0, (2 * (1 + (n - 2) * m) / n) / max(n - 1, 1))
    series = [(f"optimal[pa:mu={mu:g}]", _with_graph(spec.base, generator="pa", mu=mu)) for mu in spec.values]
    series.append(("optimal[er]", _with_graph(spec.base, generator="er", p=er_p)))
    for label, doc in series:
        sc = _materialize(spec, doc, seed)
        losses, sample_ms = _losses(spec, sc.model(), seed, clock)
        for c in spec.costs:
            cfg = ConfigurationSet.two_level(sc.graph.n, c)
            row, _ = _optimal_row(spec, c, label, seed, losses, cfg, sc.priors, clock, sample_ms,
                                  sc.zero_sum)
            rows.append(row)
    return rows


def _failure_rep(spec, seed, clock):
    sc = _materialize(spec, spec.base, seed)
    losses, sample_ms = _losses(spec, sc.model(), seed, clock)
    true = GamePriors(spec.true_r, sc.priors.g)
    attack = GamePriors(1.0, sc.priors.g)
    rows = []
    for c in spec.values:
        cfg = ConfigurationSet.two_level(sc.graph.n, c)
        u = build_utility_matrices(losses, cfg, sc.zero_sum)
        for label, pri in (("optimal", true), ("attack_only", attack)):
            pol, ms = _solve(spec, u, cfg.cost, pri, clock)
            rows.append(_row(c, label, seed, evaluate_policy(pol, u.U, u.V, cfg.cost, true), ms, sample_ms))
    return rows


CONFIG_MENUS = {
    "optimal[2cfg]": [],
    "optimal[1/2-1/8]": [(1 / 8, 0.5)],
    "optimal[3/4-1/8]": [(1 / 8, 0.25)],
}


def _configs_rep(spec, seed, clock):
    sc = _materialize(spec, spec.base, seed)
    losses, sample_ms = _losses(spec, sc.model(), seed, clock)
    rows = []
    for c in spec.values:
        for label, extra in CONFIG_MENUS.items():
            opts = [(0.0, 1.0), (c, 0.0)] + [(frac * c, beta) for frac, beta in extra]
            cfg = ConfigurationSet.uniform(sc.graph.n, opts)
            row, _ = _optimal_row(spec, c, label, seed, losses, cfg, sc.priors, clock, sample_ms,
                                  sc.zero_sum)
            rows.append(row)
    return rows


def _samples_rep(spec, seed, clock):
    sc = _materialize(spec, spec.base, seed)
    model = sc.model()
    cfg = ConfigurationSet.two_level(sc.graph.n, spec.fixed_cost)
    ref, _ = clock(expected_losses, model, spec.eval_samples, derive_seed(seed, "reference"), "auto")
    ref_u = build_utility_matrices(ref, cfg, sc.zero_sum)
    rows = []
    for K in spec.values:
        K = int(K)
        if K == 0:
            losses, sample_ms = ExpectedLossVector.intrinsic(sc.graph), 0.0
        else:
            losses, sample_ms = _losses(spec, model, seed, clock, method="sample", K=K)
        u = build_utility_matrices(losses, cfg, sc.zero_sum)
        pol, ms = _solve(spec, u, cfg.cost, sc.priors, clock)
        ev = evaluate_policy(pol, ref_u.U, ref_u.V, cfg.cost, sc.priors)
        rows.append(_row(K, "optimal", seed, ev, ms, sample_ms))
    return rows


def _budget_rep(spec, seed, clock):
    sc = _materialize(spec, spec.base, seed)
    losses, sample_ms = _losses(spec, sc.model(), seed, clock)
    cfg = ConfigurationSet.two_level(sc.graph.n, spec.fixed_cost)
    u = build_utility_matrices(losses, cfg, sc.zero_sum)
    rows = []
    for B in spec.values:
        pol, ms = _solve(spec, u, cfg.cost, sc.priors, clock, budget=B)
        rows.append(_row(B, "optimal", seed, evaluate_policy(pol, u.U, u.V, cfg.cost, sc.priors), ms, sample_ms))
        ind, ms = clock(independence_policy, sc.graph, cfg, sc.priors, budget=B, zero_sum=sc.zero_sum,
                        prune=spec.prune)
        rows.append(_row(B, "independence", seed, evaluate_policy(ind, u.U, u.V, cfg.cost, sc.priors), ms))
        deg, ms = clock(degree_heuristic_policy, sc.graph, cfg, B)
        rows.append(_row(B, "degree_heuristic", seed, evaluate_policy(deg, u.U, u.V, cfg.cost, sc.priors), ms))
    return rows


_BODIES = {
    "cost": _cost_rep,
    "noise": _noise_rep,
    "density": _density_rep,
    "mu": _mu_rep,
    "failure": _failure_rep,
    "configs": _configs_rep,
    "samples": _samples_rep,
    "budget": _budget_rep,
}


def _failure_marker(seed, exc):
    nan = float("nan")
    return SweepRow(nan, f"error:{type(exc).__name__}", int(seed), nan, nan, nan)


def run_sweep(spec):
    """Run every replication; failed replications leave an ``error:*`` marker row."""
    body = _BODIES[spec.kind]
    clock = _Clock(spec.timings)

    def one(seed):
        try:
            return body(spec, seed, clock)
        except Exception as exc:  # noqa: BLE001 - surfaced as a marker row
            return [_failure_marker(seed, exc)]

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(one, spec.seeds))
    else:
        chunks = [one(s) for s in spec.seeds]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=SweepRow.sort_key)


def run_cost_sweep(spec):
    return run_sweep(_as_kind(spec, "cost"))


def run_noise_sweep(spec):
    return run_sweep(_as_kind(spec, "noise"))


def run_density_sweep(spec):
    return run_sweep(_as_kind(spec, "density"))


def run_mu_sweep(spec):
    return run_sweep(_as_kind(spec, "mu"))


def run_failure_mode_comparison(spec):
    return run_sweep(_as_kind(spec, "failure"))


def run_config_menu_comparison(spec):
    return run_sweep(_as_kind(spec, "configs"))


def run_sampling_sufficiency(spec):
    return run_sweep(_as_kind(spec, "samples"))


def run_budget_sweep(spec):
    return run_sweep(_as_kind(spec, "budget"))


def _as_kind(spec, kind):
    if spec.kind != kind:
        raise ValueError(f"expected a {kind!r} sweep spec, got {spec.kind!r}")
    return spec


def failed(rows):
    return [r for r in rows if r.method.startswith("error:")]


# --- output -----------------------------------------------------------------


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, f)) for f in ROW_FIELDS])
    return buf.getvalue()


def rows_from_csv(text):
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        out.append(SweepRow(float(d["param"]), d["method"], int(d["seed"]), float(d["exp_loss"]),
                            float(d["exp_cost"]), float(d["neg_utility"]), float(d["solve_ms"]),
                            float(d["sample_ms"])))
    return out


def aggregate(rows):
    """Mean and standard error per (param, method) over replications."""
    groups = {}
    for r in rows:
        if r.method.startswith("error:"):
            continue
        groups.setdefault((r.param, r.method), []).append(r)
    out = []
    for (param, method), rs in sorted(groups.items()):
        rec = {"param": param, "method": method, "n": len(rs)}
        for f in ("exp_loss", "exp_cost", "neg_utility"):
            v = np.array([getattr(r, f) for r in rs])
            rec[f + "_mean"] = float(v.mean())
            rec[f + "_se"] = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
        out.append(rec)
    return out


def aggregate_to_csv(agg):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGG_FIELDS)
    for rec in agg:
        w.writerow([_fmt(rec[f]) for f in AGG_FIELDS])
    return buf.getvalue()


def write_sweep(rows, out_dir, name, fmt="csv"):
    """Write per-replication rows and the aggregate; returns the paths written."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agg = aggregate(rows)
    if fmt == "json":
        p1, p2 = out / f"{name}.json", out / f"{name}_agg.json"
        p1.write_text(json.dumps([asdict(r) for r in rows], indent=1) + "\n")
        p2.write_text(json.dumps(agg, indent=1) + "\n")
    else:
        p1, p2 = out / f"{name}.csv", out / f"{name}_agg.csv"
        p1.write_text(rows_to_csv(rows))
        p2.write_text(aggregate_to_csv(agg))
    return p1, p2


def series(rows, method):
    """``{seed: [(param, row), ...]}`` for one method, params ascending."""
    out = {}
    for r in rows:
        if r.method == method:
            out.setdefault(r.seed, []).append((r.param, r))
    for v in out.values():
        v.sort(key=lambda pr: pr[0])
    return out

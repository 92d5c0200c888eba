"""Scenario documents: a graph plus worths, configurations, priors and budget.

A scenario is a JSON object; see README.md for the schema. Randomized parts
(generated graphs, uniform worths) are drawn from seeds derived from one
replication seed, so a scenario plus a seed fixes everything.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cascade import ConfigurationSet
from .game import GamePriors
from .graph_model import (
    CascadeModel,
    DependencyGraph,
    apply_edge_noise,
    assign_worths,
    generate_erdos_renyi,
    generate_preferential_attachment,
    load_edge_list,
    load_worths,
)


class ScenarioError(ValueError):
    pass


def derive_seed(seed, tag):
    """Independent 63-bit seed for one named purpose within a replication."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(tag.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True, eq=False)
class Scenario:
    graph: DependencyGraph
    configs: ConfigurationSet
    priors: GamePriors
    budget: float = None
    budget_mode: str = "total"
    zero_sum: bool = True
    noise: tuple = None  # (epsilon, base_p)

    def __post_init__(self):
        n = self.graph.n
        if self.configs.n_targets != n:
            raise ScenarioError(f"configurations cover {self.configs.n_targets} targets, graph has {n}")
        if len(self.priors.g) != n:
            raise ScenarioError(f"g has {len(self.priors.g)} entries, graph has {n}")
        if self.budget is not None and not self.budget >= 0:
            raise ScenarioError(f"budget must be >= 0, got {self.budget}")
        if self.budget_mode not in ("total", "per_target"):
            raise ScenarioError(f"unknown budget mode {self.budget_mode!r}")

    def model(self):
        if self.noise is None:
            return CascadeModel(self.graph)
        eps, base_p = self.noise
        return apply_edge_noise(self.graph, eps, base_p)

    def to_dict(self):
        g = self.graph
        d = {
            "graph": {"n": g.n, "directed": g.directed, "edges": [list(e) for e in g.edges]},
            "worths": {"mode": "explicit", "values": g.worths.tolist()},
            "configurations": {"cost": self.configs.cost.tolist(), "beta": self.configs.beta.tolist()},
            "priors": {"r": self.priors.r, "g": self.priors.g.tolist()},
            "budget": None if self.budget is None else {"value": self.budget, "mode": self.budget_mode},
            "zero_sum": self.zero_sum,
        }
        if not np.array_equal(g.worths, g.attacker_worths):
            d["worths"]["attacker_values"] = g.attacker_worths.tolist()
        if self.noise is not None:
            d["noise"] = {"epsilon": self.noise[0], "base_p": self.noise[1]}
        return d


def _resolve(path, base_dir):
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    return p


def build_graph(spec, seed=0, base_dir=None):
    """Graph from a path, an inline edge list, or a generator spec."""
    if isinstance(spec, str):
        spec = {"path": spec}
    if not isinstance(spec, dict):
        raise ScenarioError("'graph' must be a path or an object")
    cascade_prob = spec.get("cascade_prob")
    if "path" in spec:
        g = load_edge_list(_resolve(spec["path"], base_dir))
    elif "edges" in spec:
        try:
            g = DependencyGraph.from_edges(int(spec["n"]), [tuple(e) for e in spec["edges"]],
                                           directed=bool(spec.get("directed", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad inline graph: {exc}") from exc
    elif "generator" in spec:
        kind = spec["generator"]
        gseed = spec.get("seed", derive_seed(seed, "graph"))
        p = 0.5 if cascade_prob is None else cascade_prob
        try:
            if kind == "er":
                g = generate_erdos_renyi(int(spec["n"]), float(spec["p"]), gseed, p,
                                         bool(spec.get("directed", False)))
            elif kind == "pa":
                g = generate_preferential_attachment(int(spec["n"]), int(spec.get("m", 1)),
                                                     float(spec.get("mu", 1.0)), gseed, p)
            else:
                raise ScenarioError(f"unknown generator {kind!r}")
        except KeyError as exc:
            raise ScenarioError(f"generator {kind!r} needs {exc}") from None
        cascade_prob = None
    else:
        raise ScenarioError("graph needs 'path', 'edges' or 'generator'")
    if cascade_prob is not None:
        g = g.with_prob(cascade_prob)
    return g


def apply_worths(graph, spec, seed=0, base_dir=None):
    if spec is None:
        spec = {"mode": "uniform01"}
    if isinstance(spec, str):
        spec = {"path": spec}
    if "path" in spec:
        w, a = load_worths(_resolve(spec["path"], base_dir), graph.n)
        return graph.with_worths(w, a)
    mode = spec.get("mode", "uniform01")
    if mode == "file":
        return graph
    wseed = spec.get("seed", derive_seed(seed, "worths"))
    try:
        return assign_worths(graph, mode, seed=wseed, value=spec.get("value"),
                             values=spec.get("values"), attacker_values=spec.get("attacker_values"))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def build_configs(spec, n):
    if spec is None:
        raise ScenarioError("scenario needs 'configurations'")
    if isinstance(spec, (int, float)):
        spec = {"two_level": spec}
    if "two_level" in spec:
        return ConfigurationSet.two_level(n, float(spec["two_level"]))
    if "options" in spec:
        opts = [(o["cost"], o["beta"]) for o in spec["options"]]
        return ConfigurationSet.uniform(n, opts)
    if "cost" in spec and "beta" in spec:
        cs = ConfigurationSet(spec["cost"], spec["beta"])
        if cs.n_targets != n:
            raise ScenarioError(f"configuration matrices must have {n} columns")
        return cs
    raise ScenarioError("configurations need 'two_level', 'options' or 'cost'+'beta'")


def build_priors(spec, n):
    spec = spec or {}
    r = float(spec.get("r", 1.0))
    g = spec.get("g", "uniform")
    g = np.full(n, 1.0 / n) if g == "uniform" else np.asarray(g, dtype=float)
    try:
        return GamePriors(r, g)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def scenario_from_dict(doc, seed=0, base_dir=None):
    """Materialize a scenario document for one replication seed."""
    if not isinstance(doc, dict) or "graph" not in doc:
        raise ScenarioError("scenario must be an object with a 'graph' key")
    try:
        g = build_graph(doc["graph"], seed, base_dir)
        g = apply_worths(g, doc.get("worths"), seed, base_dir)
    except ScenarioError:
        raise
    except (ValueError, OSError) as exc:
        raise ScenarioError(str(exc)) from exc
    budget, mode = doc.get("budget"), "total"
    if isinstance(budget, dict):
        budget, mode = budget.get("value"), budget.get("mode", "total")
    noise = doc.get("noise")
    if noise is not None:
        noise = (float(noise["epsilon"]), float(noise.get("base_p", 0.5)))
    try:
        configs = build_configs(doc.get("configurations"), g.n)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad configurations: {exc}") from exc
    return Scenario(g, configs, build_priors(doc.get("priors"), g.n),
                    None if budget is None else float(budget), mode,
                    bool(doc.get("zero_sum", True)), noise)


def load_scenario(path, seed=0):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return scenario_from_dict(doc, seed, base_dir=path.parent)

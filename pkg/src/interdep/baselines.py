"""Comparison policies: independence assumption, degree heuristic, and a
worst-case family for the independence assumption."""
from __future__ import annotations

import numpy as np

from .cascade import ConfigurationSet, ExpectedLossVector, build_utility_matrices
from .game import DefensePolicy, GamePriors, solve_multiple_lp
from .graph_model import DependencyGraph
from .scenario import Scenario


def independence_policy(graph, configs, priors, budget=None, budget_mode="total",
                        zero_sum=True, **solve_kw):
    """Optimal policy when every target is valued at its intrinsic worth only.

    Evaluate the result against the cascade utilities to see what it is
    really worth.
    """
    utils = build_utility_matrices(ExpectedLossVector.intrinsic(graph), configs, zero_sum)
    res = solve_multiple_lp(utils.U, utils.V, configs.cost, priors, budget, budget_mode, **solve_kw)
    return res.policy


def protective_options(configs):
    """Per target: ``(null option, most protective option)``.

    Null is the cheapest option (ties: larger beta, then lower index); most
    protective minimizes beta (ties: lower cost, then lower index).
    """
    cost, beta = configs.cost, configs.beta
    m, n = cost.shape
    null = np.empty(n, dtype=int)
    best = np.empty(n, dtype=int)
    for t in range(n):
        null[t] = min(range(m), key=lambda o: (cost[o, t], -beta[o, t], o))
        best[t] = min(range(m), key=lambda o: (beta[o, t], cost[o, t], o))
    return null, best


def degree_heuristic_policy(graph, configs, budget):
    """Defend targets in decreasing degree order while the budget lasts.

    A target whose full defense no longer fits is skipped and later targets
    are still tried. Degree ties go to the lower index.
    """
    null, best = protective_options(configs)
    choice = null.copy()
    remaining = float(budget)
    order = sorted(range(graph.n), key=lambda t: (-graph.degree[t], t))
    for t in order:
        extra = configs.cost[best[t], t] - configs.cost[null[t], t]
        if extra <= remaining + 1e-12:
            choice[t] = best[t]
            remaining -= extra
    return DefensePolicy.pure(choice, configs.n_options)


def star_gap_family(n, hub_worth=0.01):
    """Star on which the independence policy is about n times worse than optimal.

    Hub 0 is nearly worthless and the n-1 leaves have worth 1, with certain
    cascades along every edge, so any entry takes down the whole star.
    Defense costs ``1/n`` per target: defending everything costs 1 in total,
    while the independence view protects only the leaves and leaves the hub
    open to an attack that destroys about n-1 worth.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    g = DependencyGraph.from_edges(n, [(0, t, 1.0) for t in range(1, n)])
    worths = np.ones(n)
    worths[0] = hub_worth
    g = g.with_worths(worths)
    return Scenario(g, ConfigurationSet.two_level(n, 1.0 / n), GamePriors.uniform(n, 1.0))

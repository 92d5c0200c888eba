"""Stackelberg defense: one LP per candidate attacked target, keep the best.

Variables are ``q[o, t]``, the probability option o is deployed at target t.
The LP for attacked target ``t_hat`` maximizes

    r * sum_o U[o, t_hat] q[o, t_hat]
      + (1 - r) * sum_{t, o} g[t] U[o, t] q[o, t]
      - sum_{t, o} cost[o, t] q[o, t]

over row-stochastic q, subject to t_hat being an attacker best response.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .parametric import EnvelopeSolver

FEAS_TOL = 1e-7
# objectives closer than this count as ties between LPs
TIE_TOL = 1e-9
_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


class SolverError(RuntimeError):
    """The LP backend failed numerically (distinct from infeasibility)."""


class InfeasibleGameError(RuntimeError):
    """No candidate LP is feasible, e.g. a budget below every defense profile."""


@dataclass(frozen=True)
class GamePriors:
    """Attack prior ``r`` and random-failure distribution ``g`` (sums to 1)."""

    r: float
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0, 1]")
        if g.ndim != 1 or len(g) == 0:
            raise ValueError("g must be a nonempty vector")
        if g.min() < 0 or abs(g.sum() - 1) > 1e-9:
            raise ValueError("g must be a probability distribution")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "g", g)

    @classmethod
    def uniform(cls, n, r=1.0):
        return cls(r, np.full(n, 1.0 / n))


@dataclass(frozen=True, eq=False)
class DefensePolicy:
    q: np.ndarray

    @property
    def shape(self):
        return self.q.shape

    def check(self, tol=FEAS_TOL):
        q = self.q
        if q.min() < -tol or q.max() > 1 + tol:
            raise ValueError("policy entries outside [0, 1]")
        if np.abs(q.sum(axis=0) - 1).max() > tol:
            raise ValueError("policy columns must sum to 1")

    def expected_cost(self, costs):
        return float((np.asarray(costs) * self.q).sum())

    @classmethod
    def pure(cls, choice, n_options):
        """Deterministic policy: target t uses option ``choice[t]``."""
        choice = np.asarray(choice)
        q = np.zeros((n_options, len(choice)))
        q[choice, np.arange(len(choice))] = 1.0
        return cls(q)


@dataclass(frozen=True)
class LPStatus:
    target: int
    status: str  # optimal | infeasible | pruned | skipped
    value: float = None

    def to_dict(self):
        d = {"target": self.target, "status": self.status}
        if self.value is not None:
            d["value"] = self.value
        return d


@dataclass(frozen=True, eq=False)
class LPOutcome:
    status: str
    policy: DefensePolicy = None
    objective: float = None

    @property
    def feasible(self):
        return self.status == "optimal"


@dataclass(frozen=True, eq=False)
class SolveResult:
    policy: DefensePolicy
    objective: float
    attacked_target: int
    per_lp_status: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "objective": self.objective,
            "attacked_target": self.attacked_target,
            "policy": self.policy.q.tolist(),
            "per_lp_status": [s.to_dict() for s in self.per_lp_status],
            "wall_time": self.wall_time,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class PolicyEvaluation:
    defender_utility: float
    attacker_target: int
    expected_loss: float
    expected_cost: float

    def __iter__(self):
        # unpacks as (utility, target)
        return iter((self.defender_utility, self.attacker_target))


def _objective_coef(U, costs, priors, t_hat):
    coef = (1 - priors.r) * priors.g[None, :] * U - costs
    if t_hat is not None:
        coef[:, t_hat] += priors.r * U[:, t_hat]
    return coef


def _check_dims(U, V, costs, priors):
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if U.ndim != 2 or U.shape != V.shape or U.shape != costs.shape:
        raise ValueError(f"U {U.shape}, V {V.shape} and costs {costs.shape} must match")
    if len(priors.g) != U.shape[1]:
        raise ValueError(f"g has {len(priors.g)} entries for {U.shape[1]} targets")
    return U, V, costs


def _budget_rows(costs, budget, budget_mode):
    m, n = costs.shape
    if budget_mode == "total":
        return sp.csr_matrix(costs.reshape(1, -1)), np.array([float(budget)])
    if budget_mode == "per_target":
        rows = np.tile(np.arange(n), m)
        return (sp.csr_matrix((costs.ravel(), (rows, np.arange(m * n))), shape=(n, m * n)),
                np.full(n, float(budget)))
    raise ValueError(f"unknown budget mode {budget_mode!r}")


def _pick_backend(backend, budget):
    if backend == "auto":
        return "highs" if budget is not None else "envelope"
    if backend not in ("highs", "envelope"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "envelope" and budget is not None:
        raise ValueError("the envelope backend does not handle budgets")
    return backend


def _unconstrained(U, costs, priors):
    coef = _objective_coef(U, costs, priors, None)
    q = DefensePolicy.pure(np.argmax(coef, axis=0), U.shape[0]).q
    return LPOutcome("optimal", DefensePolicy(q), float((coef * q).sum()))


def _envelope_outcome(env, t_hat):
    got = env.value(t_hat)
    if got is None:
        return LPOutcome("infeasible")
    q = env.policy(t_hat, got[1])
    coef = _objective_coef(env.U, env.costs, env.priors, t_hat)
    return LPOutcome("optimal", DefensePolicy(q), float((coef * q).sum()))


def solve_fixed_target_lp(U, V, costs, priors, t_hat, budget=None, budget_mode="total",
                          backend="auto"):
    """Best policy under which ``t_hat`` is an attacker best response.

    ``t_hat=None`` drops the attacker constraints entirely. Returns an
    :class:`LPOutcome` with status ``optimal`` or ``infeasible``; numerical
    trouble raises :class:`SolverError`.

    ``backend="highs"`` solves the LP with HiGHS, using an auxiliary variable
    ``a`` for the attacker value: ``V_t . q_t <= a`` for every t, with
    equality at ``t_hat``. ``"envelope"`` solves the same LP exactly by a
    one-dimensional search over ``a`` (no budget only). ``"auto"`` picks the
    envelope when there is no budget.
    """
    U, V, costs = _check_dims(U, V, costs, priors)
    if _pick_backend(backend, budget) == "envelope":
        if t_hat is None:
            return _unconstrained(U, costs, priors)
        return _envelope_outcome(EnvelopeSolver(U, V, costs, priors), t_hat)
    m, n = U.shape
    N = m * n
    coef = _objective_coef(U, costs, priors, t_hat)
    idx = np.arange(N).reshape(m, n)

    with_aux = t_hat is not None
    nvar = N + 1 if with_aux else N
    c = np.zeros(nvar)
    c[:N] = -coef.ravel()

    eq = sp.csr_matrix((np.ones(N), (np.tile(np.arange(n), m), idx.ravel())), shape=(n, nvar))
    b_eq = np.ones(n)
    a_ub, b_ub = [], []
    if with_aux:
        rows = np.repeat(np.arange(n), m + 1)
        cols = np.column_stack([idx.T, np.full(n, N)]).ravel()
        vals = np.column_stack([V.T, -np.ones(n)]).ravel()
        att = sp.csr_matrix((vals, (rows, cols)), shape=(n, nvar))
        others = np.delete(np.arange(n), t_hat)
        a_ub.append(att[others])
        b_ub.append(np.zeros(n - 1))
        eq = sp.vstack([eq, att[[t_hat]]])
        b_eq = np.append(b_eq, 0.0)
    if budget is not None:
        A, b = _budget_rows(costs, budget, budget_mode)
        if with_aux:
            A = sp.hstack([A, sp.csr_matrix((A.shape[0], 1))])
        a_ub.append(A)
        b_ub.append(b)
    bounds = np.array([(0.0, 1.0)] * N + ([(None, None)] if with_aux else []), dtype=object)

    res = linprog(
        c,
        A_ub=sp.vstack(a_ub).tocsr() if a_ub else None,
        b_ub=np.concatenate(b_ub) if b_ub else None,
        A_eq=eq.tocsr(),
        b_eq=b_eq,
        bounds=bounds.tolist(),
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if res.status == 2:
        return LPOutcome("infeasible")
    if res.status != 0:
        raise SolverError(f"LP for target {t_hat}: {res.message}")
    q = np.clip(res.x[:N].reshape(m, n), 0.0, 1.0)
    objective = float((coef * q).sum())
    return LPOutcome("optimal", DefensePolicy(q), objective)


def relaxation_bounds(U, costs, priors):
    """Upper bound on each fixed-target LP: drop the attacker constraints.

    Without them every target picks its best option independently.
    """
    U = np.asarray(U, dtype=float)
    costs = np.asarray(costs, dtype=float)
    base = (1 - priors.r) * priors.g[None, :] * U - costs
    best_base = base.max(axis=0)
    best_hat = (base + priors.r * U).max(axis=0)
    return best_base.sum() - best_base + best_hat


def solve_multiple_lp(U, V, costs, priors, budget=None, budget_mode="total",
                      short_circuit=True, prune=False, backend="auto"):
    """Solve every fixed-target LP and keep the best feasible one.

    Ties (within ``TIE_TOL``) go to the lowest target index. With ``r == 0``
    and ``short_circuit`` a single unconstrained LP is solved instead. With
    ``prune`` LPs whose relaxation bound cannot beat the incumbent are
    skipped; the answer is unchanged. ``backend`` is as for
    :func:`solve_fixed_target_lp`; with the envelope every LP value costs one
    vectorized pass, so pruning is never applied.
    """
    t0 = time.perf_counter()
    U, V, costs = _check_dims(U, V, costs, priors)
    n = U.shape[1]
    backend = _pick_backend(backend, budget)

    if priors.r == 0 and short_circuit:
        out = solve_fixed_target_lp(U, V, costs, priors, None, budget, budget_mode, backend)
        if not out.feasible:
            raise InfeasibleGameError("budget admits no policy")
        ev = evaluate_policy(out.policy, U, V, costs, priors)
        statuses = [LPStatus(t, "skipped") for t in range(n)]
        return SolveResult(out.policy, out.objective, ev.attacker_target, statuses,
                           time.perf_counter() - t0)

    if backend == "envelope":
        return _solve_all_envelope(U, V, costs, priors, t0)

    statuses = [None] * n
    top = -np.inf
    contenders = {}  # target -> outcome, only those within TIE_TOL of top
    if prune:
        bound = relaxation_bounds(U, costs, priors)
        order = sorted(range(n), key=lambda t: (-bound[t], t))
    else:
        bound = None
        order = range(n)
    for t in order:
        if bound is not None and bound[t] < top - TIE_TOL:
            statuses[t] = LPStatus(t, "pruned", float(bound[t]))
            continue
        out = solve_fixed_target_lp(U, V, costs, priors, t, budget, budget_mode, backend)
        if not out.feasible:
            statuses[t] = LPStatus(t, "infeasible")
            continue
        statuses[t] = LPStatus(t, "optimal", out.objective)
        if out.objective >= top - TIE_TOL:
            top = max(top, out.objective)
            contenders[t] = out
            contenders = {k: o for k, o in contenders.items() if o.objective >= top - TIE_TOL}
    if not contenders:
        raise InfeasibleGameError("every fixed-target LP is infeasible")
    winner = min(contenders)
    out = contenders[winner]
    return SolveResult(out.policy, out.objective, winner, statuses, time.perf_counter() - t0)


def _solve_all_envelope(U, V, costs, priors, t0):
    env = EnvelopeSolver(U, V, costs, priors)
    n = U.shape[1]
    statuses = []
    for t in range(n):
        got = env.value(t)
        statuses.append(LPStatus(t, "infeasible") if got is None else LPStatus(t, "optimal", got[0]))
    vals = np.array([s.value if s.value is not None else -np.inf for s in statuses])
    if not np.isfinite(vals).any():
        raise InfeasibleGameError("every fixed-target LP is infeasible")
    top = vals.max()
    winner = int(np.flatnonzero(vals >= top - TIE_TOL)[0])
    out = _envelope_outcome(env, winner)
    # report the re-evaluated objective for the winner
    statuses[winner] = LPStatus(winner, "optimal", out.objective)
    return SolveResult(out.policy, out.objective, winner, statuses, time.perf_counter() - t0)


def attacker_values(policy, V):
    return (np.asarray(V) * policy.q).sum(axis=0)


def evaluate_policy(policy, U, V, costs, priors, tol=FEAS_TOL):
    """Defender utility when the attacker best-responds to ``policy``.

    Attacker ties (within ``tol``) are broken for the defender, then by
    lowest index.
    """
    U, V, costs = _check_dims(U, V, costs, priors)
    q = policy.q
    att = (V * q).sum(axis=0)
    dfn = (U * q).sum(axis=0)
    cand = np.flatnonzero(att >= att.max() - tol)
    target = int(cand[np.argmax(dfn[cand])])
    loss = -float(priors.r * dfn[target] + (1 - priors.r) * (priors.g @ dfn)) + 0.0
    cost = float((costs * q).sum())
    return PolicyEvaluation(-loss - cost, target, loss, cost)

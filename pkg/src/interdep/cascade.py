"""Expected cascade losses and the per-configuration utility matrices.

A successful entry at target t affects exactly t's connected component in a
random live-edge graph (each edge kept with its cascade probability). Losses
are computed exactly on trees and by Monte Carlo otherwise.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .graph_model import as_model

# random draws per block; keeps a (block, edges) coin matrix under ~16 MB
_BLOCK_DRAWS = 2_000_000
_MAX_BLOCK = 4096


class NotATreeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConfigurationSet:
    """Security options per target: ``cost[o, t]`` and penetration ``beta[o, t]``.

    ``beta`` is the probability a direct attack on t under option o gets in
    and starts the cascade; 1 is undefended, 0 fully protective.
    """

    cost: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        cost = np.atleast_2d(np.asarray(self.cost, dtype=float))
        beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        if cost.shape != beta.shape:
            raise ValueError("cost and beta must have the same shape")
        if cost.shape[0] < 1:
            raise ValueError("every target needs at least one option")
        if np.any(~np.isfinite(cost)) or cost.min() < 0:
            raise ValueError("costs must be finite and nonnegative")
        if np.any(~np.isfinite(beta)) or beta.min() < 0 or beta.max() > 1:
            raise ValueError("penetration probabilities must lie in [0, 1]")
        cost.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def uniform(cls, n, options):
        """Same menu at every target; ``options`` is a list of ``(cost, beta)``."""
        opts = np.asarray(options, dtype=float).reshape(-1, 2)
        return cls(np.repeat(opts[:, :1], n, axis=1), np.repeat(opts[:, 1:], n, axis=1))

    @classmethod
    def two_level(cls, n, c):
        """Free and useless, or cost ``c`` and impenetrable."""
        return cls.uniform(n, [(0.0, 1.0), (c, 0.0)])

    @property
    def n_options(self):
        return self.cost.shape[0]

    @property
    def n_targets(self):
        return self.cost.shape[1]


@dataclass(frozen=True, eq=False)
class ExpectedLossVector:
    """Expected worth of each target's live-edge component, per player."""

    loss_def: np.ndarray
    loss_atk: np.ndarray
    stderr_def: np.ndarray
    stderr_atk: np.ndarray
    n_samples: int = 0  # 0 means exact

    @classmethod
    def exact(cls, loss_def, loss_atk):
        loss_def = np.asarray(loss_def, dtype=float)
        loss_atk = np.asarray(loss_atk, dtype=float)
        z = np.zeros_like(loss_def)
        return cls(loss_def, loss_atk, z, z.copy(), 0)

    @classmethod
    def intrinsic(cls, graph):
        """Losses ignoring every dependency: L(t) = w_t."""
        return cls.exact(graph.worths.copy(), graph.attacker_worths.copy())

    @property
    def n(self):
        return len(self.loss_def)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target", "loss_def", "loss_atk", "stderr"])
        for t in range(self.n):
            w.writerow([t, repr(float(self.loss_def[t])), repr(float(self.loss_atk[t])),
                        repr(float(self.stderr_def[t]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        rows.sort(key=lambda r: int(r["target"]))
        ld = np.array([float(r["loss_def"]) for r in rows])
        la = np.array([float(r["loss_atk"]) for r in rows])
        se = np.array([float(r["stderr"]) for r in rows])
        return cls(ld, la, se, se.copy(), 0)


@dataclass(frozen=True, eq=False)
class UtilityMatrices:
    """Defender ``U[o, t]`` and attacker ``V[o, t]`` when t is attacked under o."""

    U: np.ndarray
    V: np.ndarray

    @property
    def shape(self):
        return self.U.shape


class UnionFind:
    """Disjoint sets over ``0..n-1`` with union by size and path halving."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return True

    def labels(self):
        """Component label per element: the smallest element of its set."""
        n = len(self.parent)
        roots = [self.find(x) for x in range(n)]
        first = {}
        for x, r in enumerate(roots):
            first.setdefault(r, x)
        return np.array([first[r] for r in roots], dtype=np.int64)


def sample_live_edge_graph(model, rng):
    """Keep each edge independently with its probability; label components.

    Returns an array mapping each target to the smallest target in its
    live-edge component.
    """
    model = as_model(model)
    if model.directed:
        raise ValueError("live-edge components need an undirected model; "
                         "use simulate_cascade_bfs for directed graphs")
    s, d, p = model.edge_arrays
    live = rng.random(len(s)) < p
    uf = UnionFind(model.n)
    for a, b in zip(s[live].tolist(), d[live].tolist()):
        uf.union(a, b)
    return uf.labels()


def simulate_cascade_bfs(model, start, rng):
    """Breadth-first independent cascade from ``start``; returns the affected set.

    Each edge is tried at most once, when its tail is first processed and
    its head is not yet affected.
    """
    model = as_model(model)
    adj = model.neighbors
    affected = {int(start)}
    queue = deque([int(start)])
    while queue:
        u = queue.popleft()
        for v, p in adj[u]:
            if v not in affected and rng.random() < p:
                affected.add(v)
                queue.append(v)
    return affected


def _block_size(n_edges, n):
    per_sample = max(n_edges, n, 1)
    return int(max(1, min(_MAX_BLOCK, _BLOCK_DRAWS // per_sample)))


def _block_rng(master_seed, block):
    return np.random.default_rng([int(master_seed), int(block)])


def _undirected_block(model, W, rng, B):
    """Per-sample component worths, shape ``(B, n, k)`` for ``k`` worth columns."""
    n = model.n
    s, d, p = model.edge_arrays
    live = rng.random((B, len(s))) < p
    b, e = np.nonzero(live)
    off = b * n
    g = csr_matrix((np.ones(len(e), dtype=np.int8), (s[e] + off, d[e] + off)),
                   shape=(B * n, B * n))
    _, labels = connected_components(g, directed=False)
    out = np.empty((B, n, W.shape[1]))
    for k in range(W.shape[1]):
        sums = np.bincount(labels, weights=np.tile(W[:, k], B))
        out[:, :, k] = sums[labels].reshape(B, n)
    return out


def _directed_block(model, W, rng, B):
    n = model.n
    s, d, p = model.edge_arrays
    live = rng.random((B, len(s))) < p
    out = np.empty((B, n, W.shape[1]))
    for b in range(B):
        keep = live[b]
        g = csr_matrix((np.ones(int(keep.sum()), dtype=np.int8), (s[keep], d[keep])),
                       shape=(n, n))
        for t in range(n):
            reach = breadth_first_order(g, t, directed=True, return_predecessors=False)
            out[b, t] = W[reach].sum(axis=0)
    return out


def estimate_component_losses(model, K, master_seed, workers=1):
    """Monte Carlo estimate of L(t) from ``K`` live-edge samples.

    Samples are grouped in fixed-size blocks; block ``b`` draws from a stream
    keyed on ``(master_seed, b)``, and block partial sums are reduced in block
    order, so the result does not depend on ``workers``. Sample k of a block
    uses the same coins ``sample_live_edge_graph`` would draw as the k-th call
    on that block's generator.

    Directed models average per-start reachability in each live-edge sample.
    """
    model = as_model(model)
    if K < 1:
        raise ValueError("K must be >= 1")
    g = model.graph
    W = np.column_stack([g.worths, g.attacker_worths])
    B = _block_size(len(model.edge_arrays[0]), model.n)
    run = _directed_block if model.directed else _undirected_block
    sizes = [min(B, K - start) for start in range(0, K, B)]

    def block(i):
        return run(model, W, _block_rng(master_seed, i), sizes[i])

    first = block(0)
    # shift by the first sample: exact means when every sample agrees
    pivot = first[0]

    def partial(vals):
        dev = vals - pivot
        return dev.sum(axis=0), (dev * dev).sum(axis=0)

    parts = [partial(first)]
    rest = range(1, len(sizes))
    if workers > 1 and len(sizes) > 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts += list(pool.map(lambda i: partial(block(i)), rest))
    else:
        parts += [partial(block(i)) for i in rest]
    s1 = np.zeros_like(pivot)
    s2 = np.zeros_like(pivot)
    for a, b in parts:
        s1 += a
        s2 += b
    mean = pivot + s1 / K
    if K > 1:
        var = np.maximum(s2 - s1 * s1 / K, 0.0) / (K - 1)
        se = np.sqrt(var / K)
    else:
        se = np.zeros_like(pivot)
    return ExpectedLossVector(mean[:, 0], mean[:, 1], se[:, 0], se[:, 1], int(K))


def _tree_structure(model):
    if model.matrix is None:
        s, d = model.graph.src, model.graph.dst
        p = model.graph.prob
    else:
        s, d, p = model.edge_arrays
    return s, d, p


def tree_expected_losses(model):
    """Exact L(t) for every target of an undirected tree in O(n).

    Rerooting DP: ``down[v]`` is the expected affected worth inside v's
    subtree, ``up[v]`` the expected worth reached through v's parent edge.
    """
    model = as_model(model)
    n = model.n
    if model.directed:
        raise NotATreeError("tree losses need an undirected graph")
    s, d, p = _tree_structure(model)
    if len(s) != n - 1:
        raise NotATreeError(f"a tree on {n} targets has {n - 1} edges, got {len(s)}")
    adj = [[] for _ in range(n)]
    for a, b, q in zip(s.tolist(), d.tolist(), p.tolist()):
        adj[a].append((b, q))
        adj[b].append((a, q))
    parent = np.full(n, -1)
    pe = np.zeros(n)
    order = [0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    for u in order:
        for v, q in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                pe[v] = q
                order.append(v)
    if len(order) != n:
        raise NotATreeError("graph is not connected")

    W = np.column_stack([model.graph.worths, model.graph.attacker_worths])
    down = W.copy()
    for v in reversed(order[1:]):
        down[parent[v]] += pe[v] * down[v]
    up = np.zeros_like(W)
    for v in order[1:]:
        u = parent[v]
        up[v] = pe[v] * (down[u] + up[u] - pe[v] * down[v])
    L = down + up
    return ExpectedLossVector.exact(L[:, 0], L[:, 1])


def is_tree(graph):
    if graph.directed or graph.n_edges != graph.n - 1:
        return False
    n_comp, _ = connected_components(
        csr_matrix((np.ones(graph.n_edges), (graph.src, graph.dst)), shape=(graph.n, graph.n)),
        directed=False)
    return n_comp == 1


def build_utility_matrices(losses, configs, zero_sum=True):
    """``U[o, t] = -beta[o, t] * L_def(t)``; ``V = -U`` if zero-sum else ``beta * L_atk``."""
    if configs.n_targets != losses.n:
        raise ValueError(f"configurations cover {configs.n_targets} targets, "
                         f"losses cover {losses.n}")
    beta = configs.beta
    # + 0.0 turns -0.0 into 0.0
    U = -(beta * losses.loss_def[None, :]) + 0.0
    V = -U + 0.0 if zero_sum else beta * losses.loss_atk[None, :]
    return UtilityMatrices(U, V)


def expected_losses(model, K, master_seed, method="auto", workers=1):
    """Dispatch: ``exact`` (trees), ``sample``, or ``auto`` (exact when possible)."""
    model = as_model(model)
    if method == "exact" or (method == "auto" and model.matrix is None and is_tree(model.graph)):
        return tree_expected_losses(model)
    if method not in ("auto", "sample"):
        raise ValueError(f"unknown loss method {method!r}")
    return estimate_component_losses(model, K, master_seed, workers)

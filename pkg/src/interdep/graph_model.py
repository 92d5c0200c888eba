"""Dependency graphs: targets, worths, cascade probabilities, generators and I/O."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class EdgeListError(ValueError):
    """Malformed edge-list or worth file. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DependencyGraph:
    """Targets ``0..n-1`` with worths and probabilistic dependency edges.

    Edges are stored sorted by ``(src, dst)``. Undirected graphs keep each
    pair once with ``src < dst``.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    prob: np.ndarray
    directed: bool = False
    worths: np.ndarray = None
    attacker_worths: np.ndarray = None

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("graph needs at least one target")
        src = np.asarray(self.src, dtype=np.int64).ravel()
        dst = np.asarray(self.dst, dtype=np.int64).ravel()
        prob = np.asarray(self.prob, dtype=float).ravel()
        if not (len(src) == len(dst) == len(prob)):
            raise ValueError("src, dst and prob must have equal length")
        if len(src):
            if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
            if np.any(~np.isfinite(prob)) or prob.min() < 0 or prob.max() > 1:
                raise ValueError("cascade probabilities must lie in [0, 1]")
        if not self.directed:
            lo, hi = np.minimum(src, dst), np.maximum(src, dst)
            src, dst = lo, hi
        order = np.lexsort((dst, src))
        src, dst, prob = src[order], dst[order], prob[order]
        if len(src) > 1:
            dup = (np.diff(src) == 0) & (np.diff(dst) == 0)
            if dup.any():
                i = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate edge ({src[i]}, {dst[i]})")
        worths = np.zeros(n) if self.worths is None else np.asarray(self.worths, dtype=float)
        atk = worths if self.attacker_worths is None else np.asarray(self.attacker_worths, dtype=float)
        for name, w in (("worths", worths), ("attacker_worths", atk)):
            if w.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            if np.any(~np.isfinite(w)) or np.any(w < 0):
                raise ValueError(f"{name} must be finite and nonnegative")
        set_ = object.__setattr__
        set_(self, "n", n)
        set_(self, "directed", bool(self.directed))
        set_(self, "src", _frozen(src, np.int64))
        set_(self, "dst", _frozen(dst, np.int64))
        set_(self, "prob", _frozen(prob, float))
        set_(self, "worths", _frozen(worths, float))
        set_(self, "attacker_worths", _frozen(atk, float))

    @classmethod
    def from_edges(cls, n, edges, directed=False, worths=None, attacker_worths=None):
        """Build from an iterable of ``(src, dst, prob)`` triples."""
        edges = list(edges)
        if edges:
            s, d, p = zip(*edges)
        else:
            s, d, p = (), (), ()
        return cls(n, np.array(s, dtype=np.int64), np.array(d, dtype=np.int64),
                   np.array(p, dtype=float), directed, worths, attacker_worths)

    @property
    def n_edges(self):
        return len(self.src)

    @property
    def edges(self):
        return [(int(s), int(d), float(p)) for s, d, p in zip(self.src, self.dst, self.prob)]

    @cached_property
    def degree(self):
        """Total degree (in + out for directed graphs)."""
        return np.bincount(self.src, minlength=self.n) + np.bincount(self.dst, minlength=self.n)

    def with_prob(self, p):
        """Copy with every edge probability set to ``p``."""
        return dataclasses.replace(self, prob=np.full(self.n_edges, float(p)))

    def with_worths(self, worths, attacker_worths=None):
        return dataclasses.replace(self, worths=worths, attacker_worths=attacker_worths)

    def same_as(self, other):
        return (
            self.n == other.n
            and self.directed == other.directed
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.prob, other.prob)
            and np.array_equal(self.worths, other.worths)
            and np.array_equal(self.attacker_worths, other.attacker_worths)
        )


@dataclass(frozen=True, eq=False)
class CascadeModel:
    """Cascade probabilities over a graph, sparse (edge list) or dense (n x n).

    The dense form appears after the noise transform, where every pair of
    targets is a potential edge.
    """

    graph: DependencyGraph
    matrix: np.ndarray = None

    def __post_init__(self):
        if self.matrix is not None:
            n = self.graph.n
            m = np.array(self.matrix, dtype=float)
            if m.shape != (n, n):
                raise ValueError(f"dense matrix must be {n}x{n}")
            if np.any(np.diag(m) != 0):
                raise ValueError("self-pairs must have probability 0")
            if m.min() < 0 or m.max() > 1:
                raise ValueError("cascade probabilities must lie in [0, 1]")
            if not self.graph.directed and not np.array_equal(m, m.T):
                raise ValueError("undirected dense model must be symmetric")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @property
    def representation(self):
        return "sparse" if self.matrix is None else "dense"

    @property
    def n(self):
        return self.graph.n

    @property
    def directed(self):
        return self.graph.directed

    @cached_property
    def edge_arrays(self):
        """``(src, dst, prob)`` of every pair with nonzero probability.

        Undirected pairs appear once with ``src < dst``; zero-probability
        edges are dropped since they can never be live.
        """
        if self.matrix is None:
            g = self.graph
            keep = g.prob > 0
            return g.src[keep], g.dst[keep], g.prob[keep]
        m = self.matrix if self.directed else np.triu(self.matrix, 1)
        s, d = np.nonzero(m)
        return s.astype(np.int64), d.astype(np.int64), m[s, d]

    def prob(self, u, v):
        """Cascade probability along ``u -> v`` (either direction if undirected)."""
        if self.matrix is not None:
            return float(self.matrix[u, v])
        g = self.graph
        if not g.directed and u > v:
            u, v = v, u
        i = np.searchsorted(g.src, u, side="left")
        j = np.searchsorted(g.src, u, side="right")
        k = i + np.searchsorted(g.dst[i:j], v)
        if k < j and g.dst[k] == v:
            return float(g.prob[k])
        return 0.0

    def dense(self):
        """The full n x n probability matrix."""
        if self.matrix is not None:
            return self.matrix
        g = self.graph
        m = np.zeros((g.n, g.n))
        m[g.src, g.dst] = g.prob
        if not g.directed:
            m[g.dst, g.src] = g.prob
        return m

    @cached_property
    def neighbors(self):
        """Outgoing adjacency lists ``[(v, p), ...]`` sorted by ``v``, nonzero p only."""
        s, d, p = self.edge_arrays
        adj = [[] for _ in range(self.n)]
        for u, v, q in zip(s.tolist(), d.tolist(), p.tolist()):
            adj[u].append((v, q))
            if not self.directed:
                adj[v].append((u, q))
        for row in adj:
            row.sort()
        return adj


def as_model(obj):
    """Accept a graph or a model; graphs become sparse models."""
    if isinstance(obj, CascadeModel):
        return obj
    if isinstance(obj, DependencyGraph):
        return CascadeModel(obj)
    raise TypeError(f"expected DependencyGraph or CascadeModel, got {type(obj).__name__}")


# --- generators -------------------------------------------------------------


def generate_erdos_renyi(n, p, seed, cascade_prob=0.5, directed=False):
    """G(n, p): every pair independently linked with probability ``p``.

    Undirected by default; ``directed=True`` flips a coin per ordered pair.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if directed:
        s, d = np.nonzero(~np.eye(n, dtype=bool))
    else:
        s, d = np.triu_indices(n, 1)
    keep = rng.random(len(s)) < p
    s, d = s[keep], d[keep]
    return DependencyGraph(n, s, d, np.full(len(s), float(cascade_prob)), directed)


def generate_preferential_attachment(n, m, mu, seed, cascade_prob=0.5):
    """Generalized preferential attachment.

    Starts from the edge 0-1. Node ``i`` links to all earlier nodes when
    ``i <= m``, otherwise to ``m`` distinct earlier nodes drawn without
    replacement with probability proportional to ``degree ** mu``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    rng = np.random.default_rng(seed)
    deg = np.zeros(n)
    deg[0] = deg[1] = 1
    src, dst = [0], [1]
    for i in range(2, n):
        if i <= m:
            targets = np.arange(i)
        else:
            w = deg[:i] ** mu
            targets = rng.choice(i, size=m, replace=False, p=w / w.sum())
        for j in targets:
            src.append(int(j))
            dst.append(i)
        deg[targets] += 1
        deg[i] += len(targets)
    return DependencyGraph(n, src, dst, np.full(len(src), float(cascade_prob)), False)


def assign_worths(graph, mode="uniform01", *, seed=None, value=None, values=None,
                  attacker_values=None):
    """Return a copy of ``graph`` with worths filled in.

    mode is ``"uniform01"`` (needs ``seed``), ``"constant"`` (needs ``value``)
    or ``"explicit"`` (needs ``values``; ``attacker_values`` optional).
    Attacker worths equal defender worths unless given explicitly.
    """
    n = graph.n
    if mode == "uniform01":
        w = np.random.default_rng(seed).random(n)
    elif mode == "constant":
        if value is None:
            raise ValueError("constant mode needs a value")
        w = np.full(n, float(value))
    elif mode == "explicit":
        if values is None or len(values) != n:
            raise ValueError(f"explicit worths need exactly {n} values")
        w = np.asarray(values, dtype=float)
    else:
        raise ValueError(f"unknown worth mode {mode!r}")
    if attacker_values is not None and len(attacker_values) != n:
        raise ValueError(f"attacker worths need exactly {n} values")
    return graph.with_worths(w, attacker_values)


def apply_edge_noise(graph, epsilon, base_p):
    """Dense model under structural uncertainty.

    Observed edges keep probability ``p * (1 - epsilon)``; every unobserved
    pair gets ``base_p * epsilon``.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if not 0 <= base_p <= 1:
        raise ValueError("base_p must lie in [0, 1]")
    n = graph.n
    observed = np.zeros((n, n), dtype=bool)
    observed[graph.src, graph.dst] = True
    p = np.zeros((n, n))
    p[graph.src, graph.dst] = graph.prob
    if not graph.directed:
        observed |= observed.T
        p = p + p.T
    m = np.where(observed, p * (1 - epsilon), base_p * epsilon)
    np.fill_diagonal(m, 0.0)
    return CascadeModel(graph, m)


# --- file formats -----------------------------------------------------------


def _content_lines(text):
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield num, line


def parse_edge_list(text):
    lines = _content_lines(text)
    try:
        num, header = next(lines)
    except StopIteration:
        raise EdgeListError("missing header '<n> <directed|undirected>'", 1) from None
    parts = header.split()
    if len(parts) != 2 or parts[1] not in ("directed", "undirected"):
        raise EdgeListError("header must be '<n> <directed|undirected>'", num)
    try:
        n = int(parts[0])
    except ValueError:
        raise EdgeListError(f"bad target count {parts[0]!r}", num) from None
    if n < 1:
        raise EdgeListError("target count must be >= 1", num)
    directed = parts[1] == "directed"
    seen = set()
    src, dst, prob = [], [], []
    for num, line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError("expected '<src> <dst> <prob>'", num)
        try:
            s, d, p = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise EdgeListError(f"cannot parse {line!r}", num) from None
        if not (0 <= s < n and 0 <= d < n):
            raise EdgeListError(f"target index out of range [0, {n})", num)
        if s == d:
            raise EdgeListError("self-loop", num)
        if not (0 <= p <= 1):
            raise EdgeListError(f"probability {parts[2]} outside [0, 1]", num)
        key = (s, d) if directed else (min(s, d), max(s, d))
        if key in seen:
            raise EdgeListError(f"duplicate edge {key}", num)
        seen.add(key)
        src.append(s)
        dst.append(d)
        prob.append(p)
    return DependencyGraph(n, src, dst, prob, directed)


def format_edge_list(graph):
    out = [f"{graph.n} {'directed' if graph.directed else 'undirected'}"]
    out += [f"{s} {d} {p!r}" for s, d, p in graph.edges]
    return "\n".join(out) + "\n"


def load_edge_list(path):
    return parse_edge_list(Path(path).read_text())


def save_edge_list(graph, path):
    Path(path).write_text(format_edge_list(graph))


def parse_worths(text, n):
    """Worth file lines: ``<target> <worth> [<attacker_worth>]``.

    Every target must appear exactly once. Returns ``(worths, attacker_worths)``;
    the latter is None when no line carries a third column.
    """
    w = np.full(n, np.nan)
    a = np.full(n, np.nan)
    any_atk = False
    for num, line in _content_lines(text):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListError("expected '<target> <worth> [<attacker_worth>]'", num)
        try:
            t = int(parts[0])
            vals = [float(x) for x in parts[1:]]
        except ValueError:
            raise EdgeListError(f"cannot parse {line!r}", num) from None
        if not 0 <= t < n:
            raise EdgeListError(f"target index out of range [0, {n})", num)
        if not np.isnan(w[t]):
            raise EdgeListError(f"target {t} listed twice", num)
        if any(v < 0 or not np.isfinite(v) for v in vals):
            raise EdgeListError("worths must be finite and nonnegative", num)
        w[t] = vals[0]
        a[t] = vals[-1]
        any_atk |= len(vals) == 2
    missing = np.flatnonzero(np.isnan(w))
    if len(missing):
        raise EdgeListError(f"no worth given for target {missing[0]}")
    return w, (a if any_atk else None)


def load_worths(path, n):
    return parse_worths(Path(path).read_text(), n)


def save_worths(graph, path):
    zero_sum = np.array_equal(graph.worths, graph.attacker_worths)
    lines = []
    for t in range(graph.n):
        row = f"{t} {float(graph.worths[t])!r}"
        if not zero_sum:
            row += f" {float(graph.attacker_worths[t])!r}"
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n")

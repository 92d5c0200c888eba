"""Exact fixed-target LPs without a budget, by parametric analysis in the
attacker value ``a``.

Fix the attacker's value ``a`` at the attacked target. Every other target t
then independently maximizes its objective share over mixtures of options
whose attacker value is at most ``a``; that optimum ``phi_t(a)`` is a concave
nondecreasing piecewise-linear function read off the upper concave hull of
the option points ``(V[o, t], coef[o, t])``. The attacked target contributes
``psi(a)``, the hull itself evaluated at exactly ``a``. Each LP is then the
maximum of a concave piecewise-linear function of one variable, attained at a
breakpoint, and the sum over all targets is shared by all n LPs.
"""
from __future__ import annotations

import numpy as np


def upper_hull(x, y):
    """Vertices of the upper concave envelope, as ``(xs, ys, option_index)``."""
    order = sorted(range(len(x)), key=lambda o: (x[o], -y[o], o))
    pts = []
    for o in order:
        if pts and pts[-1][0] == x[o]:
            continue  # same x, lower or equal y
        while len(pts) >= 2:
            (x0, y0, _), (x1, y1, _) = pts[-2], pts[-1]
            if (x1 - x0) * (y[o] - y0) - (y1 - y0) * (x[o] - x0) >= 0:
                pts.pop()
            else:
                break
        pts.append((x[o], y[o], o))
    xs, ys, idx = zip(*pts)
    return np.array(xs), np.array(ys), np.array(idx)


def _mix(a, xs, idx, n_options):
    """Option mixture on a hull at abscissa ``a`` (clamped to the hull's range)."""
    lam = np.zeros(n_options)
    if a >= xs[-1]:
        lam[idx[-1]] = 1.0
        return lam
    if a <= xs[0]:
        lam[idx[0]] = 1.0
        return lam
    k = int(np.searchsorted(xs, a, side="right")) - 1
    theta = (a - xs[k]) / (xs[k + 1] - xs[k])
    lam[idx[k]] += 1.0 - theta
    lam[idx[k + 1]] += theta
    return lam


class EnvelopeSolver:
    """All fixed-target LPs of one game instance (no budget)."""

    def __init__(self, U, V, costs, priors):
        self.U, self.V, self.costs, self.priors = U, V, costs, priors
        m, n = U.shape
        self.m, self.n = m, n
        self.base = (1 - priors.r) * priors.g[None, :] * U - costs
        self.hat = self.base + priors.r * U
        self.phi = []  # nondecreasing part of the base hull, per target
        self.psi = []
        for t in range(n):
            xs, ys, idx = upper_hull(V[:, t], self.base[:, t])
            top = int(np.argmax(ys))  # leftmost maximum
            self.phi.append((xs[:top + 1], ys[:top + 1], idx[:top + 1]))
            self.psi.append(upper_hull(V[:, t], self.hat[:, t]))
        self.lo = float(V.min(axis=0).max())
        xs_all = np.concatenate([p[0] for p in self.phi] + [[self.lo]])
        self.X = np.unique(xs_all[xs_all >= self.lo])
        S = np.zeros_like(self.X)
        for xs, ys, _ in self.phi:
            S += np.interp(self.X, xs, ys)
        self.S = S

    def value(self, t_hat):
        """Optimal value and attacker level of LP ``t_hat``; None if infeasible."""
        xs_h, ys_h, _ = self.psi[t_hat]
        hi = float(xs_h[-1])
        if hi < self.lo:
            return None
        j = int(np.searchsorted(self.X, hi, side="right"))
        cand = np.unique(np.concatenate([self.X[:j], xs_h[(xs_h >= self.lo)], [hi]]))
        px, py, _ = self.phi[t_hat]
        val = np.interp(cand, self.X, self.S) - np.interp(cand, px, py) + np.interp(cand, xs_h, ys_h)
        k = int(np.argmax(val))
        return float(val[k]), float(cand[k])

    def policy(self, t_hat, a):
        q = np.empty((self.m, self.n))
        for t in range(self.n):
            xs, _, idx = self.psi[t] if t == t_hat else self.phi[t]
            q[:, t] = _mix(a, xs, idx, self.m)
        return q

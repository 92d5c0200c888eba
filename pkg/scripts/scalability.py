"""Full pipeline on a PA graph at the scale of an AS-level topology, with phase timings."""
import argparse
import time

from interdep.cascade import ConfigurationSet, build_utility_matrices, expected_losses
from interdep.game import GamePriors, evaluate_policy, solve_multiple_lp
from interdep.graph_model import assign_worths, generate_preferential_attachment

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=6474)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--cost", type=float, default=1.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--backend", choices=["auto", "highs", "envelope"], default="auto")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    clock = {}
    t = time.perf_counter()
    g = assign_worths(generate_preferential_attachment(args.n, args.m, 1.0, args.seed), seed=args.seed)
    clock["generate"] = time.perf_counter() - t
    t = time.perf_counter()
    losses = expected_losses(g, args.samples, args.seed, method="sample")
    clock["sample"] = time.perf_counter() - t
    cfg = ConfigurationSet.two_level(args.n, args.cost)
    u = build_utility_matrices(losses, cfg)
    pri = GamePriors.uniform(args.n, args.r)
    t = time.perf_counter()
    res = solve_multiple_lp(u.U, u.V, cfg.cost, pri, short_circuit=False, backend=args.backend)
    clock["solve"] = time.perf_counter() - t
    ev = evaluate_policy(res.policy, u.U, u.V, cfg.cost, pri)
    print(f"n={args.n} edges={g.n_edges} K={args.samples} lps={len(res.per_lp_status)}")
    print(f"utility={ev.defender_utility:.6g} loss={ev.expected_loss:.6g} cost={ev.expected_cost:.6g}")
    for k, v in clock.items():
        print(f"{k}_s={v:.3f}")

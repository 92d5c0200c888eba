"""Optimal policy against the independence and degree baselines (cost and budget sweeps)."""
from _common import er, pa, parser, show, sweep

COSTS = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0]
BUDGETS = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    for name, base in (("er", er(args.n, 0.1)), ("pa", pa(args.n))):
        show(sweep(args, f"baselines_cost_{name}", "cost", COSTS, base=base))
        show(sweep(args, f"baselines_budget_{name}", "budget", BUDGETS, base=base, fixed_cost=0.5))

"""Extra partial-defense options, and planning for attacks when failures are random."""
from _common import pa, parser, show, sweep

COSTS = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0]

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--true-r", type=float, default=0.0)
    args = p.parse_args()
    show(sweep(args, "config_menus", "configs", COSTS, base=pa(args.n)))
    show(sweep(args, "failure_modes", "failure", COSTS, base=pa(args.n), true_r=args.true_r))

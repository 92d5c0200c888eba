"""Utility under edge noise for two cascade probabilities."""
from _common import pa, parser, show, sweep

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--cost", type=float, default=0.1)
    args = p.parse_args()
    show(sweep(args, "noise", "noise", [0.0, 0.001, 0.005, 0.01, 0.02], base=pa(args.n),
               noise_ps=[0.5, 0.1], fixed_cost=args.cost))

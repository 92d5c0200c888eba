"""Generalized preferential attachment across mu, with an ER reference."""
from _common import pa, parser, show, sweep

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    show(sweep(args, "mu", "mu", [0.0, 0.5, 1.0, 1.5, 2.0], base=pa(args.n),
               costs=[0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0]))

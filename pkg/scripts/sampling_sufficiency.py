"""Policy quality against the number of cascade samples, judged on a K=100,000 reference."""
from _common import er, parser, show, sweep

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--eval-samples", type=int, default=100_000)
    args = p.parse_args()
    # ER has cycles, so every K is really sampled
    show(sweep(args, "sampling", "samples", [0, 10, 100, 1000, 10000], base=er(args.n, 2 / (args.n - 1)),
               eval_samples=args.eval_samples))

"""Loss, cost and their sum against defense cost, with a per-seed peak count."""
import numpy as np
from scipy.signal import find_peaks

from _common import er, pa, parser, show, sweep
from interdep.sweeps import series


def peaks(costs, prominence=0.1):
    padded = np.r_[0.0, costs, 0.0]
    if padded.max() <= 0:
        return 0
    return len(find_peaks(padded, prominence=prominence * padded.max())[0])


if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    # average degree 2 for both families
    for name, base in (("pa", pa(args.n)), ("er", er(args.n, 2 / (args.n - 1)))):
        rows = sweep(args, f"cost_{name}", "cost", base=base, methods=["optimal"])
        show(rows)
        counts = [peaks([r.exp_cost for _, r in pr]) for pr in series(rows, "optimal").values()]
        print(f"# {name}: seeds with >= 2 cost peaks: {sum(c >= 2 for c in counts)}/{len(counts)}")

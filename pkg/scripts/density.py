"""ER density sweep at c = 0.04, with a Welch test between degrees 0.5 and 2."""
from scipy import stats

from _common import parser, show, sweep

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    base = {"graph": {"generator": "er", "n": args.n, "p": 0.02, "cascade_prob": 0.5},
            "worths": {"mode": "uniform01"}, "priors": {"r": 1.0}}
    rows = sweep(args, "density", "density", base=base, fixed_cost=0.04)
    show(rows)
    lo = [r.exp_loss for r in rows if r.param == 0.5]
    hi = [r.exp_loss for r in rows if r.param == 2.0]
    t = stats.ttest_ind(hi, lo, equal_var=False, alternative="greater")
    print(f"# loss at degree 2 vs 0.5: t = {t.statistic:.2f}, p = {t.pvalue:.2e}")

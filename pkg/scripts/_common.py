"""Shared plumbing for the experiment scripts."""
import argparse
import copy
import sys
import time
from pathlib import Path

from interdep.sweeps import DEFAULT_BASE, SweepSpec, aggregate, failed, run_sweep, write_sweep


def parser(doc, replications=100):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--replications", type=int, default=replications)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--out", default="results")
    p.add_argument("--no-timings", action="store_true")
    return p


def graph_base(**graph):
    base = copy.deepcopy(DEFAULT_BASE)
    base["graph"] = graph
    return base


def pa(n, m=1, mu=1.0, p=0.5):
    return graph_base(generator="pa", n=n, m=m, mu=mu, cascade_prob=p)


def er(n, prob, p=0.5):
    return graph_base(generator="er", n=n, p=prob, cascade_prob=p)


def sweep(args, name, kind, values=None, **kw):
    spec = SweepSpec(kind, values, args.replications, args.seed, samples=args.samples,
                     workers=args.workers, timings=not args.no_timings, **kw)
    t0 = time.perf_counter()
    rows = run_sweep(spec)
    paths = write_sweep(rows, Path(args.out), name)
    print(f"# {name}: {len(rows)} rows in {time.perf_counter() - t0:.1f}s -> {paths[0]}", file=sys.stderr)
    if failed(rows):
        print(f"# {len(failed(rows))} failed replications", file=sys.stderr)
    return rows


def show(rows, fields=("exp_loss", "exp_cost", "neg_utility")):
    print("param,method," + ",".join(f"{f}_mean,{f}_se" for f in fields))
    for a in aggregate(rows):
        vals = ",".join(f"{a[f + '_mean']:.4f},{a[f + '_se']:.4f}" for f in fields)
        print(f"{a['param']:g},{a['method']},{vals}")

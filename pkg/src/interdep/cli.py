"""Command-line front end.

    interdep gen --generator pa --n 100 --out graphs/
    interdep losses scenario.json --samples 10000
    interdep solve scenario.json --out results/
    interdep baseline --method degree scenario.json --budget 2
    interdep sweep --kind cost --replications 20 --out results/

Exit codes: 0 success, 2 parse or validation error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .baselines import degree_heuristic_policy, independence_policy
from .cascade import build_utility_matrices, expected_losses
from .game import InfeasibleGameError, SolverError, evaluate_policy, solve_multiple_lp
from .graph_model import (
    EdgeListError,
    assign_worths,
    format_edge_list,
    generate_erdos_renyi,
    generate_preferential_attachment,
    save_worths,
)
from .scenario import ScenarioError, derive_seed, load_scenario
from .sweeps import DEFAULT_BASE, KINDS, SweepSpec, failed, run_sweep, write_sweep

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(sub):
    # flags accepted before or after the subcommand; the subparser copies
    # must not overwrite values given before it
    d = argparse.SUPPRESS if sub else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d if sub else 0, help="replication seed (default 0)")
    p.add_argument("--samples", type=int, default=d if sub else 10_000,
                   help="cascade samples K (default 10000)")
    p.add_argument("--replications", type=int, default=d if sub else 100,
                   help="sweep replications (default 100)")
    p.add_argument("--out", default=d, help="output directory (default: stdout, or results/ for sweeps)")
    p.add_argument("--format", choices=["csv", "json"], default=d if sub else "csv")
    p.add_argument("--workers", type=int, default=d if sub else 1, help="worker threads")
    p.add_argument("--no-timings", action="store_true", default=d if sub else False,
                   help="write zero timing columns, for byte-comparable output")
    p.add_argument("--n", type=int, default=d, help="number of targets for generated graphs")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="interdep", parents=[_common(False)],
                                     description="Defense of interdependent assets.")
    subs = parser.add_subparsers(dest="command", required=True)
    common = _common(True)

    gen = subs.add_parser("gen", parents=[common], help="generate a graph edge list")
    gen.add_argument("--generator", choices=["er", "pa"], default="pa")
    gen.add_argument("--p", type=float, default=None, help="ER edge probability (default 2/(n-1))")
    gen.add_argument("--m", type=int, default=1, help="PA edges per new node")
    gen.add_argument("--mu", type=float, default=1.0, help="PA degree exponent")
    gen.add_argument("--cascade-prob", type=float, default=0.5)
    gen.add_argument("--directed", action="store_true", help="directed ER edges")
    gen.add_argument("--worths", choices=["uniform01", "none"], default="uniform01")
    gen.add_argument("--name", default="graph", help="output file stem")

    los = subs.add_parser("losses", parents=[common], help="expected-loss vector of a scenario")
    los.add_argument("scenario")
    los.add_argument("--method", choices=["auto", "exact", "sample"], default="auto")

    sol = subs.add_parser("solve", parents=[common], help="optimal policy for a scenario")
    sol.add_argument("scenario")
    sol.add_argument("--method", choices=["auto", "exact", "sample"], default="auto",
                     help="loss estimation method")
    sol.add_argument("--backend", choices=["auto", "highs", "envelope"], default="auto")
    sol.add_argument("--no-short-circuit", action="store_true",
                     help="solve all n LPs even when r = 0")

    base = subs.add_parser("baseline", parents=[common], help="evaluate a comparison policy")
    base.add_argument("scenario")
    base.add_argument("--method", choices=["independence", "degree"], required=True)
    base.add_argument("--budget", type=float, default=None,
                      help="degree heuristic budget (default: the scenario budget, else 0)")

    sw = subs.add_parser("sweep", parents=[common], help="parameter sweep over seeds")
    sw.add_argument("--kind", choices=KINDS, required=True)
    sw.add_argument("--values", type=_floats, default=None, help="comma-separated grid")
    sw.add_argument("--base", default=None, help="base scenario JSON (graph, worths, priors)")
    sw.add_argument("--loss-method", choices=["auto", "exact", "sample"], default="auto")
    sw.add_argument("--fixed-cost", type=float, default=None)
    sw.add_argument("--costs", type=_floats, default=None, help="cost grid for --kind mu")
    sw.add_argument("--noise-ps", type=_floats, default=None, help="cascade probabilities for --kind noise")
    sw.add_argument("--true-r", type=float, default=0.0, help="attack prior for --kind failure")
    sw.add_argument("--eval-samples", type=int, default=100_000, help="reference K for --kind samples")
    sw.add_argument("--backend", choices=["auto", "highs", "envelope"], default="auto")
    sw.add_argument("--name", default=None, help="output file stem (default: the kind)")
    return parser


def _emit(text, out, name):
    if out is None:
        sys.stdout.write(text)
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    path = path / name
    path.write_text(text)
    print(f"wrote {path}", file=sys.stderr)
    return path


def _ms(t0, on):
    return (time.perf_counter() - t0) * 1000 if on else 0.0


def cmd_gen(args):
    n = args.n or 100
    gseed = derive_seed(args.seed, "graph")
    if args.generator == "er":
        p = args.p if args.p is not None else min(1.0, 2.0 / max(n - 1, 1))
        g = generate_erdos_renyi(n, p, gseed, args.cascade_prob, args.directed)
    else:
        g = generate_preferential_attachment(n, args.m, args.mu, gseed, args.cascade_prob)
    _emit(format_edge_list(g), args.out, f"{args.name}.txt")
    if args.worths != "none" and args.out is not None:
        g = assign_worths(g, args.worths, seed=derive_seed(args.seed, "worths"))
        path = Path(args.out) / f"{args.name}_worths.txt"
        save_worths(g, path)
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _losses_for(sc, args, method):
    return expected_losses(sc.model(), args.samples, derive_seed(args.seed, "cascades"), method,
                           workers=args.workers)


def cmd_losses(args):
    sc = load_scenario(args.scenario, args.seed)
    losses = _losses_for(sc, args, args.method)
    if args.format == "json":
        doc = {"loss_def": losses.loss_def.tolist(), "loss_atk": losses.loss_atk.tolist(),
               "stderr_def": losses.stderr_def.tolist(), "stderr_atk": losses.stderr_atk.tolist(),
               "n_samples": losses.n_samples}
        _emit(json.dumps(doc, indent=1) + "\n", args.out, "losses.json")
    else:
        _emit(losses.to_csv(), args.out, "losses.csv")
    return EXIT_OK


def _evaluation_doc(ev):
    return {"defender_utility": ev.defender_utility, "attacker_target": ev.attacker_target,
            "expected_loss": ev.expected_loss, "expected_cost": ev.expected_cost,
            "neg_utility": ev.expected_loss + ev.expected_cost}


def cmd_solve(args):
    timings = not args.no_timings
    sc = load_scenario(args.scenario, args.seed)
    t0 = time.perf_counter()
    losses = _losses_for(sc, args, args.method)
    sample_ms = _ms(t0, timings)
    u = build_utility_matrices(losses, sc.configs, sc.zero_sum)
    t0 = time.perf_counter()
    res = solve_multiple_lp(u.U, u.V, sc.configs.cost, sc.priors, sc.budget, sc.budget_mode,
                            short_circuit=not args.no_short_circuit, backend=args.backend)
    solve_ms = _ms(t0, timings)
    ev = evaluate_policy(res.policy, u.U, u.V, sc.configs.cost, sc.priors)
    doc = res.to_dict()
    if not timings:
        doc["wall_time"] = 0.0
    doc["evaluation"] = _evaluation_doc(ev)
    doc["timings_ms"] = {"sample": sample_ms, "solve": solve_ms}
    _emit(json.dumps(doc, indent=1) + "\n", args.out, "solve.json")
    return EXIT_OK


def cmd_baseline(args):
    sc = load_scenario(args.scenario, args.seed)
    losses = _losses_for(sc, args, "auto")
    u = build_utility_matrices(losses, sc.configs, sc.zero_sum)
    if args.method == "independence":
        budget = args.budget if args.budget is not None else sc.budget
        pol = independence_policy(sc.graph, sc.configs, sc.priors, budget, sc.budget_mode, sc.zero_sum)
    else:
        budget = args.budget if args.budget is not None else (sc.budget or 0.0)
        pol = degree_heuristic_policy(sc.graph, sc.configs, budget)
    ev = evaluate_policy(pol, u.U, u.V, sc.configs.cost, sc.priors)
    doc = {"method": args.method, "budget": budget, "policy": pol.q.tolist(),
           "evaluation": _evaluation_doc(ev)}
    _emit(json.dumps(doc, indent=1) + "\n", args.out, f"baseline_{args.method}.json")
    return EXIT_OK


def cmd_sweep(args):
    if args.base is not None:
        path = Path(args.base)
        try:
            base = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
        base_dir = str(path.parent.resolve())
    else:
        base, base_dir = json.loads(json.dumps(DEFAULT_BASE)), None
    if args.n is not None:
        if "generator" not in base.get("graph", {}):
            raise ScenarioError("--n only applies to generated base graphs")
        base["graph"]["n"] = args.n
    kw = {}
    if args.costs is not None:
        kw["costs"] = args.costs
    if args.noise_ps is not None:
        kw["noise_ps"] = args.noise_ps
    spec = SweepSpec(args.kind, args.values, args.replications, args.seed, base, args.samples,
                     args.loss_method, args.fixed_cost, true_r=args.true_r,
                     eval_samples=args.eval_samples, workers=args.workers,
                     timings=not args.no_timings, backend=args.backend, base_dir=base_dir, **kw)
    rows = run_sweep(spec)
    out = args.out if args.out is not None else "results"
    for p in write_sweep(rows, out, args.name or args.kind, args.format):
        print(f"wrote {p}", file=sys.stderr)
    bad = failed(rows)
    if bad:
        print(f"{len(bad)} replication(s) failed: {sorted({r.method for r in bad})}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "losses": cmd_losses, "solve": cmd_solve, "baseline": cmd_baseline,
            "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad usage
    for flag in ("samples", "replications", "workers"):
        if getattr(args, flag) < (0 if flag == "samples" else 1):
            parser.error(f"--{flag} is out of range")
    try:
        return COMMANDS[args.command](args)
    except (SolverError, InfeasibleGameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ScenarioError, EdgeListError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

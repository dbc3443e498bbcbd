"""Command-line entry point: ``match-arena {gen,run,hardness,diagnose}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .diagnostics import (GoodVertexParams, bad_vertex_report, estimate_long_path_prob, tail_bound_report,
                          write_diagnostics_csv)
from .graph_core import ArrivalInstance, dump_instance
from .hardness import certificate_report, export_lp
from .harness import ALGORITHMS, FAMILIES, ExperimentSpec, format_table, generate_family, rows_to_csv, run_trials, summarize
from .rounding import RoundingConfig, improved_plan


def _family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES, default="random_general")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    alg = "edge_baseline" if args.family == "hard_gn" else "greedy"
    inst = generate_family(ExperimentSpec(family=args.family, algorithm=alg, n=args.n, p=args.p, seed=args.seed))
    _emit(dump_instance(inst), args.out)
    return 0


def cmd_run(args) -> int:
    spec = ExperimentSpec(family=args.family, algorithm=args.alg, n=args.n, p=args.p, trials=args.trials,
                          seed=args.seed, epsilon=args.epsilon, engine=args.engine, particles=args.particles,
                          baseline=args.baseline)
    rows = run_trials(spec)
    if args.out:
        Path(args.out).write_text(rows_to_csv(rows))
    else:
        sys.stdout.write(rows_to_csv(rows))
    sys.stderr.write(format_table(spec, summarize(rows)))
    return 0


def cmd_hardness(args) -> int:
    text = certificate_report(args.n)
    if args.lp_out:
        Path(args.lp_out).write_text(export_lp(args.n))
        text += f"LP written to {args.lp_out}\n"
    else:
        text += "\n" + export_lp(args.n)
    _emit(text, args.out)
    return 0


def cmd_diagnose(args) -> int:
    inst = generate_family(ExperimentSpec(family=args.family, algorithm="greedy", n=args.n, p=args.p, seed=args.seed))
    assert isinstance(inst, ArrivalInstance)
    cfg = RoundingConfig(epsilon=args.epsilon, seed=args.seed)
    params = GoodVertexParams(args.threshold_L, args.delta, args.samples)
    rng = np.random.default_rng(args.seed)
    est = estimate_long_path_prob(inst, cfg, params, rng)
    ks = tuple(float(k) for k in args.k_grid.split(","))
    tail = tail_bound_report(inst, cfg, ks, samples=args.samples, rng=rng)
    bad = bad_vertex_report(est, improved_plan(inst, cfg), args.epsilon)
    if args.out:
        write_diagnostics_csv(args.out, est, tail)
    print(f"vertices: {inst.n}  bad: {bad.bad}  sum x: {bad.fractional_value:.6f}  bad / sum x: {bad.ratio:.4f}")
    for i, k in enumerate(ks):
        print(f"k={k:g}: max tail freq {tail.freq[i].max():.5f}  bound {tail.bound[i]:.5f} (+{tail.slack[i]:.5f})")
    print("tail bound respected" if tail.ok else "tail bound EXCEEDED")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="match-arena", description="Online matching experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="emit an instance file")
    _family_args(g)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run trials and emit a CSV")
    _family_args(r)
    r.add_argument("--alg", choices=ALGORITHMS, default="greedy")
    r.add_argument("--epsilon", type=float, default=0.05)
    r.add_argument("--engine", choices=("exact", "particles"), default="exact")
    r.add_argument("--particles", type=int, default=20000)
    r.add_argument("--trials", type=int, default=1)
    r.add_argument("--baseline", choices=("greedy", "water_filling"), default="water_filling")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    h = sub.add_parser("hardness", help="verify the dual certificate and export the LP")
    h.add_argument("--n", type=int, default=4)
    h.add_argument("--lp-out")
    h.add_argument("--out")
    h.set_defaults(func=cmd_hardness)

    d = sub.add_parser("diagnose", help="primary-path and tail diagnostics")
    _family_args(d)
    d.add_argument("--epsilon", type=float, default=0.05)
    d.add_argument("--threshold-L", dest="threshold_L", type=int, default=5)
    d.add_argument("--delta", type=float, default=0.05)
    d.add_argument("--samples", type=int, default=20000)
    d.add_argument("--k-grid", default="1,2,4")
    d.add_argument("--out")
    d.set_defaults(func=cmd_diagnose)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

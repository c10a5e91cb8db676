"""Command-line front end: theory calculators, single-instance demos, and
experiment runs.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  Diagnostics go to
stderr; data to stdout or the requested output files.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import estimators as est
from . import harness, model, theory

THEORY_SUBCOMMANDS = ("mu", "omega", "fixed-points", "gamma-star", "se",
                      "sf-bound", "kl-bound", "g-plot")

DEMO_ALGOS = {
    "unfold": "unfold",
    "rec-unfold": "rec_unfold",
    "psd": "psd",
    "power-random": "power_random",
    "power-unfold": "power_unfold",
    "power-rec-unfold": "power_rec_unfold",
    "power-psd": "power_psd",
    "amp": "amp",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def parse_int_list(text):
    """Comma-separated integers with a..b range syntax, e.g. '3..5,10,100'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _sig(x, precision):
    return f"{x:.{precision}g}"


def build_parser():
    p = _Parser(prog="spiked-lab",
                description="Rank-one spiked tensor estimation toolbox")
    p.add_argument("--precision", type=int, default=6,
                   help="significant digits for printed numbers")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("theory", parents=[], help="closed-form calculators")
    t.add_argument("what", choices=THEORY_SUBCOMMANDS)
    t.add_argument("--k", type=str, default="3")
    t.add_argument("--beta", type=float, default=None)
    t.add_argument("--gamma", type=float, default=None)
    t.add_argument("--steps", type=int, default=50)
    t.add_argument("--n", type=int, default=None)
    t.add_argument("--dot", type=float, default=None)
    t.add_argument("--xmax", type=float, default=None)
    t.add_argument("--points", type=int, default=200)

    d = sub.add_parser("demo", help="sample one instance, run one algorithm")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--beta", type=float, required=True)
    d.add_argument("--algo", choices=sorted(DEMO_ALGOS), required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--gamma", type=float, default=None)
    d.add_argument("--max-iter", type=int, default=100)
    d.add_argument("--tol", type=float, default=1e-8)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="records CSV path (overrides config)")
    r.add_argument("--summary", default=None, help="optional JSON summary path")
    r.add_argument("--workers", type=int,
                   default=int(os.environ.get("SPIKED_LAB_WORKERS", "0")) or None)

    a = sub.add_parser("aggregate", help="aggregate a raw-records CSV")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--out", dest="outfile", required=True)
    return p


def cmd_theory(args):
    prec = args.precision
    ks = parse_int_list(args.k)
    what = args.what
    if what == "mu":
        print("k,mu_k,sqrt_k_log_k")
        for k in ks:
            print(f"{k},{_sig(theory.mu_k(k), prec)},"
                  f"{_sig(math.sqrt(k * math.log(k)), prec)}")
        return 0
    if what == "omega":
        print("k,omega_k")
        for k in ks:
            print(f"{k},{_sig(theory.omega_k(k), prec)}")
        return 0
    if what == "fixed-points":
        _require(args.beta is not None, "--beta is required")
        print("k,beta,x_lo,x_star,x_hi")
        for k in ks:
            fp = theory.fixed_points(args.beta, k)
            lo = _sig(fp.x_lo, prec) if fp.exists else ""
            hi = _sig(fp.x_hi, prec) if fp.exists else ""
            print(f"{k},{_sig(fp.beta, prec)},{lo},{_sig(fp.x_star, prec)},{hi}")
        return 0
    if what == "gamma-star":
        _require(args.beta is not None, "--beta is required")
        print("k,beta,gamma_star")
        for k in ks:
            try:
                gs = theory.gamma_star(args.beta, k)
            except ValueError as e:
                print(f"gamma-star undefined: {e}", file=sys.stderr)
                return 2
            print(f"{k},{_sig(args.beta, prec)},{_sig(gs, prec)}")
        return 0
    if what == "se":
        _require(args.beta is not None, "--beta is required")
        gamma = args.gamma if args.gamma is not None else 0.0
        print("t,tau,overlap")
        for k in ks:
            traj = theory.state_evolution(args.beta, k, gamma, args.steps)
            for t, tau in enumerate(traj.taus):
                print(f"{t},{_sig(tau, prec)},"
                      f"{_sig(tau / math.sqrt(1 + tau * tau), prec)}")
        return 0
    if what == "sf-bound":
        _require(args.beta is not None, "--beta is required")
        print("k,beta,sf_upper")
        for k in ks:
            print(f"{k},{_sig(args.beta, prec)},"
                  f"{_sig(theory.sudakov_fernique_upper(args.beta, k), prec)}")
        return 0
    if what == "kl-bound":
        _require(args.beta is not None, "--beta is required")
        _require(args.n is not None, "--n is required")
        print("k,n,beta,dot,kl_bound")
        for k in ks:
            b = theory.kl_bound(args.beta, args.n, k, dot=args.dot)
            dot = "" if args.dot is None else _sig(args.dot, prec)
            print(f"{k},{args.n},{_sig(args.beta, prec)},{dot},{_sig(b, prec)}")
        return 0
    if what == "g-plot":
        print("k,x,g")
        for k in ks:
            eta = theory.eta_k(k)
            xmax = args.xmax if args.xmax is not None else theory.mu_k(k) + 1.0
            for x in np.linspace(max(eta - 1.0, 0.0), xmax, args.points):
                print(f"{k},{_sig(x, prec)},{_sig(theory.g_k(x, k), prec)}")
        return 0
    raise AssertionError(what)


def _require(cond, msg):
    if not cond:
        print(f"spiked-lab: error: {msg}", file=sys.stderr)
        sys.exit(1)


def cmd_demo(args):
    algo = DEMO_ALGOS[args.algo]
    if algo in ("psd", "power_psd") and args.k != 3:
        print("spiked-lab: error: psd algorithms require --k 3", file=sys.stderr)
        return 1
    cfg = harness.ExperimentConfig(
        kind="comparison", k=args.k, n_list=[args.n], beta=[args.beta],
        algorithms=[algo], replicates=1, master_seed=args.seed,
        gamma=args.gamma, max_iter=args.max_iter, tol=args.tol,
        experiment_id="demo",
    )
    t0 = time.perf_counter()
    records = harness.run_experiment(cfg)
    wall = (time.perf_counter() - t0) * 1000
    rec = records[0]
    if rec.failed:
        print("spiked-lab: estimator failed on this instance", file=sys.stderr)
        return 2
    prec = args.precision
    print(f"algorithm:   {args.algo}")
    print(f"k={args.k} n={args.n} beta={_sig(args.beta, prec)} seed={args.seed}")
    print(f"correlation: {_sig(rec.correlation, prec)}")
    print(f"loss:        {_sig(rec.loss, prec)}")
    print(f"iterations:  {rec.iterations}")
    print(f"rayleigh:    {_sig(rec.rayleigh, prec)}")
    print(f"wall_ms:     {int(round(wall))}")
    return 0


def cmd_run(args):
    try:
        cfg = harness.ExperimentConfig.from_json(args.config)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as e:
        print(f"spiked-lab: bad config: {e}", file=sys.stderr)
        return 1
    if args.workers:
        cfg = harness.ExperimentConfig.from_dict(
            {**{f: getattr(cfg, f) for f in cfg.__dataclass_fields__},
             "workers": args.workers})
    out = args.out or cfg.output
    _require(out is not None, "no output path (config 'output' or --out)")
    try:
        records = harness.run_experiment(cfg)
        harness.write_records_csv(records, out)
        if args.summary:
            harness.write_summary_json(cfg, records, args.summary)
    except Exception as e:
        print(f"spiked-lab: run failed: {e}", file=sys.stderr)
        return 2
    failures = sum(1 for r in records if r.failed)
    print(f"wrote {len(records)} records to {out} ({failures} failures)")
    return 0


def cmd_aggregate(args):
    try:
        records = harness.read_records_csv(args.infile)
        aggs = harness.aggregate(records)
        harness.write_aggregates_csv(aggs, args.outfile)
    except (OSError, ValueError) as e:
        print(f"spiked-lab: aggregate failed: {e}", file=sys.stderr)
        return 2
    print(f"wrote {len(aggs)} aggregate rows to {args.outfile}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "theory":
        code = cmd_theory(args)
    elif args.command == "demo":
        code = cmd_demo(args)
    elif args.command == "run":
        code = cmd_run(args)
    else:
        code = cmd_aggregate(args)
    sys.exit(code)


if __name__ == "__main__":
    main()

"""Command-line interface: plan / run / grid / verify / analyze."""

import argparse
import sys

from . import harness, planner, verify


def _add_plan(sub):
    p = sub.add_parser("plan", help="print bound values and optimal batch sizes")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--F0", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--C", type=float, default=None, help="gradient-computation budget")
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--B", type=float, default=None)


def _add_common_out(p):
    p.add_argument("--out", default=None, help="output path (default: stdout name results.<fmt>)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")


def build_parser():
    parser = argparse.ArgumentParser(prog="byzbatch")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_plan(sub)

    run = sub.add_parser("run", help="execute a single run config (JSON)")
    run.add_argument("config")
    _add_common_out(run)

    grid = sub.add_parser("grid", help="execute a grid config (JSON with a sweep section)")
    grid.add_argument("config")
    grid.add_argument("--parallelism", type=int, default=1)
    _add_common_out(grid)

    sub.add_parser("verify", help="run the built-in oracle/property checks")

    analyze = sub.add_parser("analyze", help="best batch size per delta from a results CSV/JSON")
    analyze.add_argument("results")
    return parser


def cmd_plan(args) -> int:
    p = planner.BoundParams(L=args.L, sigma=args.sigma, F0=args.F0, c=args.c,
                            delta=args.delta, m=args.m, C=args.C, T=args.T, B=args.B)
    if p.C is None and (p.T is None or p.B is None):
        print("plan: provide --C, or both --T and --B", file=sys.stderr)
        return 2
    if p.C is None:
        p.C = p.T * p.B * p.m * (1 - p.delta)
    print(f"budget C = {p.C:.6g}")
    bstar, u_at, interior = planner.optimal_batch_byzsgdm(p)
    if interior:
        bint = planner.integer_batch(bstar, p)
        print(f"momentum variant:   B* = {bstar:.6g}  integer B = {bint}  U(B*) = {u_at:.6g}")
    else:
        print("momentum variant:   no interior optimum at delta=0; "
              "choose B by systems constraints (bound is increasing in B)")
    btil, bound_c = planner.optimal_batch_byzsgdnm(p)
    print(f"normalized variant: B~* = {btil:.6g}  bound at B~* = {bound_c:.6g}")
    if p.T is not None and p.B is not None:
        eta_m, beta_m = planner.hyperparams_byzsgdm(p)
        alpha, eta_n = planner.hyperparams_byzsgdnm(p.T, p.B, p)
        print(f"at (T={p.T}, B={p.B:g}):")
        print(f"  momentum variant:   eta = {eta_m:.6g}  beta = {beta_m:.6g}  "
              f"bound = {planner.bound_byzsgdm_U(p.B, p):.6g}")
        print(f"  normalized variant: eta = {eta_n:.6g}  beta = {1 - alpha:.6g}  "
              f"bound = {planner.bound_byzsgdnm(p.T, p.B, p):.6g}")
    return 0


def _emit(rows, args) -> int:
    out = args.out or f"results.{args.format}"
    harness.emit_results(rows, args.format, out)
    failures = [r for r in rows if r.error]
    print(f"wrote {len(rows)} row(s) to {out}" +
          (f" ({len(failures)} failed)" if failures else ""))
    return 1 if failures else 0


def cmd_run(args) -> int:
    cfg = harness.parse_config(args.config)
    if isinstance(cfg, harness.GridSpec):
        print("run: config contains a sweep section; use the grid command",
              file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = harness.replace(cfg, seed=args.seed)
    return _emit([harness.run_single(cfg)], args)


def cmd_grid(args) -> int:
    cfg = harness.parse_config(args.config)
    if not isinstance(cfg, harness.GridSpec):
        cfg = harness.GridSpec(base=cfg)
    if args.seed is not None:
        cfg.base = harness.replace(cfg.base, seed=args.seed)
    return _emit(harness.run_grid(cfg, parallelism=args.parallelism), args)


def cmd_analyze(args) -> int:
    rows = harness.load_results(args.results)
    curve = harness.best_batch_curve(rows)
    for key, batch in sorted(curve.items()):
        *group, delta = key
        label = " ".join(str(g) for g in group if g is not None)
        print(f"{label or 'all'}  delta={delta:g}  best B = {batch}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plan":
            return cmd_plan(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "grid":
            return cmd_grid(args)
        if args.command == "verify":
            return 0 if verify.run_all() else 1
        return cmd_analyze(args)
    except (harness.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Batch front end: ``bnlab <subcommand> ...``.

Data goes to files named by flags; stdout carries short summaries only.
Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import config as cfgmod
from .errors import NumericalError


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


# ---------------------------------------------------------------- commands

def cmd_spectral(args, cfg) -> int:
    from . import spectral

    nu = spectral.order(args.dim)
    mus = [spectral.mu(args.dim, h) for h in range(1, args.count + 1)]
    if args.out:
        _write_csv(args.out, ["h", "j_nu_h", "mu_h"],
                   [[h, math.sqrt(mu), mu] for h, mu in enumerate(mus, 1)])
    if args.samples_out:
        r = np.linspace(0.0, 1.0, args.samples)
        cols = [spectral.psi(args.dim, h, r) for h in range(1, args.count + 1)]
        _write_csv(args.samples_out, ["r"] + [f"psi{h}" for h in range(1, args.count + 1)],
                   zip(r, *cols))
    print(f"N={args.dim} nu={nu:g}")
    for h, mu in enumerate(mus, 1):
        print(f"mu_{h} = {mu:.12g}")
    return 0


def _grid(args, cfg):
    from .branch import default_a_grid

    a_min = cfg.a_min if args.a_min is None else args.a_min
    a_max = cfg.a_max[str(args.dim)] if args.a_max is None else args.a_max
    per = cfg.per_decade if args.per_decade is None else args.per_decade
    if not 0 < a_min < a_max:
        raise argparse.ArgumentTypeError("need 0 < a-min < a-max")
    return default_a_grid(args.dim, a_min, a_max, per)


def _sweep(args, cfg):
    from .branch import sweep

    return sweep(args.dim, args.zones, _grid(args, cfg), jobs=args.jobs, tol=cfg.tol(args.dim))


def cmd_branch(args, cfg) -> int:
    t0 = time.perf_counter()
    table = _sweep(args, cfg)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            table.to_csv(fh)
    lam = table.column("lam")
    print(f"N={args.dim} m={args.zones}: {len(table)} points, {len(table.failures)} failures, "
          f"{time.perf_counter() - t0:.1f} s")
    if len(table):
        print(f"lambda range [{lam.min():.10g}, {lam.max():.10g}], last {lam[-1]:.12g}")
    for a, name, msg in table.failures[:5]:
        print(f"  a={a:.6g}: {name}: {msg}")
    return 0


def cmd_critical(args, cfg) -> int:
    from .critical import lambda_bar

    data = lambda_bar(args.dim, args.zones, tol=cfg.critical_tol)
    print(f"lambda_bar = {data.lambda_bar:.6f}")
    print(f"r_bar = {data.r_bar:.6f}")
    if args.dim == 6 and args.out:
        prof = data.limit_profile
        r = np.linspace(0.0, 1.0, args.samples)
        u, up = prof.state(r)
        _write_csv(args.out, ["r", "u", "du"], zip(r, u, up))
    return 0


def cmd_v0(args, cfg) -> int:
    from .critical import lambda_bar
    from .linear6 import predict_sign, solve_v0

    data = lambda_bar(6, args.zones, tol=cfg.critical_tol)
    lin = solve_v0(data, tol=cfg.critical_tol)
    sel = lin.sign_selector
    v0 = -lin.v0_bar_0
    out = {
        "lambda_bar": data.lambda_bar,
        "v0_bar_0": lin.v0_bar_0,
        "one_minus_2_v0_bar_0": sel,
        "one_plus_2_v0_0": 1 + 2 * v0,
        "nondegeneracy_margin": lin.nondegeneracy_margin,
        "predicted_side": predict_sign(lin),
    }
    for k, v in out.items():
        print(f"{k} = {v:.12g}" if isinstance(v, float) else f"{k} = {v}")
    if args.out:
        _write_json(args.out, out)
    return 0


def cmd_ansatz(args, cfg) -> int:
    from .ansatz6 import reduced_energy_check
    from .critical import lambda_bar
    from .linear6 import solve_v0

    data = lambda_bar(6, args.zones, tol=cfg.critical_tol)
    lin = solve_v0(data, tol=cfg.critical_tol)
    res = reduced_energy_check(data, lin, args.eps, args.d_grid, d_ref=args.d_ref,
                               with_residual=not args.no_residual)
    if args.out:
        _write_csv(args.out, ["d", "J", "E", "dUpsilon", "residual_norm"],
                   [[r["d"], r["J"], r["E"], r["dUpsilon"], r["residual_norm"]]
                    for r in res["rows"]])
    worst = max(r["rel_err"] for r in res["rows"])
    print(f"eps = {args.eps:g}, d_ref = {res['d_ref']:.6g}, d0 = {res['d0']:.6g}")
    print(f"max relative error of E against reduced energy: {worst:.3g}")
    print(f"argmax E over grid: d = {res['d_star']:.6g}")
    return 0


def cmd_verify(args, cfg) -> int:
    from .verify import all_passed, tail_arrays, verify_theorem

    N, m = args.dim, args.zones
    table = _sweep(args, cfg)
    kw = {}
    if N == 6:
        from .critical import lambda_bar
        from .linear6 import solve_v0

        kw["critical"] = lambda_bar(6, m, tol=cfg.critical_tol)
        kw["linearized"] = solve_v0(kw["critical"], tol=cfg.critical_tol)
    rows = verify_theorem(N, m, table, window=cfg.window(N), tolerances=cfg.tolerances(), **kw)
    if args.report:
        _write_json(args.report, {"N": N, "m": m, "rows": rows, "pass": all_passed(rows)})
    if args.tail_csv:
        lb = rows[0]["predicted"] if N == 6 else None
        if lb is None:
            from .verify import theorem_constant
            lb = theorem_constant("lambda_bar", N, m)
        delta, sup = tail_arrays(table, "sup_norm", lb, cfg.window(N))
        _, r = tail_arrays(table, "r_lambda", lb, cfg.window(N))
        _write_csv(args.tail_csv, ["lambda_minus_bar", "sup_norm", "r_lambda"], zip(delta, sup, r))
    for row in rows:
        mark = "PASS" if row["pass"] else "FAIL"
        print(f"{mark} {row['display_id']}: fitted {_short(row['fitted'])} "
              f"predicted {_short(row['predicted'])} tol {row['tolerance']}")
    print(f"{sum(r['pass'] for r in rows)}/{len(rows)} rows pass")
    return 0


def _short(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def cmd_report(args, cfg) -> int:
    rows, sources = [], []
    for path in args.inputs:
        with open(path) as fh:
            doc = json.load(fh)
        sources.append(path)
        for row in doc.get("rows", []):
            rows.append({**row, "source": path})
    summary = {
        "sources": sources,
        "rows": rows,
        "n_pass": sum(bool(r.get("pass")) for r in rows),
        "n_rows": len(rows),
    }
    if args.out:
        _write_json(args.out, summary)
    print(f"{summary['n_pass']}/{summary['n_rows']} rows pass across {len(sources)} reports")
    return 0


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bnlab", description="Numerical lab for nodal radial Brezis-Nirenberg solutions.")
    p.add_argument("--config", help="JSON config file (overridden by $BN_CONFIG)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def dim(sp, choices=(3, 4, 5, 6)):
        sp.add_argument("--dim", type=int, required=True, choices=choices)

    def zones(sp):
        sp.add_argument("--zones", type=int, required=True, choices=range(2, 9), metavar="M")

    def sweep_flags(sp):
        sp.add_argument("--a-min", type=float)
        sp.add_argument("--a-max", type=float)
        sp.add_argument("--per-decade", type=int)
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("spectral", help="radial eigenvalues and eigenfunction samples")
    dim(sp)
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--out", help="CSV of mu_h")
    sp.add_argument("--samples-out", help="CSV of psi_h samples")
    sp.set_defaults(func=cmd_spectral)

    sp = sub.add_parser("branch", help="sweep central values along a nodal branch")
    dim(sp)
    zones(sp)
    sweep_flags(sp)
    sp.add_argument("--out", help="branch CSV")
    sp.set_defaults(func=cmd_branch)

    sp = sub.add_parser("critical", help="concentration value and limit profile")
    dim(sp)
    zones(sp)
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--out", help="CSV of limit-profile samples (N=6)")
    sp.set_defaults(func=cmd_critical)

    sp = sub.add_parser("v0", help="linearized solve at the N=6 limit profile")
    zones(sp)
    sp.add_argument("--out", help="JSON summary")
    sp.set_defaults(func=cmd_v0)

    sp = sub.add_parser("ansatz", help="N=6 ansatz energies and residuals")
    zones(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--d-grid", type=_floats, required=True, help="comma or space separated")
    sp.add_argument("--d-ref", type=float)
    sp.add_argument("--no-residual", action="store_true")
    sp.add_argument("--out", help="CSV of d, J, E, dUpsilon, residual_norm")
    sp.set_defaults(func=cmd_ansatz)

    sp = sub.add_parser("verify", help="fit a branch tail against the closed-form laws")
    dim(sp)
    zones(sp)
    sweep_flags(sp)
    sp.add_argument("--report", help="JSON report")
    sp.add_argument("--tail-csv", help="CSV of the fitted tail")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="aggregate earlier JSON reports")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--out", help="aggregated JSON")
    sp.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = cfgmod.load(args.config)
    except (cfgmod.ConfigError, OSError) as exc:
        print(f"bnlab: config: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args, cfg)
    except argparse.ArgumentTypeError as exc:
        print(f"bnlab: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"bnlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"bnlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())

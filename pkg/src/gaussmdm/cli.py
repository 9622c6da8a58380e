"""Command-line front end: trade-off curves, windows, certificates and simulated datasets.

Every subcommand writes CSV or JSON to stdout or, with ``--out``, atomically
to a file.  The exit status is 0 iff no row failed validation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Iterable, Optional, Sequence

from . import certificates as cert
from . import montecarlo as mc
from .models import optimal_electronic_gain
from .tradeoff import (
    DEFAULT_NU_CL_CAP,
    UNBOUNDED,
    TradeoffPoint,
    classify_point,
    curve_sample,
    optimal_curve_sample,
    window_for_gain_squared,
)

SEED_ENV = "GAUSSMDM_SEED"


class CliError(Exception):
    pass


def fmt_csv(v) -> str:
    if v is None or v is UNBOUNDED:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    if v is UNBOUNDED:
        return "inf"
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if hasattr(v, "item"):  # numpy scalar
        return v.item()
    return v


def render(rows: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([_json_value(r) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_csv(r.get(c)) for c in columns])
    return buf.getvalue()


def write_output(text: str, path: Optional[str]) -> None:
    """Write to stdout, or atomically to ``path`` via a temp file and rename."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-", suffix=os.path.basename(target))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_grid(text: str) -> list[float]:
    """``"a:b:n"`` for ``n`` evenly spaced values, or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            if n == 1:
                return [float(lo)]
            lo, hi = float(lo), float(hi)
            return [lo + (hi - lo) * k / (n - 1) for k in range(n - 1)] + [hi]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"bad grid {text!r}; use start:stop:count or a,b,c") from None


# -- subcommands --------------------------------------------------------------------------


def cmd_tradeoff(args) -> int:
    if not args.gain and not args.optimal:
        raise CliError("give at least one --gain or --optimal")
    rows = []
    for g in args.gain or []:
        if not (math.isfinite(g) and g > 0):
            raise CliError(f"invalid gain {g}; gains must be positive")
        for pt in curve_sample(g, args.points, args.nucl_cap):
            rows.append({"g_or_optimal": g, "nu_cl": pt.nu_cl, "nu_out": pt.nu_out})
    if args.optimal:
        for nu_cl, nu_out in optimal_curve_sample(args.points, args.nucl_cap):
            rows.append({"g_or_optimal": "optimal", "nu_cl": nu_cl, "nu_out": nu_out})
    write_output(render(rows, ("g_or_optimal", "nu_cl", "nu_out"), args.format), args.out)
    return 0


WINDOW_COLUMNS = ("g2", "nu_cl_min", "nu_cl_max", "nu_out_min", "nu_out_max")


def cmd_window(args) -> int:
    rows = []
    for g2 in args.gain_squared:
        if not (math.isfinite(g2) and g2 > 0):
            raise CliError(f"invalid gain squared {g2}")
        w = window_for_gain_squared(g2)
        rows.append(
            {
                "g2": g2,
                "nu_cl_min": w.nu_cl_min,
                "nu_cl_max": w.nu_cl_max,
                "nu_out_min": w.nu_out_min,
                "nu_out_max": w.nu_out_max,
            }
        )
    write_output(render(rows, WINDOW_COLUMNS, args.format), args.out)
    return 0


CERT_COLUMNS = (
    "g", "nu_cl", "a", "b", "min_eig_Z", "slackness_norm", "duality_gap", "valid",
    "status", "proof2_ok", "proof2_f", "proof2_r_argmin",
)


def certify_row(g: float, nu_cl: float) -> dict:
    try:
        z = cert.build_certificate(nu_cl, g)
    except ValueError as exc:
        return {"g": g, "nu_cl": nu_cl, "valid": False, "status": "rejected", "reason": str(exc)}
    rep = cert.verify_certificate(z, cert.n_tel(z.nu_cl, g), g)
    row = {
        "g": rep.g,
        "nu_cl": rep.nu_cl,
        "a": rep.a,
        "b": rep.b,
        "min_eig_Z": rep.min_eig_Z,
        "slackness_norm": rep.slackness_norm,
        "duality_gap": rep.duality_gap,
        "valid": rep.valid,
        "status": "certified" if rep.valid else "failed",
    }
    try:
        wa, wb = cert.proof2_weights(z.a, z.b)
        p2 = cert.proof2_minimum_check(wa, wb, g)
        row["proof2"] = p2.to_record()
        row.update(proof2_ok=p2.ok, proof2_f=p2.f_min, proof2_r_argmin=p2.r_argmin)
        row["proof2_agrees"] = abs(p2.f_min - rep.bound) < 1e-6
    except ValueError as exc:
        # unity gain classical endpoint: the squeezing diverges
        row["proof2"] = {"skipped": str(exc)}
    return row


def cmd_certify(args) -> int:
    if args.nucl is None and args.nucl_grid is None:
        raise CliError("give --nucl or --nucl-grid")
    g = args.gain
    if not (math.isfinite(g) and g > 0):
        raise CliError(f"invalid gain {g}")
    values = list(args.nucl or []) + (parse_grid(args.nucl_grid) if args.nucl_grid else [])
    rows = [certify_row(g, v) for v in values]
    write_output(render(rows, CERT_COLUMNS, args.format), args.out)
    return 0 if rows and all(r["valid"] for r in rows) else 1


def _default_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def cmd_simulate(args) -> int:
    seed = _default_seed(args.seed)
    alpha = complex(args.alpha_re, args.alpha_im)
    try:
        if args.scheme == "feedforward":
            if args.T is None:
                raise CliError("feed-forward needs --T")
            if args.optimal_gain:
                G, _ = optimal_electronic_gain(args.T)
            elif args.G is not None:
                G = args.G
            else:
                raise CliError("feed-forward needs --G or --optimal-gain")
            scheme = mc.Feedforward(args.T, G)
        else:
            if args.r is None or args.g is None:
                raise CliError("teleportation needs --r and --g")
            scheme = mc.Teleportation(args.r, args.g)
        cfg = mc.SimConfig(scheme, args.trials, seed, alpha, args.eta, args.eta_classical)
        res = mc.simulate(cfg)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    nu_cl, nu_out = mc.analytic_targets(scheme)
    cls = classify_point(TradeoffPoint(nu_cl, nu_out, scheme.gain))
    write_output(render([mc.result_row(res, cls)], mc.CSV_COLUMNS, args.format), args.out)
    return 0


def cmd_experiment(args) -> int:
    seed = _default_seed(args.seed)
    if args.mode == "fixed":
        if args.gain_squared is None or not args.gain_squared > 0:
            raise CliError("fixed mode needs a positive --gain-squared")
        mode = math.sqrt(args.gain_squared)
    else:
        mode = "optimal"
    T_list = parse_grid(args.tgrid)
    try:
        rows = mc.experiment_sweep(
            mode, T_list, args.trials, seed, args.eta,
            input_alpha=complex(args.alpha_re, args.alpha_im), eta_classical=args.eta_classical,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = mc.sweep_rows(rows, n_trials=args.trials, seed=seed, eta=args.eta)
    write_output(render(out, mc.CSV_COLUMNS, args.format), args.out)
    return 0 if all(r.status == "ok" for r in rows) else 1


# -- parser ---------------------------------------------------------------------------------


def _add_output(p, default_fmt="csv"):
    p.add_argument("--out", "-o", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_fmt)


def _add_sim_common(p):
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--eta", type=float, default=1.0, help="homodyne efficiency in (0, 1]")
    p.add_argument("--eta-classical", action="store_true", help="apply the efficiency to the classical arm too")
    p.add_argument("--alpha-re", type=float, default=mc.DEFAULT_ALPHA.real)
    p.add_argument("--alpha-im", type=float, default=mc.DEFAULT_ALPHA.imag)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussmdm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tradeoff", help="sample optimal trade-off curves")
    p.add_argument("--gain", type=float, action="append", help="fixed gain g (repeatable)")
    p.add_argument("--optimal", action="store_true", help="gain-optimized envelope nu_out = 1/nu_cl")
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--nucl-cap", type=float, default=DEFAULT_NU_CL_CAP, help="nu_cl range for unbounded curves")
    _add_output(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("window", help="optimality windows for given g^2")
    p.add_argument("--gain-squared", type=float, nargs="+", required=True)
    _add_output(p)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("certify", help="verify dual certificates along the trade-off")
    p.add_argument("--gain", type=float, required=True)
    p.add_argument("--nucl", type=float, action="append")
    p.add_argument("--nucl-grid", help="start:stop:count or comma list")
    _add_output(p, "json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="Monte Carlo run of one scheme")
    p.add_argument("--scheme", choices=("feedforward", "teleportation"), required=True)
    p.add_argument("--T", type=float)
    p.add_argument("--G", type=float)
    p.add_argument("--optimal-gain", action="store_true")
    p.add_argument("--r", type=float)
    p.add_argument("--g", type=float)
    _add_sim_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="feed-forward sweep over transmittances")
    p.add_argument("--mode", choices=("optimal", "fixed"), required=True)
    p.add_argument("--gain-squared", type=float)
    p.add_argument("--tgrid", default="0.2:0.8:7")
    _add_sim_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[Iterable[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    semiclab verify <suite> [--suite an|torus|2d|ansatz|spectrum|all]
    semiclab spectrum homoclinic --hbar 1e-5 --action 0 --mu-nu 1 --symmetric
    semiclab demo dilation --hbar 0.01 --samples 10000 --seed 0

Global flags: --out DIR, --tol-profile {strict,default}, --seed N, --config FILE.
A config file holds flat ``key=value`` lines; explicit flags override it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import suites


class ConfigError(ValueError):
    pass


def read_config(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _global_flags(p):
    p.add_argument("--out", type=Path, default=None, help="directory for JSON/CSV output")
    p.add_argument("--tol-profile", choices=sorted(suites.TOL_SCALE), default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--config", type=Path, default=argparse.SUPPRESS)


SUB_SUITES = {
    "frequency": ("an", "torus", "2d", "ansatz", "spectrum"),
    "sphere": suites.SPHERE_PARTS,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semiclab", description="semiclassical verification suites")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run a verification suite")
    _global_flags(verify)
    verify.add_argument("name", choices=sorted(suites.SUITES))
    verify.add_argument("--suite", default="all", choices=sorted({*SUB_SUITES["frequency"], *SUB_SUITES["sphere"], "all"}),
                        help="sub-suite of frequency or sphere")
    verify.add_argument("--which", default="all", choices=[*suites.STATISTICS_PARTS, "all"],
                        help="part of the statistics suite")
    verify.add_argument("--N", type=int, default=None, help="dimension for the sphere suite")
    verify.add_argument("--row", action="append",
                        help="table row for theorem1/theorem2, or a custom matrix 'a,b,c,d' (repeatable)")
    verify.add_argument("--t", type=float, default=None)
    verify.add_argument("--hbar", type=float, default=None)
    verify.add_argument("--M", type=int, default=None)

    spectrum = sub.add_parser("spectrum", help="homoclinic Bohr-Sommerfeld spectrum")
    _global_flags(spectrum)
    spectrum.add_argument("model", choices=["homoclinic"])
    spectrum.add_argument("--hbar", type=float, default=1e-5)
    spectrum.add_argument("--action", type=float, nargs="+", default=[0.0])
    spectrum.add_argument("--mu-nu", type=float, nargs="+", default=[1.0])
    spectrum.add_argument("--symmetric", action="store_true")
    spectrum.add_argument("--window", type=float, nargs=2, default=[-1.0, 1.0])

    demo = sub.add_parser("demo", help="demonstrations")
    _global_flags(demo)
    demo.add_argument("model", choices=["dilation"])
    demo.add_argument("--hbar", type=float, default=0.01)
    demo.add_argument("--t", type=float, default=None, help="defaults to -log(hbar)/2")
    demo.add_argument("--samples", type=int, default=10_000)
    return parser


def parse(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = getattr(args, "config", None)
    if config is not None:
        values = read_config(config)
        # reparse with the file values as defaults so explicit flags still win
        for action_group in (parser, *parser._subparsers._group_actions[0].choices.values()):
            known = {a.dest: a for a in action_group._actions}
            defaults = {}
            for key, raw in values.items():
                if key in known:
                    act = known[key]
                    conv = act.type or (lambda s: s)
                    defaults[key] = [conv(v) for v in raw.split()] if act.nargs in ("+", 2) else conv(raw)
            action_group.set_defaults(**defaults)
        args = parser.parse_args(argv)
    for key, default in (("tol_profile", "default"), ("seed", 0)):
        if not hasattr(args, key):
            setattr(args, key, default)
    return args


def _validate(args):
    hbar = getattr(args, "hbar", None)
    if hbar is not None and not hbar > 0:
        raise ConfigError("hbar must be positive")
    if args.command == "verify":
        if args.suite != "all" and args.suite not in SUB_SUITES.get(args.name, ()):
            raise ConfigError(f"--suite {args.suite} does not apply to {args.name}")
        if args.which != "all" and args.name != "statistics":
            raise ConfigError("--which applies to the statistics suite only")
        if args.N is not None and args.N < 2:
            raise ConfigError("N must be at least 2")
    if args.command == "spectrum":
        if any(m <= 0 for m in args.mu_nu):
            raise ConfigError("mu-nu must be positive")
        if not args.symmetric and (len(args.action) != 2 or len(args.mu_nu) != 2):
            raise ConfigError("non-symmetric data needs two actions and two mu-nu values")
        if args.window[0] >= args.window[1]:
            raise ConfigError("window must be increasing")
    if args.command == "demo" and args.samples < 1:
        raise ConfigError("samples must be positive")


def csv_text(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def run(args) -> tuple[dict, list]:
    _validate(args)
    scale = suites.TOL_SCALE[args.tol_profile]
    if args.command == "verify":
        kw = {"scale": scale, "seed": args.seed, "suite": args.suite, "which": args.which}
        for key in ("t", "hbar", "M", "N"):
            if getattr(args, key) is not None:
                kw[key] = getattr(args, key)
        if args.row:
            kw["rows"] = tuple(args.row)
        label = args.name
        records, rows = suites.SUITES[args.name](**kw)
    elif args.command == "spectrum":
        label = "spectrum-homoclinic"
        action = args.action[0] if args.symmetric else tuple(args.action)
        munu = args.mu_nu[0] if args.symmetric else tuple(args.mu_nu)
        records, rows = suites.run_spectrum(args.hbar, action, munu, tuple(args.window), args.symmetric)
    else:
        label = "demo-dilation"
        records, rows = suites.run_dilation(args.hbar, args.t, args.samples, args.seed)
    report = {
        "suite": label,
        "checks": records,
        "all_pass": all(r["pass"] for r in records if r["kind"] == "check"),
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "tol_profile": args.tol_profile, "seed": args.seed,
                        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
    }
    return report, rows


def main(argv=None) -> int:
    try:
        args = parse(argv)
        report, rows = run(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for r in report["checks"]:
        status = "PASS" if r["pass"] else ("FAIL" if r["kind"] == "check" else "DIFF")
        print(f"{status}  {r['name']}: {r['residual']:.3e} (tol {r['tolerance']:.1e})")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{report['suite']}.json").write_text(json.dumps(_jsonable(report), indent=2))
        if rows:
            (args.out / f"{report['suite']}.csv").write_text(csv_text(rows))
    elif rows and report["suite"].startswith("spectrum"):
        sys.stdout.write(csv_text(rows))
    return 0 if report["all_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())

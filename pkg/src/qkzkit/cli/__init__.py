"""Command-line front end.

    qkz-kit verify <suite> [--config P] [--samples N] [--seed S] [--tol X]
                           [--break-f quadratic] [--workers W]
                           [--out P] [--format json|csv]
    qkz-kit qkz solve --m M --trunc 5,10,20 [--config P]
    qkz-kit report --out P [--format json|csv] [--config P]

Exit codes: 0 all pass, 1 a verification failed, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import SUITE_NAMES, ConfigError, RunConfig, load_config
from .report import build_report, emit_report, exit_code, to_csv, to_json
from .suites import convergence_curve, run_case, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

__all__ = ["main", "RunConfig", "build_report", "emit_report", "run_case",
           "run_suite", "convergence_curve"]


def _common(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qkz-kit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run one verification suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    _common(v)
    v.add_argument("--tol", type=float)
    v.add_argument("--break-f", choices=("quadratic",), dest="break_f")

    q = sub.add_parser("qkz", help="qKZ solver utilities")
    qsub = q.add_subparsers(dest="qcmd", required=True)
    s = qsub.add_parser("solve", help="Jackson-sum convergence table")
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--trunc", default=None, help="comma-separated radii")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)

    r = sub.add_parser("report", help="run the configured suites")
    _common(r)
    return ap


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    for flag, attr in (("seed", "seed"), ("samples", "samples"),
                       ("workers", "workers"), ("out", "out"), ("format", "fmt")):
        val = getattr(args, flag, None)
        if val is not None:
            kw[attr] = val
    if getattr(args, "break_f", None):
        kw["break_f"] = args.break_f
    if getattr(args, "tol", None) is not None:
        kw["tolerances"] = {**cfg.tolerances, args.suite: args.tol}
    return replace(cfg, **kw).validate()


def _emit(report, cfg, out=sys.stdout) -> int:
    if cfg.out:
        emit_report(report, cfg.out, cfg.fmt)
    else:
        out.write(to_json(report) if cfg.fmt == "json" else to_csv(report))
    return exit_code(report)


def _solve(cfg: RunConfig, args, out) -> int:
    m = cfg.m_flips if args.m is None else args.m
    trunc = cfg.trunc
    if args.trunc:
        trunc = tuple(int(t) for t in args.trunc.split(",") if t.strip())
    cfg = replace(cfg, m_flips=m, trunc=trunc).validate()
    if cfg.positions:
        coords = [x - cfg.time if j > cfg.n_left else x + cfg.time
                  for j, x in enumerate(cfg.positions, start=1)]
    else:
        lo, hi = 0.0, cfg.length_L
        step = (hi - lo) / (cfg.n_total + 1)
        coords = [lo + step * (k + 0.5) for k in range(cfg.n_total)]
    rows = convergence_curve(cfg, coords)
    out.write(f"# N={cfg.n_total} N_L={cfg.n_left} M={m}\n")
    out.write("trunc,residual,tail\n")
    for lam, r, tail in rows:
        out.write(f"{lam},{r:.6e},{tail:.6e}\n")
    res = [r for _, r, _ in rows]
    return EXIT_OK if all(b < a for a, b in zip(res, res[1:])) else EXIT_FAIL


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.cmd == "qkz":
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            return _solve(cfg, args, out)
        cfg = _apply_flags(cfg, args)
        suites = (args.suite,) if args.cmd == "verify" else cfg.suites
        return _emit(build_report(cfg, suites), cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

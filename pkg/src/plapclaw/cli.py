"""Command line entry point: ``plap-claw simulate|verify|oracle``.

Exit codes: 0 success, 1 configuration error, 2 numerical blow-up,
3 a verified rate or oracle property failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .experiment import ConfigError, load_config, simulate, verify
from .solver import NumericalBlowUp

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_FAILED = 0, 1, 2, 3


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--out", default=default, help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker processes for independent runs")


def build_parser():
    parser = argparse.ArgumentParser(prog="plap-claw", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configured experiment")
    p_sim.add_argument("config")
    _common(p_sim, suppress=True)

    p_ver = sub.add_parser("verify", help="run experiments and judge the decay rates")
    p_ver.add_argument("config", nargs="+")
    _common(p_ver, suppress=True)

    p_or = sub.add_parser("oracle", help="run the built-in property suites")
    p_or.add_argument("--lemma", default=None,
                      help="suite id: 2.1, 2.2, 4.2, identity or barenblatt (default: all)")
    p_or.add_argument("--p", type=float, default=None)
    p_or.add_argument("--q", type=str, default=None)
    p_or.add_argument("--C", type=float, default=1.0, help="Barenblatt profile constant")
    _common(p_or, suppress=True)
    return parser


def _err(msg):
    print(f"plap-claw: error: {msg}", file=sys.stderr)


def cmd_simulate(config_path, out=None):
    try:
        cfg = load_config(config_path)
    except (ConfigError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    try:
        result = simulate(cfg, out)
    except NumericalBlowUp as exc:
        _err(str(exc))
        return EXIT_BLOWUP
    where = out if out is not None else cfg.out_dir
    print(f"wrote {where} ({len(result.rows)} snapshots, {result.steps} steps, "
          f"{result.wall_time:.1f}s)")
    for f in result.fits:
        if f["fitted_exponent"] is not None:
            print(f"  {f['column']:<16} fitted exponent {f['fitted_exponent']:+.4f}")
    return EXIT_OK


def _verify_one(config_path, out):
    try:
        cfg = load_config(config_path)
    except (ConfigError, ValueError) as exc:
        return config_path, EXIT_CONFIG, str(exc), []
    try:
        ok, rows, _ = verify(cfg, out)
    except ConfigError as exc:
        return config_path, EXIT_CONFIG, str(exc), []
    except NumericalBlowUp as exc:
        return config_path, EXIT_BLOWUP, str(exc), []
    return config_path, EXIT_OK if ok else EXIT_FAILED, "", rows


def cmd_verify(config_paths, out=None, threads=1):
    if isinstance(config_paths, (str, Path)):
        config_paths = [config_paths]
    outs = []
    for path in config_paths:
        if out is None:
            outs.append(None)
        elif len(config_paths) == 1:
            outs.append(out)
        else:
            outs.append(str(Path(out) / Path(path).stem))
    if threads > 1 and len(config_paths) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_verify_one, config_paths, outs))
    else:
        results = [_verify_one(c, o) for c, o in zip(config_paths, outs)]
    code = EXIT_OK
    print(f"{'theorem':<8} {'quantity':<16} {'q':>5} {'reference':>10} {'fitted':>10}  verdict")
    for path, status, msg, rows in results:
        if msg:
            _err(f"{path}: {msg}")
        for r in rows:
            fitted = "n/a" if r["fitted_exponent"] is None else f"{r['fitted_exponent']:+.4f}"
            print(f"{r['theorem']:<8} {r['quantity']:<16} {r['q']:>5} "
                  f"{r['reference_exponent']:>+10.4f} {fitted:>10}  "
                  f"{'pass' if r['pass'] else 'FAIL'}")
        code = max(code, status)
    return code


def cmd_oracle(lemma=None, p=None, q=None, C=1.0):
    from .checks import run_suites

    qv = None
    if q is not None:
        qv = math.inf if str(q).lower() == "inf" else float(q)
    try:
        checks = run_suites(lemma, p, qv, C)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    for c in checks:
        print(c.line())
    n_fail = sum(not c.passed for c in checks)
    print(f"{len(checks) - n_fail}/{len(checks)} properties hold")
    return EXIT_OK if n_fail == 0 else EXIT_FAILED


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out)
    if args.command == "verify":
        return cmd_verify(args.config, args.out, args.threads)
    return cmd_oracle(args.lemma, args.p, args.q, args.C)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 numerical failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .commands import cmd_analyze, cmd_simulate, cmd_synthesize, cmd_verify, strip_private
from .errors import NumericalError, ValidationError
from .scenario import load_preset, preset_names, resolve

log = logging.getLogger("leaderless")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


def _add_common(p):
    p.add_argument("--out-dir", type=Path, help="directory for CSV/JSON outputs")
    p.add_argument("--step", type=float, help="override the integrator step")
    p.add_argument("--t-end", type=float, help="override the time horizon (nondimensional)")
    p.add_argument("--tol", type=float, help="override the adaptive integrator abs/rel tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leaderless",
        description="Simulate and analyze leaderless resource consumption networks.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in [
        ("simulate", "integrate full and aggregate systems, write CSVs and a summary"),
        ("synthesize", "compute orientations that make the network leaderless"),
        ("analyze", "report aggregate constants, equilibrium and assumption flags"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario JSON file or bundled preset name")
        _add_common(p)

    p = sub.add_parser("verify", help="simulate and check reduction consistency and Lyapunov decrease")
    p.add_argument("scenario", nargs="?", help="scenario JSON file or bundled preset name")
    p.add_argument("--all-presets", action="store_true", help="verify every bundled preset")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers for --all-presets")
    _add_common(p)

    sub.add_parser("presets", help="list bundled presets")
    return parser


def _load(args):
    return resolve(args.scenario).with_overrides(step=args.step, t_end=args.t_end, tol=args.tol)


def _verify_preset(name, step, t_end, tol, out_dir):
    sc = load_preset(name).with_overrides(step=step, t_end=t_end, tol=tol)
    return cmd_verify(sc, out_dir / name if out_dir else None)


def _emit(doc):
    print(json.dumps(doc, indent=2))


def _run(args) -> int:
    if args.command == "presets":
        for name in preset_names():
            print(name)
        return EXIT_OK

    if args.command == "verify":
        if args.all_presets == (args.scenario is not None):
            raise ValidationError([("verify", "give either a scenario or --all-presets")])
        if args.all_presets:
            names = preset_names()
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(
                    pool.map(
                        _verify_preset,
                        names,
                        *[[v] * len(names) for v in (args.step, args.t_end, args.tol, args.out_dir)],
                    )
                )
            for res in results:
                status = "ok" if res["passed"] == res["expected"] else "MISMATCH"
                log.info("%s: passed=%s expected=%s -> %s", res["scenario"], res["passed"], res["expected"], status)
            _emit(results)
            return EXIT_OK if all(r["passed"] == r["expected"] for r in results) else EXIT_VERIFY
        res = cmd_verify(_load(args), args.out_dir)
        _emit(res)
        return EXIT_OK if res["passed"] else EXIT_VERIFY

    sc = _load(args)
    if args.command == "simulate":
        out_dir = args.out_dir or sc.output_dir or Path("out") / sc.name
        _emit(strip_private(cmd_simulate(sc, out_dir)))
    elif args.command == "synthesize":
        _emit(cmd_synthesize(sc, args.out_dir))
    elif args.command == "analyze":
        _emit(cmd_analyze(sc, args.out_dir))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: run scenarios, check suites, list builtins.

Exit codes: 0 all checks passed, 1 a check failed, 2 invalid config or
usage, 3 numerical failure (partial artifacts are flagged in the manifest).
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from .algebroids import NumericalBlowupError
from .scenarios import (ConfigError, builtin_catalog, normalize_config,
                        run_scenario, verification_battery)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="liemech",
        description="Algebroid mechanics scenarios: classical flows, quantum "
                    "dynamics in both pictures, and verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario config and write artifacts")
    run_p.add_argument("--config", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--out", default="runs", help="output directory (default: runs)")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--hbar", type=float, default=None, help="override hbar (default 1)")
    run_p.add_argument("--json", action="store_true", help="print the manifest as JSON")
    run_p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    check_p = sub.add_parser("check", help="run checks only (no trajectory artifacts)")
    check_p.add_argument("--config", default=None,
                         help="scenario JSON to check; omit for the default battery")
    check_p.add_argument("--out", default=None, help="directory for check artifacts")
    check_p.add_argument("--seed", type=int, default=None)
    check_p.add_argument("--hbar", type=float, default=None)
    check_p.add_argument("--json", action="store_true")

    list_p = sub.add_parser("list", help="list builtin scenarios")
    list_p.add_argument("--json", action="store_true",
                        help="machine-readable catalog: [{name, kind, dims}]")
    return parser


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from None
    return normalize_config(doc)


def _print_checks(manifest_dict, stream=sys.stdout):
    for name, result in sorted(manifest_dict["checks"].items()):
        status = "PASS" if result["passed"] else "FAIL"
        print(f"check {name}: {status} (value {result['value']:.3e}, "
              f"tolerance {result['tolerance']:.3e})", file=stream)
    overall = "PASS" if manifest_dict["passed"] else "FAIL"
    print(f"scenario {manifest_dict['scenario']}: {overall}", file=stream)


def _cmd_run(args):
    doc = _load_config(args.config)
    out_dir = Path(args.out)
    manifest = run_scenario(doc, out_dir, seed=args.seed, hbar=args.hbar,
                            figures=not args.no_figures)
    payload = manifest.to_dict()
    if args.json:
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        _print_checks(payload)
        print(f"artifacts in {out_dir}: {', '.join(payload['artifacts'])}")
    return 0 if manifest.passed else 1


def _cmd_check(args):
    if args.config is not None:
        doc = _load_config(args.config)
        if args.out is not None:
            out_dir = Path(args.out)
            manifest = run_scenario(doc, out_dir, seed=args.seed, hbar=args.hbar,
                                    figures=False)
        else:
            with tempfile.TemporaryDirectory() as tmp:
                manifest = run_scenario(doc, tmp, seed=args.seed, hbar=args.hbar,
                                        figures=False)
        payload = manifest.to_dict()
        if args.json:
            print(json.dumps(payload, indent=1, sort_keys=True))
        else:
            _print_checks(payload)
        return 0 if manifest.passed else 1

    seed = 0 if args.seed is None else args.seed
    hbar = 1.0 if args.hbar is None else args.hbar
    results = verification_battery(seed=seed, hbar=hbar)
    if args.json:
        print(json.dumps(results, indent=1, sort_keys=True))
    else:
        for name, result in sorted(results.items()):
            if not isinstance(result, dict):
                continue
            status = "PASS" if result["passed"] else "FAIL"
            print(f"check {name}: {status} (value {result['value']:.3e}, "
                  f"tolerance {result['tolerance']:.3e})")
        print(f"battery: {'PASS' if results['passed'] else 'FAIL'}")
    return 0 if results["passed"] else 1


def _cmd_list(args):
    rows = builtin_catalog()
    if args.json:
        print(json.dumps([{"name": r["name"], "kind": r["kind"], "dims": r["dims"]}
                          for r in rows]))
        return 0
    widths = [max(len(r["name"]) for r in rows), max(len(r["kind"]) for r in rows),
              max(len(r["dims"]) for r in rows)]
    print(f"{'name':<{widths[0]}}  {'kind':<{widths[1]}}  {'dims':<{widths[2]}}  description")
    for r in rows:
        print(f"{r['name']:<{widths[0]}}  {r['kind']:<{widths[1]}}  "
              f"{r['dims']:<{widths[2]}}  {r['description']}")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_list(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NumericalBlowupError as err:
        when = f" at t = {err.time:.6g}" if err.time is not None else ""
        print(f"numerical failure{when}: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

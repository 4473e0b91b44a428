"""Command-line front end.

Exit codes: 0 success, 1 scenario failure (validation, divergence, bad
metrics), 2 usage error, 3 connection error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CobotSimError, DivergenceError, ScenarioError
from .runner import export_csv, export_json, load_log, run_scenario, save_log
from .scenario import load_scenario, parse_scenario
from .scenario import resolve_scenario_path as scenario_path
from .session import replay

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_USAGE = 2
EXIT_CONNECTION = 3


def resolve_scenario_path(name: str) -> Path:
    """Plain paths win; bare names fall back to the shipped fixtures."""
    return scenario_path(name)


def _load(name: str):
    return load_scenario(resolve_scenario_path(name))


def cmd_validate(args) -> int:
    try:
        path = resolve_scenario_path(args.file)
    except FileNotFoundError:
        print(f"no such scenario file: {args.file}", file=sys.stderr)
        return EXIT_USAGE
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        print(f"$: not valid JSON: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        scenario = parse_scenario(doc)
    except ScenarioError as exc:
        for finding_path, message in exc.findings:
            print(f"{finding_path}: {message}", file=sys.stderr)
        return EXIT_SCENARIO
    print(f"ok: {scenario.name} ({len(scenario.timeline)} events, {scenario.duration:g} s)")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        scenario = _load(args.file)
    except FileNotFoundError:
        print(f"no such scenario file: {args.file}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SCENARIO
    if args.seed is not None:
        from dataclasses import replace

        scenario = replace(scenario, seed=args.seed)

    if args.connect:
        return _run_connected(scenario, args)

    try:
        result = run_scenario(scenario)
    except CobotSimError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    return _emit(result.report, result.log_records, scenario, args)


def _run_connected(scenario, args) -> int:
    from .client import run_remote

    try:
        report, records = run_remote(args.connect, scenario)
    except ConnectionError as exc:
        print(f"connection failed: {exc}", file=sys.stderr)
        return EXIT_CONNECTION
    return _emit(report, records, scenario, args)


def _emit(report, records, scenario, args) -> int:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        save_log(out / "log.ndjson", records, scenario)
        if args.format == "csv":
            export_csv(report, out / "report.csv")
            print(f"wrote {out / 'report.csv'} and {out / 'log.ndjson'}")
        else:
            export_json(report, out / "report.json")
            print(f"wrote {out / 'report.json'} and {out / 'log.ndjson'}")
    else:
        print(json.dumps(report.to_dict(), indent=2, allow_nan=False))
    return EXIT_OK


def cmd_replay(args) -> int:
    log_path = Path(args.log)
    if not log_path.exists():
        print(f"no such log file: {args.log}", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario = _load(args.file)
    except FileNotFoundError:
        print(f"no such scenario file: {args.file}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SCENARIO
    try:
        records = load_log(log_path)
        hashes = replay(records, scenario)
    except DivergenceError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SCENARIO
    except (ScenarioError, CobotSimError) as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    final = hashes[-1] if hashes else "(empty log)"
    print(f"replay ok: {len(hashes)} ticks, final hash {final}")
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        import uvicorn

        from .server import build_app
    except ImportError as exc:
        print(f"server dependencies unavailable: {exc}", file=sys.stderr)
        return EXIT_CONNECTION
    console = Path(args.console) if args.console else None
    if console is not None and not console.is_dir():
        print(f"console directory not found: {console}", file=sys.stderr)
        return EXIT_USAGE
    app = build_app(console_dir=console)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobotsim",
        description="Shared-autonomy robot workcell simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file, listing every problem")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="execute a scenario and report metrics")
    p.add_argument("file")
    p.add_argument("--connect", metavar="ADDR", help="drive a live server instead of in-process")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", metavar="DIR", help="write report and session log here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="re-execute a session log and verify hashes")
    p.add_argument("log")
    p.add_argument("file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="host the live session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--console", metavar="DIR", help="serve an operator console at /console")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

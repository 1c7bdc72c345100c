"""Command-line front end.

Subcommands: run, compare, list-scenarios, validate.  Exit codes: 0 on
success, 1 on runtime or numerical failure, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import config
from .errors import ConfigError, ProfilerSimError
from .scenario import (compare_strategies, format_comparison, format_summary,
                       format_trace, run)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="profilersim",
        description="Deterministic simulator of a buoyancy-driven ocean profiler "
                    "with adaptive cruise/measure speed control.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
        p.add_argument("--scenario", default="constant_density_dive",
                       help="built-in scenario name or path to a TOML config "
                            "(default: %(default)s)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config key (dotted path, repeatable)")
        p.add_argument("--seed", type=int, default=None, help="sensor noise RNG seed")
        if with_out:
            p.add_argument("--out", default=None, metavar="DIR",
                           help="output directory (default: $PROFILERSIM_OUT or '.')")

    p_run = sub.add_parser("run", help="simulate a scenario and write trace + summary")
    add_common(p_run)
    p_run.add_argument("--emit-plot", action="store_true",
                       help="also write a gnuplot script and a rendered PNG figure")

    p_cmp = sub.add_parser("compare",
                           help="run all-measuring / all-cruising / adaptive and compare")
    add_common(p_cmp)

    p_val = sub.add_parser("validate", help="parse a config and print the resolved TOML")
    add_common(p_val, with_out=False)

    sub.add_parser("list-scenarios", help="list built-in scenarios")
    return parser


def _output_dir(arg: str | None) -> Path:
    out = arg or os.environ.get("PROFILERSIM_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args: argparse.Namespace) -> int:
    scenario, resolved = config.load_scenario(args.scenario, args.overrides, args.seed)
    out_dir = _output_dir(args.out)
    result = run(scenario)

    trace_path = out_dir / f"{scenario.name}.trace.csv"
    trace_path.write_text(format_trace(result.records))
    (out_dir / f"{scenario.name}.summary.txt").write_text(format_summary(result.summary))
    (out_dir / f"{scenario.name}.summary.json").write_text(
        json.dumps(result.summary, indent=2) + "\n")
    (out_dir / f"{scenario.name}.resolved.toml").write_text(config.dump_toml(resolved))

    if args.emit_plot:
        from . import plotting  # matplotlib import deferred to the plot path
        plotting.write_gnuplot_script(trace_path.name,
                                      out_dir / f"{scenario.name}.plot.gp",
                                      scenario.name,
                                      scenario.supervisor.trigger_threshold)
        plotting.render_figure(result, out_dir / f"{scenario.name}.png")

    print(f"{scenario.name}: {result.summary['samples']} samples, "
          f"stop={result.stop_reason} at t={result.summary['t_final_s']:.9g} s, "
          f"z={result.summary['z_final_m']:.9g} m -> {trace_path}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    scenario, _resolved = config.load_scenario(args.scenario, args.overrides, args.seed)
    reports, _results = compare_strategies(scenario)
    table = format_comparison(reports)
    print(table)
    if args.out is not None:
        out_dir = _output_dir(args.out)
        (out_dir / f"{scenario.name}.compare.txt").write_text(table + "\n")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    _scenario, resolved = config.load_scenario(args.scenario, args.overrides, args.seed)
    sys.stdout.write(config.dump_toml(resolved))
    return EXIT_OK


def cmd_list(_args: argparse.Namespace) -> int:
    for name in config.BUILTIN_SCENARIOS:
        print(f"{name:<24} {config.SCENARIO_DESCRIPTIONS.get(name, '')}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "compare": cmd_compare,
                "validate": cmd_validate, "list-scenarios": cmd_list}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProfilerSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

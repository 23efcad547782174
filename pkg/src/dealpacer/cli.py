"""Operator entry point: solve, policy, simulate, serve, decide subcommands.

Exit codes: 0 success, 2 config error, 3 missing artifact, 4 invariant
violation detected after a solve.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .policy import FundState, decide, export_surface, write_surface_csv
from .simulator import run_study, write_summary_csv, write_trials_csv
from .solver import (
    InvariantViolation,
    load_value_table,
    save_value_table,
    solve,
    write_value_table_csv,
)
from .arrivals import write_time_grid_csv
from .stochastics import DealSample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_INVARIANT = 4

TABLE_FILENAME = "value_table.json"


class MissingArtifactError(FileNotFoundError):
    pass


def _atomic(write_fn, path) -> None:
    """Run a writer against a temp file, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _get_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "trials", None) is not None:
        config.n_trials = args.trials
    if getattr(args, "out", None):
        config.out_dir = args.out
    config.validate()
    return config


def _echo_config(config: RunConfig) -> dict:
    # out_dir is where the run lands, not what it computes; keep it out of
    # the report so identical configs give identical report bytes
    echo = {
        "config": {k: v for k, v in vars(config).items() if k != "out_dir"},
        "derived": config.derived(),
    }
    for section, entries in echo.items():
        print(f"[{section}]")
        for key, value in entries.items():
            print(f"  {key} = {value}")
    return echo


def _table_path(args, config: RunConfig) -> str:
    return args.table or os.path.join(config.out_dir, TABLE_FILENAME)


def _load_table(path):
    if not os.path.exists(path):
        raise MissingArtifactError(f"value-table artifact not found: {path}")
    return load_value_table(path)


def cmd_solve(args) -> int:
    config = _get_config(args)
    echo = _echo_config(config)
    os.makedirs(config.out_dir, exist_ok=True)
    result = solve(config.solver_config())
    table = result.table
    table_path = os.path.join(config.out_dir, TABLE_FILENAME)
    _atomic(lambda p: save_value_table(table, p), table_path)
    _atomic(lambda p: write_time_grid_csv(table.time_grid, p),
            os.path.join(config.out_dir, "time_grid.csv"))
    _atomic(lambda p: write_value_table_csv(table, p),
            os.path.join(config.out_dir, "value_table.csv"))
    report = {
        **echo,
        "n_time_steps": result.n_time_steps,
        "n_capital_points": result.n_capital_points,
        "n_qmc": result.n_qmc,
        "total_evaluations": result.total_evaluations,
        "value_at_full_capital_t0": float(table.values[0, -1]),
    }
    _atomic(
        lambda p: open(p, "w").write(json.dumps(report, indent=2, default=str) + "\n"),
        os.path.join(config.out_dir, "solve_report.json"),
    )
    print(f"solved {result.n_time_steps} steps x {result.n_capital_points} capital points "
          f"x {result.n_qmc} samples in {result.wall_seconds:.2f}s")
    print(f"wrote {table_path}")
    return EXIT_OK


def cmd_policy(args) -> int:
    config = _get_config(args)
    table = _load_table(_table_path(args, config))
    fractions = [float(x) for x in args.fractions.split(",") if x.strip()]
    surface = export_surface(table, fractions, table.time_grid.times)
    os.makedirs(config.out_dir, exist_ok=True)
    out_path = os.path.join(config.out_dir, "threshold_surface.csv")
    _atomic(lambda p: write_surface_csv(surface, p), out_path)
    print(f"wrote {out_path} ({len(surface.rows)} rows)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _get_config(args)
    _echo_config(config)
    table = _load_table(_table_path(args, config))
    result = run_study(
        table,
        config.deal_model(),
        config.intensity(),
        n_trials=config.n_trials,
        base_seed=config.seed,
        workers=args.threads,
        irr_convention=config.irr_convention,
    )
    os.makedirs(config.out_dir, exist_ok=True)
    trials_path = os.path.join(config.out_dir, "trials.csv")
    summary_path = os.path.join(config.out_dir, "summary.csv")
    _atomic(lambda p: write_trials_csv(result, p), trials_path)
    _atomic(lambda p: write_summary_csv(result.summary, p), summary_path)
    s = result.summary
    def pct(x):
        return "n/a" if x is None else f"{100 * x:.2f}%"
    print(f"adp      mean irr {pct(s.adp.mean_irr)} over {s.adp.n_with_irr} trials")
    print(f"baseline mean irr {pct(s.baseline.mean_irr)} over {s.baseline.n_with_irr} trials")
    print(f"paired difference {pct(s.mean_irr_difference)} "
          f"(se {pct(s.se_irr_difference)}, n={s.n_paired})")
    print(f"wrote {trials_path}, {summary_path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _get_config(args)
    table = _load_table(_table_path(args, config))
    host, _, port = args.bind.rpartition(":")
    host = host or "127.0.0.1"
    static_dir = args.static if args.static and os.path.isdir(args.static) else None
    app = create_app(table, static_dir=static_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return EXIT_OK


def cmd_decide(args) -> int:
    config = _get_config(args)
    table = _load_table(_table_path(args, config))
    moic = (1.0 + args.irr) ** table.exit_years
    decision = decide(
        table,
        FundState(remaining_capital=args.f, time=args.t),
        DealSample(size=args.size, moic=moic),
    )
    print(json.dumps(decision.as_record()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dealpacer",
        description="Capital-deployment engine: solve, inspect, simulate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, table=False, sim=False):
        p.add_argument("--config", help="flat key = value config file (defaults if omitted)")
        p.add_argument("--out", help="output directory (overrides config out_dir)")
        if table:
            p.add_argument("--table", help="value-table artifact path "
                           f"(default <out>/{TABLE_FILENAME})")
        if sim:
            p.add_argument("--seed", type=int, help="override config seed")
            p.add_argument("--trials", type=int, help="override config n_trials")
            p.add_argument("--threads", type=int, default=1, help="parallel trial workers")

    p_solve = sub.add_parser("solve", help="solve the value table and write the artifact")
    common(p_solve)
    p_solve.set_defaults(fn=cmd_solve)

    p_policy = sub.add_parser("policy", help="export the required-IRR threshold surface")
    common(p_policy, table=True)
    p_policy.add_argument("--fractions", default="0.1,0.25,0.5",
                          help="deal sizes as fractions of the fund, comma-separated")
    p_policy.set_defaults(fn=cmd_policy)

    p_sim = sub.add_parser("simulate", help="paired Monte Carlo study vs the fixed hurdle")
    common(p_sim, table=True, sim=True)
    p_sim.set_defaults(fn=cmd_simulate)

    p_serve = sub.add_parser("serve", help="run the HTTP query service")
    common(p_serve, table=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    p_serve.add_argument("--static", help="directory with the web console build to serve")
    p_serve.set_defaults(fn=cmd_serve)

    p_decide = sub.add_parser("decide", help="one accept/reject query against the table")
    common(p_decide, table=True)
    p_decide.add_argument("--f", type=float, required=True, help="remaining capital")
    p_decide.add_argument("--t", type=float, required=True, help="elapsed time, years")
    p_decide.add_argument("--size", type=float, required=True, help="deal size")
    p_decide.add_argument("--irr", type=float, required=True, help="underwritten annual IRR")
    p_decide.set_defaults(fn=cmd_decide)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

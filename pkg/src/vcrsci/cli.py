"""Command-line entry point.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 when no requested node had enough data.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import InputError, VcrError
from .io import parse_canonical
from .model import DEFAULT_BASELINE, Level, Measure, Panel
from .report import (
    FORMATS,
    classification_grid,
    classify_table,
    indices_table,
    render,
    report_table,
    to_csv,
    trend_table,
)
from .validation import NOISE_KINDS, SyntheticSpec, coverage_experiment, power_curve

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NO_DATA = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _data_args(p: argparse.ArgumentParser, level_default: str):
    p.add_argument("input", help="canonical panel CSV")
    p.add_argument("--entity", help="focal entity (default: the only non-baseline entity)")
    p.add_argument("--baseline", default=DEFAULT_BASELINE, help="baseline entity name (default: World)")
    p.add_argument("--level", default=level_default, choices=[lv.value for lv in Level])
    p.add_argument("--citable", action="store_true",
                   help="use citable documents instead of all documents")
    p.add_argument("--format", default="text", choices=FORMATS)
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--metadata", action="store_true",
                   help="prefix text/markdown output with a timestamp comment line")
    p.add_argument("--config", help="key=value file supplying option values")


def _trend_args(p: argparse.ArgumentParser):
    p.add_argument("--project-to", type=float, dest="project_to",
                   help="target year (default: last covered year)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--model", default="linear", choices=["linear", "constant"])
    p.add_argument("--smoothing", default="annual", choices=["annual", "triennial"])
    p.add_argument("--anchor", default="end", choices=["end", "start"],
                   help="regressor for multi-year windows")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vcrsci", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a canonical panel file")
    p.add_argument("input")
    p.add_argument("--baseline", default=DEFAULT_BASELINE)
    p.add_argument("--config")

    p = sub.add_parser("indices", help="shares and VCR per node for one period")
    _data_args(p, "big_area")
    p.add_argument("--measure", default="documents", choices=[m.value for m in Measure])
    p.add_argument("--window", default="triennial", choices=["annual", "triennial"])
    p.add_argument("--period", help="YYYY or YYYY-YYYY (default: latest)")

    p = sub.add_parser("trend", help="fit trends and test VCR against 1")
    _data_args(p, "big_area")
    p.add_argument("--measure", default="documents", choices=[m.value for m in Measure])
    _trend_args(p)
    p.add_argument("--plot-data", dest="plot_data", help="write long-format band data CSV here")

    p = sub.add_parser("classify", help="combine documents and citations verdicts")
    _data_args(p, "area")
    _trend_args(p)

    p = sub.add_parser("report", help="per-discipline table across the whole taxonomy")
    _data_args(p, "discipline")
    _trend_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo coverage of the trend intervals")
    p.add_argument("--n", type=int, default=24, dest="n_periods")
    p.add_argument("--beta0", type=float, default=1.0)
    p.add_argument("--beta1", type=float, default=0.02)
    p.add_argument("--noise-sd", type=float, default=0.1, dest="noise_sd")
    p.add_argument("--noise", default="gaussian", choices=NOISE_KINDS)
    p.add_argument("--target", type=float, dest="target_year")
    p.add_argument("--first-year", type=int, default=1, dest="first_year")
    p.add_argument("--replications", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--power", help="comma-separated true target values for a power sweep")
    p.add_argument("--per-replication", dest="per_replication", help="write per-replication CSV here")
    p.add_argument("--config")
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for action in sub._actions:
            if action.dest in config and action.option_strings:
                value = config[action.dest]
                if isinstance(action, argparse._StoreTrueAction):
                    value = value.lower() in ("1", "true", "yes", "on")
                action.default = value
        args = parser.parse_args(argv)
        for action in sub._actions:
            if action.dest in config and action.type is not None and isinstance(getattr(args, action.dest), str):
                setattr(args, action.dest, action.type(getattr(args, action.dest)))
            if action.dest in config and action.choices and getattr(args, action.dest) not in action.choices:
                raise UsageError(f"config value {config[action.dest]!r} invalid for {action.dest}")
    return args


def _emit(text: str, args: argparse.Namespace, stdout) -> None:
    if getattr(args, "metadata", False) and args.format in ("text", "markdown"):
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        text = f"# vcrsci {__version__} {args.command} generated {stamp}\n" + text
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _load(args) -> Panel:
    return parse_canonical(args.input, baseline=args.baseline)


def _entity(panel: Panel, args) -> str:
    if args.entity:
        if args.entity not in panel.entities:
            raise UsageError(f"unknown entity {args.entity!r}; panel has {', '.join(panel.entities)}")
        return args.entity
    others = [e for e in panel.entities if e != panel.baseline_entity]
    if len(others) == 1:
        return others[0]
    if not others:
        return panel.baseline_entity
    raise UsageError(f"--entity is required; panel has {', '.join(others)}")


def _trend_kwargs(args) -> dict:
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must be in (0, 1)")
    return dict(target_year=args.project_to, alpha=args.alpha, model=args.model,
                smoothing=args.smoothing, anchor=args.anchor, citable=args.citable)


def _no_verdict(flags: str) -> bool:
    """Neither measure had enough periods for a verdict."""
    return "insufficient_data:documents" in flags and "insufficient_data:citations" in flags


def cmd_validate(args, stdout) -> int:
    panel = _load(args)
    stdout.write(
        f"{len(panel)} rows, {len(panel.entities)} entities, {len(panel.nodes_with_data())} nodes,"
        f" {len(panel.years)} years ({panel.coverage[0]}-{panel.coverage[1]})\n"
    )
    return EXIT_OK


def cmd_indices(args, stdout) -> int:
    panel = _load(args)
    try:
        rows = indices_table(panel, _entity(panel, args), args.measure, args.level, args.window,
                             args.period, args.citable)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cols = ["path", "period", "world_share_pct", "focal_share_pct", "vcr", "rsi", "flag"]
    _emit(render(rows, args.format, cols), args, stdout)
    return EXIT_NO_DATA if rows and all(r.vcr is None for r in rows) else EXIT_OK


def cmd_trend(args, stdout) -> int:
    panel = _load(args)
    kw = _trend_kwargs(args)
    rows, plot = trend_table(panel, _entity(panel, args), args.measure, args.level, **kw)
    cols = ["path", "n", "target_year", "projection", "ci_low", "ci_high", "p_value_vs_1",
            "stars", "significance", "flag"]
    _emit(render(rows, args.format, cols), args, stdout)
    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv(plot) if plot else "node,measure,period,year,vcr,fitted,ci_low,ci_high\n")
    return EXIT_NO_DATA if rows and all("insufficient_data" in r.flag for r in rows) else EXIT_OK


def cmd_classify(args, stdout) -> int:
    panel = _load(args)
    rows = classify_table(panel, _entity(panel, args), level=args.level, **_trend_kwargs(args))
    text = classification_grid(rows) if args.format == "text" else render(rows, args.format)
    _emit(text, args, stdout)
    return EXIT_NO_DATA if rows and all(_no_verdict(r.flags) for r in rows) else EXIT_OK


def cmd_report(args, stdout) -> int:
    panel = _load(args)
    kw = _trend_kwargs(args)
    kw.pop("model")
    rows = report_table(panel, _entity(panel, args), **kw)
    cols = ["big_area", "area", "discipline", "world_share_pct_docs", "vcr_trienio_docs",
            "vcr_regression_docs", "stars_docs", "world_share_pct_cites", "vcr_trienio_cites",
            "vcr_regression_cites", "stars_cites", "bucket"]
    _emit(render(rows, args.format, cols), args, stdout)
    return EXIT_NO_DATA if rows and all(_no_verdict(r.flags) for r in rows) else EXIT_OK


def cmd_simulate(args, stdout) -> int:
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    try:
        spec = SyntheticSpec(
            n_periods=args.n_periods, beta0=args.beta0, beta1=args.beta1, noise_sd=args.noise_sd,
            target_year=args.target_year, replications=args.replications, base_seed=args.seed,
            first_year=args.first_year, alpha=args.alpha, noise=args.noise,
        )
    except VcrError as exc:
        raise UsageError(str(exc)) from None
    result = coverage_experiment(spec, threads=args.threads)
    lines = [result.summary()]
    if args.power:
        grid = [float(v) for v in args.power.split(",") if v.strip()]
        for value, rate in power_curve(spec, grid, threads=args.threads):
            lines.append(f"power true_target={value:g} rejection_rate={rate:.4f}")
    stdout.write("\n".join(lines) + "\n")
    if args.per_replication:
        with open(args.per_replication, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv(list(result.replications)))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "indices": cmd_indices,
    "trend": cmd_trend,
    "classify": cmd_classify,
    "report": cmd_report,
    "simulate": cmd_simulate,
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except InputError as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except (VcrError, ValueError) as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

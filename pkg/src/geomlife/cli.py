"""Command-line interface: estimate, simulate, check, paths.

Machine-readable results go to stdout (or ``--output``); human-readable
summaries and diagnostics go to stderr.  Exit codes: 0 success, 1 input
error, 2 degenerate statistical result.  Numbers in machine output carry
12 significant digits.  A JSON file passed via ``--config`` supplies
defaults for any flag (command-line flags win).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import panel_io
from .estimator import NoRiskTimeError, SufficientStats, estimate, theta_hat
from .likelihood import grid_argmax
from .model import LatentUnit, StudyDesign, TruncationDist
from .paths import PATH_COLUMNS, build_paths
from .simulation import SimConfig, default_workers, mse_study, run_study

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_DEGENERATE = 2

STUDY_COLUMNS = [
    "n",
    "K",
    "theta0",
    "mse",
    "n_times_mse",
    "asymptotic_n_var",
    "coverage",
    "ks_distance",
    "degenerate_count",
]


def _fmt12(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""
        return format(value, ".12g")
    return str(value)


def _round12(value):
    """Round a float to 12 significant digits for JSON output."""
    if value is None or isinstance(value, (int, bool)):
        return value
    if not math.isfinite(value):
        return None
    return float(format(value, ".12g"))


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return _round12(float(obj))
    return obj


def _write_text(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _dump_json(obj, output: str | None) -> None:
    _write_text(json.dumps(_json_ready(obj), sort_keys=True, indent=2) + "\n", output)


def _dump_csv(rows: list[dict], columns: list[str], output: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt12(row.get(col)) for col in columns])
    _write_text(buf.getvalue(), output)


def _parse_tdist(value: str, G: int) -> TruncationDist:
    if value == "uniform":
        return TruncationDist.uniform(G)
    try:
        pmf = np.array([float(p) for p in value.split(",")])
    except ValueError:
        raise ValueError(f"--tdist must be 'uniform' or a comma-separated pmf, got {value!r}")
    if pmf.size != G:
        raise ValueError(f"--tdist pmf has {pmf.size} entries, expected G={G}")
    return TruncationDist(pmf)


def _require(args, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValueError("missing required option(s): " + ", ".join(f"--{n}" for n in missing))


# Rounding used only in the human-readable summary: the theta interval is
# displayed conservatively (outward), point estimates to nearest.
def _floor_to(value: float, decimals: int) -> float:
    scale = 10**decimals
    return math.floor(value * scale) / scale


def _ceil_to(value: float, decimals: int) -> float:
    scale = 10**decimals
    return math.ceil(value * scale) / scale


def _summarize_estimate(result) -> str:
    lo, hi = result.ci
    lines = [
        f"theta_hat = {result.theta_hat:.4f}  (se {result.se:.3g})",
        f"{result.level:.0%} CI for theta: [{_floor_to(lo, 4):.4f}, {_ceil_to(hi, 4):.4f}]",
    ]
    if math.isfinite(result.life_expectancy):
        le_lo, le_hi = result.life_expectancy_ci
        lines.append(
            f"life expectancy: {result.life_expectancy:.2f} years, "
            f"CI [{le_lo:.2f}, {le_hi:.2f}]"
        )
    else:
        lines.append("life expectancy: undefined (no observed failures)")
    if result.degenerate:
        lines.append("WARNING: degenerate estimate (no observed failures)")
    return "\n".join(lines) + "\n"


def _load_stats(args) -> SufficientStats:
    _require(args, ["input", "s", "G"])
    with open(args.input, newline="") as fh:
        if args.format == "aggregate":
            table = panel_io.parse_aggregate(fh, s=args.s, G=args.G)
            return panel_io.to_sufficient_stats(table)
        units = panel_io.parse_units(fh, s=args.s, G=args.G)
        design = StudyDesign(s=args.s, G=args.G)
        from .estimator import sufficient_stats

        return sufficient_stats(units, design)


def cmd_estimate(args) -> int:
    stats = _load_stats(args)
    result = estimate(stats, level=args.level)
    payload = result.to_dict()
    if args.output_format == "csv":
        rows = [
            {
                **{k: v for k, v in payload.items() if not isinstance(v, list)},
                "ci_lo": payload["ci"][0],
                "ci_hi": payload["ci"][1],
                "life_expectancy_ci_lo": payload["life_expectancy_ci"][0],
                "life_expectancy_ci_hi": payload["life_expectancy_ci"][1],
            }
        ]
        columns = [
            "theta_hat",
            "se",
            "var",
            "level",
            "ci_lo",
            "ci_hi",
            "life_expectancy",
            "life_expectancy_ci_lo",
            "life_expectancy_ci_hi",
            "m",
            "m_uncens",
            "m_cens",
            "risk_time",
            "degenerate",
        ]
        _dump_csv(rows, columns, args.output)
    else:
        _dump_json(payload, args.output)
    sys.stderr.write(_summarize_estimate(result))
    return EXIT_DEGENERATE if result.degenerate else EXIT_OK


def cmd_simulate(args) -> int:
    _require(args, ["study", "theta0", "s", "G", "K", "seed"])
    design = StudyDesign(s=args.s, G=args.G)
    tdist = _parse_tdist(args.tdist, args.G)
    workers = args.workers if args.workers is not None else default_workers()

    if args.study == "mse":
        if args.n_list:
            n_list = [int(n) for n in args.n_list.split(",")]
        elif args.n is not None:
            n_list = [args.n]
        else:
            raise ValueError("mse study needs --n or --n-list")
    else:
        _require(args, ["n"])
        n_list = [args.n]

    rows = []
    for n in n_list:
        config = SimConfig(
            theta0=args.theta0,
            design=design,
            tdist=tdist,
            n=n,
            n_replicates=args.K,
            seed=args.seed,
            level=args.level,
        )
        report = run_study(config, workers=workers)
        rows.append(report.to_row())
        sys.stderr.write(
            f"n={n} K={args.K}: mse={report.mse:.6g} coverage={report.coverage:.4f} "
            f"ks={report.ks_distance:.4f} degenerate={report.degenerate_count}\n"
        )

    if args.output_format == "csv":
        _dump_csv(rows, STUDY_COLUMNS, args.output)
    else:
        _dump_json(rows, args.output)
    return EXIT_OK


def _random_check_stats(seed: int, count: int, s: int) -> list[SufficientStats]:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        m_uncens = int(rng.integers(1, 1000))
        extra = int(rng.integers(0, (s - 1) * m_uncens + 1))
        m_cens = int(rng.integers(1, 1000))
        cases.append(
            SufficientStats(
                m=m_uncens + m_cens,
                m_uncens=m_uncens,
                m_cens=m_cens,
                duration_sum=m_uncens + extra,
                s=s,
            )
        )
    return cases


def cmd_check(args) -> int:
    _require(args, ["s"])
    if args.input is not None:
        _require(args, ["G"])
        cases = [_load_stats(args)]
    elif args.random is not None:
        _require(args, ["seed"])
        cases = _random_check_stats(args.seed, args.random, args.s)
    else:
        raise ValueError("check needs --input or --random")

    rows = []
    worst = 0.0
    degenerate = False
    for idx, stats in enumerate(cases):
        if stats.risk_time == 0 or stats.m_uncens == 0:
            degenerate = True
            sys.stderr.write(f"case {idx}: degenerate stats, skipping oracle comparison\n")
            continue
        closed = theta_hat(stats)
        profile = grid_argmax(stats)
        diff = abs(closed - profile.argmax_theta)
        worst = max(worst, diff)
        rows.append(
            {
                "case": idx,
                "theta_hat": closed,
                "argmax_theta": profile.argmax_theta,
                "abs_diff": diff,
            }
        )

    if args.output_format == "csv":
        _dump_csv(rows, ["case", "theta_hat", "argmax_theta", "abs_diff"], args.output)
    else:
        _dump_json(rows, args.output)
    sys.stderr.write(f"checked {len(rows)} case(s), max |closed-form - argmax| = {worst:.3g}\n")
    if degenerate:
        return EXIT_DEGENERATE
    return EXIT_OK if worst <= 1e-6 else EXIT_INPUT_ERROR


def cmd_paths(args) -> int:
    _require(args, ["x", "t", "s", "G", "theta"])
    design = StudyDesign(s=args.s, G=args.G)
    bundle = build_paths(LatentUnit(x=args.x, t=args.t), design, args.theta)
    rows = [
        {
            "x": int(age),
            "dN": int(bundle.dn[i]),
            "Y_prev": int(bundle.y_prev[i]),
            "dN_tc": int(bundle.dn_tc[i]),
            "Y_tc_prev": int(bundle.y_tc_prev[i]),
            "dA_tc": float(bundle.da_tc[i]),
            "dM_tc": float(bundle.dm_tc[i]),
        }
        for i, age in enumerate(bundle.ages)
    ]
    _dump_csv(rows, list(PATH_COLUMNS), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomlife",
        description="Closure-probability estimation from left-truncated, right-censored panels",
    )
    parser.add_argument("--config", help="JSON file with default values for any flag")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file with default values for any flag")
        p.add_argument("--output", help="write machine-readable result to this path")
        p.add_argument(
            "--output-format", choices=["json", "csv"], default=None, help="default json"
        )
        p.add_argument("--s", type=int, default=None, help="observation-window length in years")
        p.add_argument("--G", type=int, default=None, help="number of foundation cohorts")

    p_est = sub.add_parser("estimate", help="estimate from an aggregate or unit-level CSV")
    add_common(p_est)
    p_est.add_argument("--input", default=None)
    p_est.add_argument("--format", choices=["aggregate", "units"], default="aggregate")
    p_est.add_argument("--level", type=float, default=None, help="confidence level, default 0.95")
    p_est.set_defaults(func=cmd_estimate)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    add_common(p_sim)
    p_sim.add_argument("--study", choices=["mse", "coverage", "clt"], default=None)
    p_sim.add_argument("--theta0", type=float, default=None)
    p_sim.add_argument("--n", type=int, default=None, help="latent sample size")
    p_sim.add_argument("--n-list", default=None, help="comma-separated latent sample sizes")
    p_sim.add_argument("--K", type=int, default=None, help="replicate count")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--level", type=float, default=None)
    p_sim.add_argument("--tdist", default="uniform", help="'uniform' or comma-separated pmf")
    p_sim.add_argument("--workers", type=int, default=None, help="parallel replicate workers")
    p_sim.set_defaults(func=cmd_simulate)

    p_chk = sub.add_parser("check", help="closed-form estimate vs numerical argmax oracle")
    add_common(p_chk)
    p_chk.add_argument("--input", default=None)
    p_chk.add_argument("--format", choices=["aggregate", "units"], default="aggregate")
    p_chk.add_argument("--random", type=int, default=None, help="number of random cases")
    p_chk.add_argument("--seed", type=int, default=None)
    p_chk.set_defaults(func=cmd_check)

    p_pth = sub.add_parser("paths", help="dump counting-process vectors for one unit")
    add_common(p_pth)
    p_pth.add_argument("--x", type=int, default=None, help="lifespan in years")
    p_pth.add_argument("--t", type=int, default=None, help="truncation age")
    p_pth.add_argument("--theta", type=float, default=None)
    p_pth.set_defaults(func=cmd_paths)

    return parser


def _find_config_path(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config":
            if i + 1 >= len(argv):
                raise ValueError("--config needs a path")
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    path = _find_config_path(argv)
    if path is None:
        return
    with open(path) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError("--config file must hold a JSON object")
    cleaned = {key.replace("-", "_"): value for key, value in overrides.items()}
    # Defaults lose to explicit flags, which is exactly the precedence wanted.
    for action in parser._subparsers._group_actions:
        for sub in action.choices.values():
            sub.set_defaults(**cleaned)


_BUILTIN_DEFAULTS = {"level": 0.95, "output_format": "json"}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError, json.JSONDecodeError, IndexError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR
    args = parser.parse_args(argv)
    for key, value in _BUILTIN_DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    try:
        return args.func(args)
    except (OSError, ValueError, NoRiskTimeError, panel_io.PanelFormatError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

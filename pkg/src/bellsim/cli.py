"""Command-line front end.

Subcommands: run (Monte Carlo), oracle (exact table), sweep (bias grid),
qm (reference predictions), collapse-time (scaling estimate), local-bound
(strategy enumeration). Options may come from a config file of
``key = value`` lines under a ``[subcommand]`` section header;
command-line flags override config-file values, and unknown keys are
errors. Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import engine, oracle, physics, stats
from .engine import FixedSettings, RunConfig, SettingPolicy, UniformIndependent, WeightedTable
from .model import FixedSet, InstructionSet, InstructionSource, RandomPermutations
from .observer import CollapseMode, ObserverParams, mode_token, parse_mode
from .oracle import COLOR_PAIRS, SETTING_PAIRS
from .physics import CANONICAL_ANGLES, ParticleKind
from .report import FORMATS, Report, emit_report


class CliError(Exception):
    """Configuration problem; maps to exit code 2."""


def parse_probability(text: str) -> Fraction:
    """Probabilities are fractions like 3/8 or decimals like 0.375; both
    parse exactly."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise CliError(f"malformed probability {text!r}; use a fraction a/b or a decimal")
    if not 0 <= value <= 1:
        raise CliError(f"probability {text!r} outside [0, 1]")
    return value


def parse_grid(text: str) -> tuple[Fraction, ...]:
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise CliError("bias grid is empty")
    return tuple(parse_probability(item) for item in items)


def parse_settings(text: str) -> SettingPolicy:
    if text == "uniform":
        return UniformIndependent()
    if text.startswith("fixed:"):
        parts = text.partition(":")[2].split(",")
        try:
            left, right = (int(p) for p in parts)
            return FixedSettings(left, right)
        except ValueError as exc:
            raise CliError(f"bad settings token {text!r}: {exc}")
    raise CliError(f"unknown settings token {text!r}; expected uniform or fixed:<l>,<r>")


def settings_token(policy: SettingPolicy) -> str:
    if isinstance(policy, UniformIndependent):
        return "uniform"
    if isinstance(policy, FixedSettings):
        return f"fixed:{policy.left},{policy.right}"
    if isinstance(policy, WeightedTable):
        return "weighted:" + ",".join(format(w, ".12g") for w in policy.weights)
    raise TypeError(f"not a setting policy: {policy!r}")


def parse_source(text: str) -> InstructionSource:
    if text == "random":
        return RandomPermutations()
    if text.startswith("fixed:"):
        try:
            return FixedSet(InstructionSet.from_token(text.partition(":")[2]))
        except ValueError as exc:
            raise CliError(f"bad source token {text!r}: {exc}")
    raise CliError(f"unknown source token {text!r}; expected random or fixed:<RGF-token>")


def source_token(source: InstructionSource) -> str:
    if isinstance(source, RandomPermutations):
        return "random"
    if isinstance(source, FixedSet):
        return f"fixed:{source.iset.token()}"
    raise TypeError(f"not an instruction source: {source!r}")


SUBCOMMANDS = ("run", "oracle", "sweep", "qm", "collapse-time", "local-bound")

# Option names accepted per subcommand, both as flags and as config keys.
_SCHEMA: dict[str, tuple[str, ...]] = {
    "run": ("trials", "seed", "bias", "mode", "settings", "source", "format", "out"),
    "oracle": ("bias", "mode", "source", "format", "out"),
    "sweep": ("bias-grid", "mode", "format", "out"),
    "qm": ("kind", "angles", "format", "out"),
    "collapse-time": ("format", "out"),
    "local-bound": ("format", "out"),
}

_DEFAULTS: dict[str, str | None] = {
    "trials": "1000000",
    "seed": "0",
    "bias": "3/8",
    "mode": "observer",
    "settings": "uniform",
    "source": "random",
    "bias-grid": "0,1/8,1/4,3/8,1/2,5/8,3/4,7/8,1",
    "kind": "photon",
    "angles": None,
    "format": "text",
    "out": None,
}


@dataclass
class CliConfig:
    subcommand: str
    format: str
    out: str | None
    run_config: RunConfig | None = None
    params: ObserverParams | None = None
    mode: CollapseMode | None = None
    source: InstructionSource | None = None
    bias_grid: tuple[Fraction, ...] | None = None
    kind: ParticleKind | None = None
    angles: tuple[float, float, float] | None = None
    n_particles: float | None = None
    mass_ratio: float | None = None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Two-wing instruction-set experiment: simulator, exact oracle, and reference physics.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="config file of key = value lines under [subcommand] sections")
        p.add_argument("--format", choices=FORMATS, help="report format")
        p.add_argument("--out", help="write the report to this path instead of stdout")
        return p

    p = add("run", "Monte Carlo run with coincidence statistics")
    p.add_argument("--trials", help="number of trials (default 1000000)")
    p.add_argument("--seed", help="64-bit run seed (default 0)")
    p.add_argument("--bias", help="flicker same-color bias, fraction or decimal (default 3/8)")
    p.add_argument("--mode", help="observer | objective-early | sf-delayed:<seconds>")
    p.add_argument("--settings", help="uniform | fixed:<l>,<r>")
    p.add_argument("--source", help="random | fixed:<RGF-token>")

    p = add("oracle", "exact probability table by enumeration")
    p.add_argument("--bias", help="flicker same-color bias (default 3/8)")
    p.add_argument("--mode", help="observer | objective-early | sf-delayed:<seconds>")
    p.add_argument("--source", help="random | fixed:<RGF-token>")

    p = add("sweep", "exact inequality sum over a grid of bias values")
    p.add_argument("--bias-grid", help="comma-separated probabilities")
    p.add_argument("--mode", help="observer | objective-early | sf-delayed:<seconds>")

    p = add("qm", "quantum reference predictions for the analyzer angles")
    p.add_argument("--kind", choices=[k.value for k in ParticleKind], help="particle kind")
    p.add_argument("--angles", help="three analyzer angles in degrees, e.g. 0,60,120")

    p = add("collapse-time", "collapse-time estimate from particle number and mass")
    p.add_argument("n_particles", help="number of displaced particles")
    p.add_argument("mass_ratio", help="particle mass over nucleon mass")

    add("local-bound", "enumerate deterministic strategies and their bound")
    return parser


def _config_file_values(text: str, subcommand: str) -> dict[str, str]:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise CliError(f"bad config file: {exc}")
    for section in cp.sections():
        if section not in _SCHEMA:
            raise CliError(f"unknown config section [{section}]")
        allowed = _SCHEMA[section]
        for key in cp[section]:
            if key not in allowed:
                raise CliError(f"unknown key {key!r} in config section [{section}]")
    if cp.has_section(subcommand):
        return dict(cp[subcommand])
    return {}


def _merge_options(ns: argparse.Namespace, subcommand: str, config_text: str | None) -> dict[str, str | None]:
    file_values = _config_file_values(config_text, subcommand) if config_text else {}
    merged: dict[str, str | None] = {}
    for key in _SCHEMA[subcommand]:
        flag_value = getattr(ns, key.replace("-", "_"), None)
        if flag_value is not None:
            merged[key] = flag_value
        elif key in file_values:
            merged[key] = file_values[key]
        else:
            merged[key] = _DEFAULTS[key]
    return merged


def _parse_int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise CliError(f"{name} must be an integer, got {text!r}")


def _parse_float(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise CliError(f"{name} must be a number, got {text!r}")


def parse_config(argv: list[str], config_text: str | None = None) -> CliConfig:
    """Parse command-line tokens plus an optional config-file text.

    When ``--config`` names a file and no text is passed, the file is
    read; explicit text takes precedence (used by tests).
    """
    ns = _build_parser().parse_args(argv)
    subcommand = ns.subcommand
    if config_text is None and getattr(ns, "config", None):
        try:
            config_text = Path(ns.config).read_text()
        except OSError as exc:
            raise CliError(f"cannot read config file {ns.config!r}: {exc}")
    opts = _merge_options(ns, subcommand, config_text)

    fmt = opts["format"] or "text"
    if fmt not in FORMATS:
        raise CliError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    cfg = CliConfig(subcommand=subcommand, format=fmt, out=opts["out"])

    try:
        if subcommand in ("run", "oracle"):
            cfg.params = ObserverParams(parse_probability(opts["bias"]))
            cfg.mode = _parse_mode_opt(opts["mode"])
            cfg.source = parse_source(opts["source"])
        if subcommand == "run":
            cfg.run_config = RunConfig(
                n_trials=_parse_int(opts["trials"], "trials"),
                seed=_parse_int(opts["seed"], "seed"),
                params=cfg.params,
                mode=cfg.mode,
                policy=parse_settings(opts["settings"]),
                source=cfg.source,
            )
        elif subcommand == "sweep":
            cfg.bias_grid = parse_grid(opts["bias-grid"])
            cfg.mode = _parse_mode_opt(opts["mode"])
        elif subcommand == "qm":
            cfg.kind = ParticleKind(opts["kind"])
            if opts["angles"] is not None:
                parts = opts["angles"].split(",")
                if len(parts) != 3:
                    raise CliError(f"need exactly three angles, got {opts['angles']!r}")
                cfg.angles = tuple(_parse_float(p, "angle") for p in parts)
            else:
                cfg.angles = CANONICAL_ANGLES[cfg.kind]
        elif subcommand == "collapse-time":
            cfg.n_particles = _parse_float(ns.n_particles, "n_particles")
            cfg.mass_ratio = _parse_float(ns.mass_ratio, "mass_ratio")
    except ValueError as exc:
        raise CliError(str(exc))
    return cfg


def _parse_mode_opt(token: str) -> CollapseMode:
    try:
        return parse_mode(token)
    except ValueError as exc:
        raise CliError(str(exc))


def _pair_token(ls: int, rs: int) -> str:
    return f"{ls}-{rs}"


def _cmd_oracle(cfg: CliConfig) -> Report:
    table = oracle.exact_distribution(cfg.params, cfg.mode, cfg.source)
    inequality = stats.mermin_sum(table)
    report = Report()
    report.add("command", "oracle")
    report.add("bias", cfg.params.p_same_bias)
    report.add("mode", mode_token(cfg.mode))
    report.add("source", source_token(cfg.source))
    report.add(
        "coincidence_sum",
        sum((table.coincidence(ls, rs) for ls, rs in SETTING_PAIRS), Fraction(0)),
    )
    report.add("overall_coincidence", table.overall_coincidence())
    report.add("left_red_marginal", table.red_marginal("left"))
    report.add("right_red_marginal", table.red_marginal("right"))
    for (a, b), value in inequality.per_pair_same.items():
        report.add(f"same_color_{a}{b}", value)
    report.add("mermin_sum", inequality.mermin_sum)
    report.add("local_bound", inequality.local_bound)
    report.add("violated", inequality.violated)
    report.columns = ["pair", "RR", "RG", "GR", "GG", "coincidence"]
    for ls, rs in SETTING_PAIRS:
        report.add_row(
            _pair_token(ls, rs),
            *(table.prob(ls, rs, lc, rc) for lc, rc in COLOR_PAIRS),
            table.coincidence(ls, rs),
        )
    return report


def _cmd_run(cfg: CliConfig) -> Report:
    run_config = cfg.run_config
    tally = engine.run_experiment(run_config)
    rates = stats.coincidence_rates(tally)
    report = Report()
    report.add("command", "run")
    report.add("trials", run_config.n_trials)
    report.add("seed", run_config.seed)
    report.add("bias", run_config.params.p_same_bias)
    report.add("mode", mode_token(run_config.mode))
    report.add("settings", settings_token(run_config.policy))
    report.add("source", source_token(run_config.source))
    report.add("overall_coincidence", rates.overall.rate)
    report.add("overall_ci_low", rates.overall.ci_low)
    report.add("overall_ci_high", rates.overall.ci_high)
    report.add("left_red_marginal", rates.left_red)
    report.add("right_red_marginal", rates.right_red)
    try:
        inequality = stats.mermin_sum(rates)
    except ValueError:
        report.add("mermin_sum", "n/a (not all distinct setting pairs observed)")
    else:
        for (a, b), value in inequality.per_pair_same.items():
            report.add(f"same_color_{a}{b}", value)
        report.add("mermin_sum", inequality.mermin_sum)
        report.add("mermin_se", inequality.uncertainty)
        report.add("k_sigma", inequality.k_sigma)
        report.add("local_bound", inequality.local_bound)
        report.add("violated", inequality.violated)
    report.columns = ["pair", "rate", "ci_low", "ci_high"]
    for (ls, rs), pair_stats in sorted(rates.per_pair.items()):
        report.add_row(_pair_token(ls, rs), pair_stats.rate, pair_stats.ci_low, pair_stats.ci_high)
    return report


def _cmd_sweep(cfg: CliConfig) -> Report:
    results = stats.sweep_bias(cfg.bias_grid, cfg.mode)
    report = Report()
    report.add("command", "sweep")
    report.add("mode", mode_token(cfg.mode))
    report.add("local_bound", stats.LOCAL_BOUND)
    report.columns = ["bias", "mermin_sum", "violated"]
    for p, value in results:
        report.add_row(p, value, value < stats.LOCAL_BOUND)
    return report


def _cmd_qm(cfg: CliConfig) -> Report:
    report = Report()
    report.add("command", "qm")
    report.add("kind", cfg.kind.value)
    report.add("angles_deg", ",".join(format(a, ".12g") for a in cfg.angles))
    distinct = [
        physics.qm_same_color_probability(cfg.kind, cfg.angles[a], cfg.angles[b])
        for a in range(3)
        for b in range(3)
        if a < b
    ]
    report.add("distinct_pair_sum", sum(distinct))
    report.columns = ["angle_a", "angle_b", "same_color_probability"]
    for a in cfg.angles:
        for b in cfg.angles:
            report.add_row(a, b, physics.qm_same_color_probability(cfg.kind, a, b))
    return report


def _cmd_collapse_time(cfg: CliConfig) -> Report:
    estimate = physics.estimate_collapse(cfg.n_particles, cfg.mass_ratio)
    flags = physics.compare_to_thresholds(estimate)
    report = Report()
    report.add("command", "collapse-time")
    report.add("n_particles", cfg.n_particles)
    report.add("mass_ratio", cfg.mass_ratio)
    report.add("collapse_time", f"{format(estimate.collapse_time_s, '.12g')} s")
    report.add("exceeds_1e-06_s", flags.exceeds_fast_threshold)
    report.add("exceeds_3e-05_s", flags.exceeds_slow_threshold)
    return report


def _cmd_local_bound(cfg: CliConfig) -> Report:
    report = Report()
    report.add("command", "local-bound")
    report.add("strategies", len(oracle.ALL_LOCAL_STRATEGIES))
    report.add("local_bound", oracle.local_strategy_bound())
    report.columns = ["strategy", "pairwise_same_sum"]
    for strategy in oracle.ALL_LOCAL_STRATEGIES:
        token = "".join(color.value for color in strategy)
        report.add_row(token, oracle.pairwise_same_sum(strategy))
    return report


_COMMANDS = {
    "run": _cmd_run,
    "oracle": _cmd_oracle,
    "sweep": _cmd_sweep,
    "qm": _cmd_qm,
    "collapse-time": _cmd_collapse_time,
    "local-bound": _cmd_local_bound,
}


def execute(cfg: CliConfig) -> str:
    return emit_report(_COMMANDS[cfg.subcommand](cfg), cfg.format)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        text = execute(cfg)
        if cfg.out:
            Path(cfg.out).write_text(text)
        else:
            sys.stdout.write(text)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

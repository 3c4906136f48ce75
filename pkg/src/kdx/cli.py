"""``kdx`` command-line front end.

Usage::

    kdx <standardize|density|test|regress|reproduce-all> --config PATH [--seed N]
        [--weights SCHEME] [--censor POLICY] [--kernel FAMILY] [--bandwidth RULE]
        [--group-by FACTOR] [--filter K=V] [--out DIR]

The config file is flat ``key = value`` text (``#`` starts a comment) using
the long flag names with dashes or underscores; flags override file values.
Exit status is 0 on success, 2 for invalid input or configuration and 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .data_model import (
    CENSOR_MODES,
    WEIGHT_SCHEMES,
    CensorPolicy,
    DatasetError,
    DeflatorSeries,
    StandardizationConfig,
    parse_dataset,
    parse_deflator,
)
from .density import KERNEL_PRESETS, decompose, quintile_table
from .inference import density_band
from .regression import RankError
from . import report

logger = logging.getLogger("kdx")

COMMANDS = ("standardize", "density", "test", "regress", "reproduce-all")
FACTORS = ("period", "prtp", "author", "pigou")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    input: str = ""
    deflator: str = ""
    weights: str = "quality"
    censor: str = "censor"
    kernel: str = "gumbel-weibull"
    bandwidth: str = "sd"
    grid_size: int = 4096
    group_by: str = "period"
    filter: tuple = ()
    quantiles: int = 5
    target_dollar_year: int = 2010
    target_emission_year: int = 2010
    growth_rate: float = 0.022
    record_growth: bool = False
    bootstrap: int = 1000
    band_bootstrap: int = 1000
    regression_bootstrap: int = 200
    seed: int | None = None
    out: str = "kdx-out"
    workers: int = 1

    # options that do not change any output
    NON_SEMANTIC = ("out", "workers")

    def validate(self, needs_seed):
        problems = []
        if not self.input:
            problems.append("no input file given (key 'input')")
        if self.weights not in WEIGHT_SCHEMES:
            problems.append(f"weights must be one of {WEIGHT_SCHEMES}")
        if self.censor not in CENSOR_MODES:
            problems.append(f"censor must be one of {CENSOR_MODES}")
        if self.kernel not in KERNEL_PRESETS:
            problems.append(f"kernel must be one of {tuple(KERNEL_PRESETS)}")
        if self.bandwidth not in ("sd", "silverman"):
            try:
                if not float(self.bandwidth) > 0:
                    raise ValueError
            except ValueError:
                problems.append("bandwidth must be 'sd', 'silverman' or a positive number")
        if self.group_by not in FACTORS:
            problems.append(f"group_by must be one of {FACTORS}")
        for key, _ in self.filter:
            if key not in ("prtp", "period", "author", "author_group", "pigou"):
                problems.append(f"unknown filter key {key!r}")
        if self.grid_size < 64:
            problems.append("grid_size must be at least 64")
        if self.quantiles < 2:
            problems.append("quantiles must be at least 2")
        if self.workers < 1:
            problems.append("workers must be positive")
        for name in ("bootstrap", "band_bootstrap", "regression_bootstrap"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be positive")
        if needs_seed and self.seed is None:
            problems.append("a seed is required for commands that bootstrap")
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def bandwidth_rule(self):
        return self.bandwidth if self.bandwidth in ("sd", "silverman") else float(self.bandwidth)

    @property
    def policy(self):
        return CensorPolicy(mode=self.censor)

    def semantic_items(self):
        for f in fields(self):
            if f.name not in self.NON_SEMANTIC and f.name not in ("input", "deflator"):
                yield f.name, getattr(self, f.name)


_INT_KEYS = {f.name for f in fields(RunConfig) if f.type in ("int", "int | None")}
_FLOAT_KEYS = {"growth_rate"}
_BOOL_KEYS = {"record_growth"}


def _coerce(key, text):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _BOOL_KEYS:
            low = text.strip().lower()
            if low not in ("0", "1", "true", "false", "yes", "no"):
                raise ValueError
            return low in ("1", "true", "yes")
    except ValueError:
        raise ConfigError(f"invalid value {text!r} for {key}") from None
    return text


def _parse_filter(text):
    if "=" not in text:
        raise ConfigError(f"filter {text!r} is not of the form KEY=VALUE")
    key, value = (s.strip() for s in text.split("=", 1))
    return key, value


def load_config(path):
    """Parse a flat ``key = value`` file into a dict of typed values."""
    known = {f.name for f in fields(RunConfig)}
    values, filters = {}, []
    base = Path(path).resolve().parent
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "filter":
            filters += [_parse_filter(v) for v in value.split(",") if v.strip()]
            continue
        if key in ("input", "deflator", "out") and value and not Path(value).is_absolute():
            value = str(base / value)
        values[key] = _coerce(key, value)
    if filters:
        values["filter"] = tuple(filters)
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="kdx", description="Kernel density decomposition "
                                     "and stationarity tests for social cost of carbon estimates.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--input", help="estimates CSV")
    parser.add_argument("--deflator", help="year,index price deflator CSV")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--weights", help=f"weight scheme {WEIGHT_SCHEMES}")
    parser.add_argument("--censor", help=f"censor policy {CENSOR_MODES}")
    parser.add_argument("--kernel", help=f"kernel preset {tuple(KERNEL_PRESETS)}")
    parser.add_argument("--bandwidth", help="sd, silverman or a positive number")
    parser.add_argument("--group-by", dest="group_by", help=f"factor {FACTORS}")
    parser.add_argument("--filter", action="append", default=None, metavar="K=V",
                        help="keep records with K=V (repeatable)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--bootstrap", type=int, help="bootstrap replicates for the tests")
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--growth-rate", dest="growth_rate", type=float)
    parser.add_argument("--workers", type=int, help="processes for bootstrap replicates")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args):
    values = load_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is None:
            continue
        if f.name == "filter":
            values["filter"] = tuple(_parse_filter(t) for t in flag)
        else:
            values[f.name] = flag
    return RunConfig(**values)


# -- running ---------------------------------------------------------------------

def _sha256(data):
    return hashlib.sha256(data if isinstance(data, bytes) else data.encode("utf-8")).hexdigest()


@dataclass
class Run:
    config: RunConfig
    out: Path
    files: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    input_hash: str = ""
    deflator_hash: str = ""

    def write(self, name, text):
        path = self.out / name
        path.write_text(text, encoding="utf-8", newline="\n")
        self.files[name] = _sha256(text)

    def config_hash(self):
        items = [f"{k}={v!r}" for k, v in self.config.semantic_items()]
        items += [f"input_sha256={self.input_hash}", f"deflator_sha256={self.deflator_hash}"]
        return _sha256("\n".join(items))

    def manifest(self, command):
        lines = [f"command={command}", f"kdx_version={__version__}"]
        for k, v in asdict(self.config).items():
            if k == "filter":
                v = ",".join(f"{a}={b}" for a, b in v)
            lines.append(f"config.{k}={v}")
        lines.append(f"input_sha256={self.input_hash}")
        lines.append(f"deflator_sha256={self.deflator_hash}")
        lines.append(f"config_hash={self.config_hash()}")
        for i, note in enumerate(self.notes):
            lines.append(f"note.{i}={note}")
        for name in sorted(self.files):
            lines.append(f"file.{name}.sha256={self.files[name]}")
        text = "\n".join(lines) + "\n"
        (self.out / "manifest.txt").write_text(text, encoding="utf-8", newline="\n")


def load_dataset(run):
    cfg = run.config
    try:
        text = Path(cfg.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read input: {exc}") from None
    run.input_hash = _sha256(text)
    deflator = DeflatorSeries()
    if cfg.deflator:
        try:
            dtext = Path(cfg.deflator).read_text(encoding="utf-8")
        except OSError as exc:
            raise DatasetError(f"cannot read deflator: {exc}") from None
        run.deflator_hash = _sha256(dtext)
        deflator = parse_deflator(dtext)
    else:
        run.notes.append("no deflator table; prices inflate at a constant 2.9%/yr")
    std = StandardizationConfig(cfg.target_dollar_year, cfg.target_emission_year,
                                cfg.growth_rate, deflator, cfg.record_growth)
    dataset = parse_dataset(text, config=std)
    run.notes += list(dataset.warnings)
    if cfg.filter:
        return report.filter_dataset(dataset, list(cfg.filter), cfg.weights, cfg.policy)
    return dataset.reweighted(cfg.weights, cfg.policy)


def cmd_standardize(run, dataset):
    run.write("standardized.csv", report.standardized_csv(dataset))


def _quintile_outputs(run, dataset, group_by, suffix=""):
    cfg = run.config
    dec = decompose(dataset, group_by, cfg.kernel, cfg.bandwidth_rule, grid_size=cfg.grid_size)
    run.write(f"quintiles_{group_by}{suffix}.csv", quintile_table(dec, cfg.quantiles).to_csv())
    run.write(f"curves_{group_by}{suffix}.csv", report.curves_csv(dec))
    xmax = float(np.quantile(dataset.values[dataset.weights > 0], 0.99)) * 1.5
    run.write(f"density_{group_by}{suffix}.svg",
              report.svg_stacked(dec, f"Decomposition by {group_by}{suffix}", xmax=xmax))
    return dec


def _prtp_subsets(dataset, cfg):
    for level in report.MAIN_PRTP:
        try:
            sub = report.filter_dataset(dataset, [("prtp", level)], cfg.weights, cfg.policy)
        except DatasetError:
            continue
        yield f"_prtp{float(level):g}", sub


def cmd_density(run, dataset, full=False):
    cfg = run.config
    _quintile_outputs(run, dataset, cfg.group_by)
    if full:
        for factor in ("period", "prtp", "author"):
            if factor != cfg.group_by:
                _quintile_outputs(run, dataset, factor)
        for suffix, sub in _prtp_subsets(dataset, cfg):
            try:
                _quintile_outputs(run, sub, "period", suffix)
            except ValueError as exc:
                run.notes.append(f"period decomposition{suffix}: {exc}")
    means, _ = report.table_means(dataset, cfg.kernel, cfg.bandwidth_rule, cfg.grid_size)
    run.write("table_means_by_prtp.csv", means)
    run.write("table_kernel_means.csv",
              report.table_kernel_means(dataset, cfg.kernel, cfg.bandwidth_rule, cfg.grid_size))
    variants, notes = report.table_kernel_variants(dataset, cfg.grid_size)
    run.notes += notes
    run.write("table_kernel_variants.csv", variants)
    by_year = report.means_by_year(dataset)
    run.write("means_by_year.csv", by_year)
    rows = [line.split(",") for line in by_year.strip().splitlines()[1:]]
    yrs = [float(r[0]) for r in rows]
    run.write("means_by_year.svg", report.svg_lines(
        [("reported", yrs, [float(r[2]) for r in rows]),
         ("standardized", yrs, [float(r[4]) for r in rows])],
        "Average SCC by publication year", "year", "$/tC", markers=True))


def cmd_test(run, dataset, full=False):
    cfg = run.config
    table, results = report.table_tests(dataset, cfg.group_by, cfg.kernel, cfg.bandwidth_rule,
                                        cfg.quantiles, cfg.bootstrap, cfg.seed, cfg.workers)
    run.write("table_pearson.csv", table)
    for name, res in results.items():
        if res.redraws:
            run.notes.append(f"{name}: {res.redraws} degenerate resamples redrawn")
    if "All" in results:
        run.write("bootstrap_cdf.csv", report.bootstrap_cdf_csv(results["All"]))
    dec = decompose(dataset, cfg.group_by, cfg.kernel, cfg.bandwidth_rule, grid_size=cfg.grid_size)
    run.write(f"ks_{cfg.group_by}.csv", report.table_ks(dec))
    if full:
        for suffix, sub in _prtp_subsets(dataset, cfg):
            try:
                dec = decompose(sub, "period", cfg.kernel, cfg.bandwidth_rule,
                                grid_size=cfg.grid_size)
                run.write(f"ks_period{suffix}.csv", report.table_ks(dec))
            except ValueError as exc:
                run.notes.append(f"KS{suffix}: {exc}")
        band = density_band(dataset, cfg.kernel, cfg.bandwidth_rule, cfg.band_bootstrap, cfg.seed,
                            grid_size=min(cfg.grid_size, 1024))
        run.write("density_band.csv", report.band_csv(band))


def cmd_regress(run, dataset):
    cfg = run.config
    table, notes = report.table_regress(dataset, B=cfg.regression_bootstrap, seed=cfg.seed,
                                        policy=cfg.policy)
    run.notes += notes
    run.write("table_regression.csv", table)
    try:
        fe_csv, fe = report.year_effects_csv(dataset)
    except ValueError as exc:
        # RankError included: reported, the regression table still stands
        run.notes.append(f"year fixed effects: {exc}")
        return
    run.write("year_effects.csv", fe_csv)
    run.write("year_effects.svg", report.svg_lines(
        [("effect", fe.years, fe.effects), ("+1 se", fe.years, fe.effects + fe.half_width),
         ("-1 se", fe.years, fe.effects - fe.half_width)],
        f"Year effects relative to {fe.base_year}", "year", "$/tC", markers=True))


def run_command(command, cfg):
    cfg.validate(needs_seed=command in ("test", "regress", "reproduce-all"))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    run = Run(cfg, out)
    dataset = load_dataset(run)
    if command in ("standardize", "reproduce-all"):
        cmd_standardize(run, dataset)
    if command in ("density", "reproduce-all"):
        cmd_density(run, dataset, full=command == "reproduce-all")
    if command in ("test", "reproduce-all"):
        cmd_test(run, dataset, full=command == "reproduce-all")
    if command in ("regress", "reproduce-all"):
        cmd_regress(run, dataset)
    run.manifest(command)
    return run


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        run_command(args.command, cfg)
    except (RankError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"kdx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DatasetError, ValueError, OSError) as exc:
        print(f"kdx: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

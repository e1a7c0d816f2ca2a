"""Command-line interface: ``declinekit {stats,scan,predict,diagnose,simulate,replay}``.

Every run writes its outputs plus ``run-manifest.json``, which records the
fully resolved configuration. ``declinekit replay run-manifest.json``
regenerates byte-identical outputs.

Exit codes: 0 success, 2 missing input file, 3 schema or data error,
4 invalid configuration, 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .changepoint import (
    METHODS_YEARS,
    average_over_thresholds,
    default_thresholds,
    first_crossing,
    locate_changepoint,
    scan_changepoints,
)
from .data import (
    COVERAGE,
    Scale,
    build_population_series,
    ingest_wars,
    normalize_sizes,
    raw_sizes,
    read_population_table,
    summarize,
)
from .diagnostics import (
    DiscretePowerLaw,
    LogUniform,
    gap_distribution,
    generate_stationary_corpus,
    onset_frequency,
)
from .errors import ConfigError, DataError, InvariantError, SchemaError
from .export import render_table, write_atomic
from .inference import DEFAULT_DRAWS
from .prediction import DEFAULT_SPLIT, predict_proportion_ratios

log = logging.getLogger("declinekit")

COMMANDS = ("stats", "scan", "predict", "diagnose", "simulate")
MANIFEST = "run-manifest.json"
SEED_ENV = "DECLINEKIT_SEED"

EXIT_OK, EXIT_MISSING, EXIT_SCHEMA, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3, 4, 5


class MissingInputError(Exception):
    pass


@dataclass
class RunConfig:
    war_data_path: str | None = None
    population_paths: list[str] = field(default_factory=list)
    scale: str = "raw"
    year_range: tuple[int, int] = METHODS_YEARS
    thresholds: list[float] | None = None
    n_draws: int = DEFAULT_DRAWS
    seed: int = 0
    split_year: int = DEFAULT_SPLIT
    output_dir: str = "."
    output_format: str = "csv"
    exclude_boundary: bool = False
    window: int = 5
    n_sim: int = 1000
    unique_onsets: bool = False
    sim_span: tuple[int, int] = COVERAGE
    sim_rate: float = 3.0
    sim_law: str = "log_uniform:3:7"

    def validate(self) -> None:
        if self.n_draws < 1:
            raise ConfigError("--draws must be at least 1")
        if self.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        try:
            self.scale = Scale(self.scale).value
        except ValueError:
            raise ConfigError(f"unknown scale {self.scale!r}") from None
        lo, hi = self.year_range
        if not (COVERAGE[0] <= lo < hi <= COVERAGE[1]):
            raise ConfigError(f"--years must satisfy {COVERAGE[0]} <= lo < hi <= {COVERAGE[1]}")
        if self.thresholds is not None:
            if not self.thresholds or any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
                raise ConfigError("--thresholds must be non-empty and strictly ascending")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError("--window must be a positive odd number")
        if self.n_sim < 1:
            raise ConfigError("--n-sim must be at least 1")
        parse_law(self.sim_law)

    def resolved_thresholds(self) -> list[float]:
        return list(self.thresholds) if self.thresholds is not None else list(default_thresholds(self.scale))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["year_range"] = list(self.year_range)
        d["sim_span"] = list(self.sim_span)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = dict(d)
        for key in ("year_range", "sim_span"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def parse_law(text: str):
    kind, *params = text.split(":")
    try:
        values = [float(p) for p in params]
        if kind == "log_uniform" and len(values) == 2:
            return LogUniform(*values)
        if kind == "power_law" and len(values) == 2:
            return DiscretePowerLaw(values[0], int(values[1]))
    except ValueError as exc:
        raise ConfigError(f"invalid size law {text!r}: {exc}") from None
    raise ConfigError(f"invalid size law {text!r}; use log_uniform:LO:HI or power_law:EXPONENT:XMIN")


def _read_text(path: str):
    p = Path(path)
    if not p.is_file():
        raise MissingInputError(f"input file not found: {path}")
    return p.open(encoding="utf-8", newline="")


def load_wars(cfg: RunConfig):
    if not cfg.war_data_path:
        raise ConfigError("--wars is required for this command")
    with _read_text(cfg.war_data_path) as fh:
        result = ingest_wars(fh)
    for issue in result.warnings:
        log.warning("%s: %s", cfg.war_data_path, issue)
    if result.errors:
        raise SchemaError("; ".join(f"{cfg.war_data_path} {e}" for e in result.errors[:20]))
    if not result.records:
        raise DataError(f"{cfg.war_data_path}: no war records")
    log.info("read %d wars from %s", len(result), cfg.war_data_path)
    return result.records


def load_population(cfg: RunConfig, wars):
    if not cfg.population_paths:
        raise ConfigError("--population is required for normalized data")
    tables = []
    for path in cfg.population_paths:
        with _read_text(path) as fh:
            tables.append(read_population_table(fh))
    onsets = [w.onset_year for w in wars]
    return build_population_series(tables, (min(onsets), max(onsets)))


def load_events(cfg: RunConfig):
    wars = load_wars(cfg)
    if cfg.scale == Scale.RAW.value:
        return wars, raw_sizes(wars)
    return wars, normalize_sizes(wars, load_population(cfg, wars))


def _table(name: str, rows, columns, fmt: str) -> tuple[str, str]:
    return f"{name}.{fmt}", render_table(rows, columns, fmt)


def cmd_stats(cfg: RunConfig) -> dict[str, str]:
    wars = load_wars(cfg)
    columns = ["scale", "n", "mean", "sd", "median", "min", "max", "skewness", "tail_fraction"]
    rows = [{"scale": "raw", **summarize(raw_sizes(wars).sizes).to_dict()}]
    if cfg.population_paths:
        rows.append({"scale": "normalized", **summarize(normalize_sizes(wars, load_population(cfg, wars)).sizes).to_dict()})
    if cfg.output_format == "json":
        body = json.dumps({r["scale"]: {c: r[c] for c in columns[1:]} for r in rows}, indent=2) + "\n"
        return {"summary.json": body}
    return dict([_table("summary", rows, columns, "csv")])


def cmd_scan(cfg: RunConfig) -> dict[str, str]:
    _, events = load_events(cfg)
    scan = scan_changepoints(
        events,
        years=cfg.year_range,
        thresholds=cfg.resolved_thresholds(),
        n_draws=cfg.n_draws,
        seed=cfg.seed,
        exclude_boundary=cfg.exclude_boundary,
    )
    averaged = average_over_thresholds(scan)
    year, peak = locate_changepoint(averaged)
    if len(scan.grid) * len(scan.thresholds) != len(scan.long_rows()):
        raise InvariantError("scan grid size mismatch")
    fmt = cfg.output_format
    summary = {
        "changepoint_year": year,
        "max_mean_pr_decline": peak,
        "first_year_at_0.66": first_crossing(averaged, 0.66),
        "excluded_thresholds": scan.excluded_thresholds,
    }
    print(f"most likely changepoint: {year} (mean probability of decline {peak:.4f})")
    return dict(
        [
            _table("scan_grid", scan.long_rows(), ["year", "m", "pr_decline", "degenerate"], fmt),
            _table("scan_average", scan.averaged_rows(), ["year", "mean_pr_decline"], fmt),
            ("scan_summary.json", json.dumps(summary, indent=2) + "\n"),
        ]
    )


def cmd_predict(cfg: RunConfig) -> dict[str, str]:
    _, events = load_events(cfg)
    ratios = predict_proportion_ratios(
        events, split_year=cfg.split_year, thresholds=cfg.resolved_thresholds(), n_draws=cfg.n_draws, seed=cfg.seed
    )
    columns = ["m", "observed_p", "predicted_mean", "ratio", "band_lo", "band_hi", "degenerate"]
    return dict([_table("prediction", [r.to_dict() for r in ratios], columns, cfg.output_format)])


def cmd_diagnose(cfg: RunConfig) -> dict[str, str]:
    wars = load_wars(cfg)
    onsets = onset_frequency(wars, window=cfg.window)
    gaps = gap_distribution(wars, n_sim=cfg.n_sim, seed=cfg.seed, unique_onsets=cfg.unique_onsets)
    print(f"mean onset rate {onsets.mean_rate:.4f}/year, mean gap {gaps.lambda_hat:.4f} years")
    fmt = cfg.output_format
    return dict(
        [
            _table("onsets", onsets.annual_rows(), ["year", "count", "moving_avg"], fmt),
            _table("gaps", gaps.gap_rows(), ["gap", "observed_prop", "expected_prop"], fmt),
        ]
    )


def cmd_simulate(cfg: RunConfig) -> dict[str, str]:
    events = generate_stationary_corpus(cfg.sim_span, cfg.sim_rate, parse_law(cfg.sim_law), seed=cfg.seed)
    rows = [
        {
            "id": f"sim{i:05d}",
            "name": "",
            "type": "",
            "onset_year": year,
            "end_year": year,
            "battle_deaths": max(1, int(round(size))),
        }
        for i, (year, size) in enumerate(events.records)
    ]
    columns = ["id", "name", "type", "onset_year", "end_year", "battle_deaths"]
    return dict([_table("corpus", rows, columns, cfg.output_format)])


HANDLERS = {
    "stats": cmd_stats,
    "scan": cmd_scan,
    "predict": cmd_predict,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
}


def run_analysis(cfg: RunConfig, command: str) -> list[Path]:
    """Run ``command`` and write its outputs and manifest into ``cfg.output_dir``.

    All outputs are computed before anything is written; each file is then
    written atomically, the manifest last.
    """
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    cfg.validate()
    if cfg.thresholds is None and command in ("scan", "predict"):
        cfg.thresholds = cfg.resolved_thresholds()
    for attr in ("war_data_path",):
        value = getattr(cfg, attr)
        if value:
            setattr(cfg, attr, str(Path(value).resolve()))
    cfg.population_paths = [str(Path(p).resolve()) for p in cfg.population_paths]

    outputs = HANDLERS[command](cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "declinekit_version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "outputs": sorted(outputs),
    }
    written = []
    for name in sorted(outputs):
        write_atomic(out_dir / name, outputs[name])
        written.append(out_dir / name)
    write_atomic(out_dir / MANIFEST, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(out_dir / MANIFEST)
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _year_pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="declinekit", description="Bayesian changepoint analysis of war sizes.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--wars", dest="war_data_path", help="war CSV file")
    common.add_argument("--population", dest="population_paths", action="append", default=[],
                        help="population CSV (repeatable; earlier files take precedence)")
    common.add_argument("--scale", choices=[s.value for s in Scale], default="raw")
    common.add_argument("--years", dest="year_range", type=_year_pair, default=METHODS_YEARS,
                        help="candidate changepoint years LO:HI (default 1859:1970)")
    common.add_argument("--thresholds", type=_float_list, default=None, help="comma-separated thresholds")
    common.add_argument("--draws", dest="n_draws", type=int, default=DEFAULT_DRAWS)
    common.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 0)")
    common.add_argument("--split-year", type=int, default=DEFAULT_SPLIT)
    common.add_argument("--out", dest="output_dir", default=".")
    common.add_argument("--format", dest="output_format", choices=["csv", "json"], default="csv")
    common.add_argument("--exclude-boundary", action="store_true",
                        help="leave thresholds with a forced 0/1 proportion out of yearly averages")
    common.add_argument("--window", type=int, default=5, help="moving-average window (diagnose)")
    common.add_argument("--n-sim", type=int, default=1000, help="Poisson replicates (diagnose)")
    common.add_argument("--unique-onsets", action="store_true", help="collapse shared onset years (diagnose)")
    common.add_argument("--span", dest="sim_span", type=_year_pair, default=COVERAGE, help="simulate: LO:HI")
    common.add_argument("--rate", dest="sim_rate", type=float, default=3.0, help="simulate: onsets per year")
    common.add_argument("--law", dest="sim_law", default="log_uniform:3:7",
                        help="simulate: log_uniform:LO:HI or power_law:EXPONENT:XMIN")

    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run {name}")
    replay = sub.add_parser("replay", help="rerun a command from its manifest")
    replay.add_argument("manifest")
    replay.add_argument("--out", dest="output_dir", default=None, help="override output directory")
    return parser


def _config_from_args(args) -> RunConfig:
    values = {f.name: getattr(args, f.name) for f in fields(RunConfig) if hasattr(args, f.name)}
    if values.get("seed") is None:
        values["seed"] = _default_seed()
    return RunConfig(**values)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        if args.command == "replay":
            path = Path(args.manifest)
            if not path.is_file():
                raise MissingInputError(f"manifest not found: {path}")
            manifest = json.loads(path.read_text(encoding="utf-8"))
            command = manifest["command"]
            cfg = RunConfig.from_dict(manifest["config"])
            if args.output_dir is not None:
                cfg.output_dir = args.output_dir
        else:
            command = args.command
            cfg = _config_from_args(args)
        for path in run_analysis(cfg, command):
            log.info("wrote %s", path)
        return EXIT_OK
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (SchemaError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ConfigError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    jamguard <subcommand> [--config FILE] [--out DIR] [flags]

Subcommands: roc, se, bler, md-opt, tradeoff-se, tradeoff-bler, validate.
The config file is flat TOML; keys are the :class:`ScenarioConfig` fields
(``channel`` is accepted for ``channels``). Flags override the file.

Exit codes: 0 success, 1 validation failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import ParameterError
from .simulator import ScenarioConfig, ScenarioKind, ScenarioResult, run

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("jamguard")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
CSV_HEADER = ("x_label", "x", "series", "y", "y_stderr")

_LIST_KEYS = {"mp": int, "lp": int, "snr_j_db": float, "pfa": float, "channels": str}
_SCALAR_KEYS = {
    "subcarriers": int, "prb_size": int, "symbols": int, "noise_power": float,
    "snr_ue_db": float, "rate": float, "trials": int, "seed": int, "threads": int,
}


class ConfigError(Exception):
    pass


@dataclasses.dataclass
class RunManifest:
    config: dict
    version: str
    seed: int
    timestamp: str
    outputs: list[str]
    warnings: list[str]
    passed: bool


def _coerce(key: str, value):
    if key == "channel":
        key = "channels"
    if key in _LIST_KEYS:
        kind = _LIST_KEYS[key]
        items = value if isinstance(value, (list, tuple)) else [value]
        try:
            return key, tuple(kind(v).lower() if kind is str else kind(v) for v in items)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    if key in _SCALAR_KEYS:
        kind = _SCALAR_KEYS[key]
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{key!r} must be an integer, got {value!r}")
        try:
            return key, kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def parse_config(kind: str | ScenarioKind, path: str | Path | None = None, **overrides) -> ScenarioConfig:
    """Merge file values and overrides onto the scenario defaults and validate."""
    values: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        for key, value in raw.items():
            if isinstance(value, dict):
                raise ConfigError(f"config must be flat, found table {key!r}")
            k, v = _coerce(key, value)
            values[k] = v
    for key, value in overrides.items():
        if value is not None:
            k, v = _coerce(key, value)
            values[k] = v
    try:
        return ScenarioConfig.defaults(kind, **values)
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(value: float | None) -> str:
    # repr gives the shortest round-tripping form, independent of locale
    return "" if value is None else repr(float(value))


def write_csv(result: ScenarioResult, path: Path):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in result.records:
            writer.writerow((r.x_label, _fmt(r.x), r.series, _fmt(r.y), _fmt(r.y_stderr)))


def _manifest(cfg: ScenarioConfig, result: ScenarioResult, outputs: list[str]) -> RunManifest:
    config = dataclasses.asdict(cfg)
    config["kind"] = cfg.kind.value
    return RunManifest(
        config=config,
        version=__version__,
        seed=cfg.seed,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        outputs=outputs,
        warnings=result.warnings,
        passed=result.passed,
    )


def execute(cfg: ScenarioConfig, out_dir: str | Path) -> int:
    """Run one scenario, write ``<kind>.csv`` and ``<kind>.manifest.json``; return the exit code."""
    result = run(cfg)
    out = Path(out_dir)
    csv_path = out / f"{cfg.kind.value}.csv"
    manifest_path = out / f"{cfg.kind.value}.manifest.json"
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_csv(result, csv_path)
        manifest = _manifest(cfg, result, [str(csv_path)])
        manifest_path.write_text(json.dumps(dataclasses.asdict(manifest), indent=2) + "\n")
    except OSError as exc:
        log.error("cannot write results: %s", exc)
        return EXIT_IO
    log.info("wrote %s (%d records)", csv_path, len(result.records))
    if cfg.kind is ScenarioKind.VALIDATE and not result.passed:
        for msg in result.warnings:
            log.error(msg)
        return EXIT_VALIDATION
    return EXIT_OK


def _split_list(tokens: list[str] | None) -> list[str] | None:
    if tokens is None:
        return None
    return [t for tok in tokens for t in tok.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jamguard", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML config file")
    common.add_argument("--out", default="results", help="output directory (default: results)")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--snr-j-db", nargs="+", help="jammer SNR values in dB")
    common.add_argument("--pfa", nargs="+", help="target false-alarm probabilities")
    common.add_argument("--mp", nargs="+", help="blanked PRBs per slot")
    common.add_argument("--lp", nargs="+", help="jammed PRBs per slot")
    common.add_argument("--channel", nargs="+", choices=("awgn", "rayleigh"), help="channel model(s)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ScenarioKind:
        sub.add_parser(kind.value, parents=[common], help=f"run the {kind.value} scenario")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(
            args.command, args.config,
            seed=args.seed, trials=args.trials,
            snr_j_db=_split_list(args.snr_j_db), pfa=_split_list(args.pfa),
            mp=_split_list(args.mp), lp=_split_list(args.lp), channels=args.channel,
        )
    except ConfigError as exc:
        print(f"jamguard: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg, args.out)

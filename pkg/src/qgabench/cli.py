"""Command-line entry point.

Settings are resolved as preset < config file < command-line flags.  The
config file is flat ``key = value`` text using the flag names with
underscores (``classical_seeds = 100``); ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import shutil
import sys
import tempfile
import time

from . import __version__, kernels
from .hamiltonians import dump_hamiltonians
from .harness import ExperimentSpec, build_hamiltonians, records_to_csv, run_experiment, summary_to_json
from .presets import PRESETS, preset
from .tensor import ValidationError

OUT_ENV = "QGABENCH_OUT"
MANIFEST_SCHEMA_VERSION = 1
EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_INTERRUPT = 0, 1, 2, 130


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _names(text: str) -> tuple:
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (ExperimentSpec field, converter); flags use the same keys with dashes
SPEC_KEYS = {
    "n": ("n", int),
    "c": ("c", int),
    "generations": ("generations", int),
    "qga_seeds": ("qga_seeds", int),
    "classical_seeds": ("classical_seeds", int),
    "p": ("p", float),
    "q": ("q", float),
    "sigma": ("sigma", float),
    "p_m": ("p_m", float),
    "ensemble_size": ("ensemble_size", int),
    "spectrum": ("spectrum", _floats),
    "uqcm_granularity": ("uqcm_granularity", str),
    "cloning_basis": ("cloning_basis", str),
    "algorithms": ("algorithms", _names),
    "hamiltonians": ("hamiltonians", _names),
    "readout": ("qga_readout", str),
    "classical_aggregate": ("classical_aggregate", str),
    "paired_win_rate": ("paired_win_rate", _bool),
    "seed": ("master_seed", int),
}
RUN_KEYS = {"preset": str, "out": str, "workers": int}


class ConfigError(Exception):
    pass


def read_config_file(path: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values = dict(parser["run"])
    unknown = sorted(set(values) - set(SPEC_KEYS) - set(RUN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown} in {path}")
    return values


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qgabench", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list-presets", help="print the available presets")
    run = sub.add_parser("run", help="run an experiment and write CSV/JSON artifacts")
    run.add_argument("--preset", help="named preset (see list-presets)")
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    run.add_argument("--workers", type=int, help="worker processes (default 1)")
    for key in SPEC_KEYS:
        run.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                         help=f"override {SPEC_KEYS[key][0]}")
    return ap


def resolve(args: argparse.Namespace) -> tuple[ExperimentSpec, dict]:
    """Merge preset, config file and flags into a validated spec plus run options."""
    file_values = read_config_file(args.config) if args.config else {}
    flag_values = {k: getattr(args, k) for k in list(SPEC_KEYS) + list(RUN_KEYS) if getattr(args, k, None) is not None}
    merged = {**file_values, **flag_values}
    name = merged.get("preset")
    kwargs = preset(name) if name else {}
    for key, raw in merged.items():
        if key in SPEC_KEYS:
            field_name, conv = SPEC_KEYS[key]
            try:
                kwargs[field_name] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
    try:
        workers = int(merged.get("workers", 1))
    except ValueError:
        raise ConfigError(f"bad value for workers: {merged['workers']!r}") from None
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    out = merged.get("out") or os.environ.get(OUT_ENV) or "results"
    spec = ExperimentSpec(**kwargs)
    return spec, {"preset": name, "out": out, "workers": workers}


def _publish(tmp: str, out: str) -> None:
    """Move a finished artifact directory into place, manifest last."""
    if not os.path.exists(out):
        os.replace(tmp, out)
        return
    if not os.path.isdir(out):
        raise OSError(f"output path {out} exists and is not a directory")
    names = sorted(os.listdir(tmp), key=lambda n: n == "manifest.json")
    for name in names:
        os.replace(os.path.join(tmp, name), os.path.join(out, name))
    os.rmdir(tmp)


def write_artifacts(spec: ExperimentSpec, options: dict, argv: list, workers: int) -> str:
    out = os.path.abspath(options["out"])
    parent = os.path.dirname(out)
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".qgabench-", dir=parent)
    try:
        t0 = time.perf_counter()
        records, summary = run_experiment(spec, workers=workers)
        wall = time.perf_counter() - t0
        with open(os.path.join(tmp, "records.csv"), "w", newline="") as fh:
            fh.write(records_to_csv(records))
        with open(os.path.join(tmp, "summary.json"), "w") as fh:
            fh.write(summary_to_json(summary))
        dump_hamiltonians(build_hamiltonians(spec), os.path.join(tmp, "hamiltonians.json"))
        manifest = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "tool": "qgabench",
            "version": __version__,
            "backend": kernels.BACKEND,
            "argv": argv,
            "preset": options["preset"],
            "master_seed": spec.master_seed,
            "workers": workers,
            "config": spec.to_dict(),
            "wall_time_s": wall,
            "artifacts": ["records.csv", "summary.json", "hamiltonians.json"],
        }
        with open(os.path.join(tmp, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        _publish(tmp, out)
    finally:
        if os.path.exists(tmp):
            shutil.rmtree(tmp, ignore_errors=True)
    return out


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "list-presets":
        for name in sorted(PRESETS):
            p = PRESETS[name]
            print(f"{name}: {', '.join(p['hamiltonians'])}; {len(p['algorithms'])} algorithms; "
                  f"{p['generations']} generations; seeds QGA {p['qga_seeds']} / classical {p['classical_seeds']}")
        return EXIT_OK
    try:
        spec, options = resolve(args)
    except (ConfigError, ValidationError, ValueError, TypeError) as exc:
        print(f"qgabench: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = write_artifacts(spec, options, argv, options["workers"])
    except KeyboardInterrupt:
        print("qgabench: interrupted, no artifacts written", file=sys.stderr)
        return EXIT_INTERRUPT
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        print(f"qgabench: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

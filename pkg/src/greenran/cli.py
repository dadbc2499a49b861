"""Command-line front end: simulate, batch, print-default-config, validate-config.

Exit codes: 0 on success, 1 on configuration errors, 2 on runtime errors.
The GREENRAN_OUT_ROOT environment variable, when set, is prepended to
relative output directories.
"""

import argparse
import dataclasses
import os
import re
import sys

from .config import (
    ALGORITHM_PROPOSED,
    ALGORITHM_REFERENCE,
    ConfigError,
    FullConfig,
    RunManifest,
    parse_config,
    print_default_config,
)
from .engine import Simulation, run_batch
from .outputs import write_batch_outputs, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

_DURATION_RE = re.compile(r"^(\d+)(s|m|h)?$")
_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, None: 1}


def parse_duration(text) -> int:
    m = _DURATION_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse duration {text!r} (use e.g. 3600, 90m, 72h)")
    return int(m.group(1)) * _DURATION_UNITS[m.group(2)]


def _out_dir(path) -> str:
    root = os.environ.get("GREENRAN_OUT_ROOT")
    if root and not os.path.isabs(path):
        return os.path.join(root, path)
    return path


def _load_config(args) -> FullConfig:
    cfg = parse_config(args.config) if args.config else FullConfig()
    run_kwargs = {}
    if getattr(args, "algorithm", None):
        run_kwargs["algorithm"] = args.algorithm
    if getattr(args, "duration", None) is not None:
        run_kwargs["duration_s"] = parse_duration(args.duration)
    if run_kwargs:
        cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, **run_kwargs))
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    cfg.validate()
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    manifest = RunManifest.from_config(cfg)
    log = Simulation(cfg).run()
    paths = write_outputs(log, manifest, _out_dir(args.out))
    print(f"wrote {len(paths)} files to {_out_dir(args.out)}")
    return EXIT_OK


def cmd_batch(args) -> int:
    algorithms = (
        [ALGORITHM_PROPOSED, ALGORITHM_REFERENCE] if args.algorithm == "both" else [args.algorithm]
    )
    args.algorithm = None  # per-run algorithm is set by run_batch
    cfg = _load_config(args)
    manifest = RunManifest.from_config(cfg)
    results = [run_batch(cfg, args.runs, cfg.run.rng_seed, algo) for algo in algorithms]
    paths = write_batch_outputs(results, manifest, _out_dir(args.out), bins=args.bins)
    for result in results:
        s = result.summary()
        print(
            f"{result.algorithm}: mean MBS load share {s['mbs_load_share_mean']:.4f}, "
            f"mean outage share {s['outage_share_mean']:.4f} over {s['n_runs']} runs"
        )
    print(f"wrote {len(paths)} files to {_out_dir(args.out)}")
    return EXIT_OK


def cmd_print_default_config(_args) -> int:
    sys.stdout.write(print_default_config())
    return EXIT_OK


def cmd_validate_config(args) -> int:
    parse_config(args.config)
    print(f"{args.config}: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenran", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation and write its outputs")
    sim.add_argument("--config", help="config file (defaults apply when omitted)")
    sim.add_argument("--algorithm", choices=[ALGORITHM_PROPOSED, ALGORITHM_REFERENCE])
    sim.add_argument("--duration", help="run length, e.g. 72h, 90m, 3600")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    batch = sub.add_parser("batch", help="static placement batch over consecutive seeds")
    batch.add_argument("--config", help="config file (defaults apply when omitted)")
    batch.add_argument("--runs", type=int, default=100)
    batch.add_argument(
        "--algorithm",
        choices=[ALGORITHM_PROPOSED, ALGORITHM_REFERENCE, "both"],
        default="both",
    )
    batch.add_argument("--seed", type=int)
    batch.add_argument("--bins", type=int, default=10)
    batch.add_argument("--out", required=True)
    batch.set_defaults(func=cmd_batch)

    pdc = sub.add_parser("print-default-config", help="emit every key with its default")
    pdc.set_defaults(func=cmd_print_default_config)

    val = sub.add_parser("validate-config", help="parse and validate a config file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""``himit <subcommand> --config FILE [--seed N] [--arm NAME] [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, experiments
from .config import load_config
from .errors import ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

RUNNERS = {
    "fold": experiments.run_fold,
    "qpt": experiments.run_qpt,
    "vqe": experiments.run_vqe,
    "landscape": experiments.run_landscape,
    "pulse": experiments.run_pulse,
}

log = logging.getLogger("himit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="himit", description="Hidden-inverse mitigation experiments")
    parser.add_argument("--version", action="version", version=f"himit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        if name == "pulse":
            p.add_argument("action", nargs="?", choices=["invert", "simulate"])
            p.add_argument("--schedule", help="schedule JSON, overrides the config")
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--arm", help="run a single VQE arm")
        p.add_argument("--out", help="output directory (default: config 'output' or ./himit-out)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _prepare(args) -> tuple[object, Path]:
    cfg = load_config(args.config)
    if cfg.experiment != args.command:
        raise ConfigurationError(f"experiment: config is for {cfg.experiment!r}, not {args.command!r}")
    updates = {}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigurationError("seed: must be non-negative")
        updates["seed"] = args.seed
    if args.command == "pulse":
        if args.action:
            updates["action"] = args.action
        if args.schedule:
            path = Path(args.schedule).resolve()
            if not path.exists():
                raise ConfigurationError(f"schedule: file not found: {args.schedule}")
            updates["schedule"] = str(path)
            updates["gaussian"] = None
    if args.arm is not None:
        if args.command != "vqe":
            raise ConfigurationError("arm: only the vqe subcommand has arms")
        if args.arm not in experiments.ARM_MITIGATION:
            raise ConfigurationError(f"arm: unknown arm {args.arm!r}")
    if updates:
        cfg = cfg.model_copy(update=updates)
    out = Path(args.out or cfg.output or "himit-out")
    return cfg, out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        cfg, out = _prepare(args)
    except ConfigurationError as exc:
        print(f"himit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "vqe":
            experiments.run_vqe(cfg, out, args.arm)
        else:
            RUNNERS[args.command](cfg, out)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"himit: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""``mvlab`` command-line entry point.

Subcommands::

    mvlab run --config <path> [--out <dir>]
    mvlab scenario <name> --out <dir>
    mvlab sweep-sigma-c --out <dir> [--sigma-tol ...] [--t-max ...]
    mvlab particles --config <path> --seed <u64> [--out <dir>]

On success the run summary is printed to stdout as JSON and the exit status
is 0. On failure a JSON error record ``{"error": ..., "type": ..., "exit_code": ...}``
goes to stderr and the exit status is nonzero (2 for usage and configuration
errors, 1 for failures during computation).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from pathlib import Path

from .errors import ConfigParseError, ConfigValidationError, InvalidConfigurationError, MVLabError
from .io import dumps_json

log = logging.getLogger("mvlab")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse prints and exits on its own; route through the JSON error path instead
    def error(self, message):
        raise UsageError(message)


def configure_threads(env=None) -> int:
    """Apply ``MVLAB_THREADS`` (0 or unset = numba's default) and return the count."""
    import numba

    env = os.environ if env is None else env
    raw = env.get("MVLAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidConfigurationError(f"MVLAB_THREADS must be a nonnegative integer, got {raw!r}") from None
    if n < 0:
        raise InvalidConfigurationError(f"MVLAB_THREADS must be a nonnegative integer, got {raw!r}")
    limit = numba.config.NUMBA_NUM_THREADS
    if n == 0:
        return limit
    n = min(n, limit)
    with warnings.catch_warnings():
        # numba reports unavailable optional threading backends on first use
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(n)
    return n


def build_parser() -> argparse.ArgumentParser:
    from .scenarios import SWEEP_DEFAULTS, preset_names

    p = _Parser(prog="mvlab", description="Aggregation-diffusion simulations on the torus.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a configuration document")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, help="output directory (overrides output.directory)")

    sc = sub.add_parser("scenario", help="run a named preset")
    sc.add_argument("name", help=", ".join(preset_names()))
    sc.add_argument("--out", required=True, type=Path)

    sw = sub.add_parser("sweep-sigma-c", help="bisect for the critical noise strength")
    sw.add_argument("--out", required=True, type=Path)
    sw.add_argument("--sigma-lo", type=float, default=SWEEP_DEFAULTS["bracket"][0])
    sw.add_argument("--sigma-hi", type=float, default=SWEEP_DEFAULTS["bracket"][1])
    sw.add_argument("--sigma-tol", type=float, default=SWEEP_DEFAULTS["sigma_tol"])
    sw.add_argument("--t-max", type=float, default=SWEEP_DEFAULTS["t_max"])
    sw.add_argument("--probe-std", type=float, default=SWEEP_DEFAULTS["probe_std"])

    pa = sub.add_parser("particles", help="Euler-Maruyama particle run")
    pa.add_argument("--config", required=True, type=Path)
    pa.add_argument("--seed", required=True, type=_u64)
    pa.add_argument("--out", type=Path)
    return p


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer: {text!r}")
    return v


def _load_config(path: Path):
    from .config import parse_config

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {str(path)!r}: {exc.strerror}") from exc
    return parse_config(text)


def _dispatch(args) -> dict:
    from . import scenarios

    if args.command == "run":
        cfg = _load_config(args.config)
        out = args.out or cfg.output_directory
        if out is None:
            raise UsageError("no output directory: pass --out or set output.directory")
        return scenarios.run_simulation(cfg, out)
    if args.command == "scenario":
        if args.name not in scenarios.preset_names():
            raise UsageError(f"unknown preset {args.name!r}; choose from {', '.join(scenarios.preset_names())}")
        return scenarios.run_scenario(args.name, args.out)
    if args.command == "sweep-sigma-c":
        return scenarios.run_sweep_sigma_c(
            args.out,
            probe_std=args.probe_std,
            bracket=(args.sigma_lo, args.sigma_hi),
            sigma_tol=args.sigma_tol,
            t_max=args.t_max,
        )
    cfg = _load_config(args.config)
    out = args.out or cfg.output_directory
    return scenarios.run_particles(cfg, args.seed, out)


def _error_record(exc: BaseException, code: int) -> str:
    rec = {"error": str(exc), "type": type(exc).__name__, "exit_code": code}
    if isinstance(exc, ConfigParseError):
        rec["key"] = exc.key
    if isinstance(exc, ConfigValidationError):
        rec["path"] = exc.path
    return dumps_json(rec)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        configure_threads()
        summary = _dispatch(args)
    except (UsageError, argparse.ArgumentTypeError, InvalidConfigurationError, ConfigParseError, ConfigValidationError) as exc:
        sys.stderr.write(_error_record(exc, EXIT_USAGE))
        return EXIT_USAGE
    except (MVLabError, ArithmeticError, OSError) as exc:
        sys.stderr.write(_error_record(exc, EXIT_FAILURE))
        return EXIT_FAILURE
    sys.stdout.write(dumps_json(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

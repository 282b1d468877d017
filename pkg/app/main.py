"""
treeharm – command-line runner with plugin auto-discovery.

Plugins are Python modules in app/plugins/ that expose a top-level `plugin`
attribute (an instance of ExperimentPlugin).  They are loaded alphabetically
and sorted by their `order` field; each one becomes a subcommand.
"""

import argparse
import importlib
import logging
import os
import pkgutil
import sys

# Ensure project root is importable
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)

from app import config
from app.plugins.base import EXIT_OK, EXIT_USAGE, ExperimentPlugin
from treeharm.errors import ConfigError, StripTooNarrowError, TreeHarmError
from treeharm.parallel import thread_count

logger = logging.getLogger("treeharm.cli")

LOG_FORMAT = "%(asctime)s [%(levelname)-5s] %(name)s – %(message)s"
LOG_DATEFMT = "%H:%M:%S"

# flag dest → config key; every one defaults to None so config files are not overridden
COMMON_FLAGS = [
    ("--q", dict(type=int, help="tree degree: every vertex has q+1 neighbours")),
    ("--p", dict(type=float, help="Lebesgue exponent, 1 < p < inf")),
    ("--radius", dict(type=int, help="ball radius R")),
    ("--window", dict(type=int, help="lattice window half-length L")),
    ("--nodes", dict(type=int, help="quadrature nodes N (even, >= 4)")),
    ("--depth", dict(type=int, help="boundary cylinder depth D (default: radius)")),
    ("--symbol", dict(help="symbol spec, e.g. one, trig:0,1, pole-halfwidth:0.1, parity*trig:1,0.5")),
    ("--seed", dict(type=int, help="master seed")),
    ("--tol", dict(type=float, help="pass/fail tolerance")),
    ("--out", dict(help="output CSV path")),
    ("--max-iters", dict(type=int, dest="max_iters", help="p-norm iteration cap")),
    ("--radii", dict(help="comma list of radii for norm-sweep")),
    ("--ps", dict(help="comma list of exponents for norm-sweep")),
    ("--z-values", dict(dest="z_values", help="comma list of spectral points (a+bj allowed)")),
    ("--d-max", dict(type=int, dest="d_max", help="largest distance in spherical-table")),
]


def setup_logging(verbosity: int = 0):
    level = logging.INFO
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATEFMT, stream=sys.stderr, force=True)


def _discover_plugins() -> list[ExperimentPlugin]:
    """Import every module in app.plugins and collect `plugin` instances."""
    plugins_pkg = importlib.import_module("app.plugins")
    plugins_dir = os.path.dirname(plugins_pkg.__file__)
    found: list[ExperimentPlugin] = []

    for info in pkgutil.iter_modules([plugins_dir]):
        if info.name in ("__init__", "base"):
            continue
        try:
            mod = importlib.import_module(f"app.plugins.{info.name}")
            obj = getattr(mod, "plugin", None)
            if isinstance(obj, ExperimentPlugin):
                found.append(obj)
        except Exception as exc:
            logger.warning("failed to load plugin '%s': %s", info.name, exc)

    found.sort(key=lambda p: p.order)
    return found


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="flat key = value config file")
    for flag, kw in COMMON_FLAGS:
        common.add_argument(flag, default=None, **kw)
    common.add_argument("--plot", action="store_true", default=None, help="also write <out>.plot.py")
    common.add_argument("--timing", action="store_true", default=None, help="record runtimes in the CSV")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings only, no progress bars")
    return common


def create_parser(plugins: list[ExperimentPlugin]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeharm",
        description="Harmonic analysis and pseudo-differential operators on homogeneous trees.",
    )
    parser.add_argument("--list", action="store_true", help="list the available commands and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    common = _common_parser()
    for p in plugins:
        sp = sub.add_parser(p.id, help=p.name, description=p.name, parents=[common])
        p.add_arguments(sp)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = set(config.DEFAULTS) & set(vars(args))
    return {k: getattr(args, k) for k in keys}


def main(argv: list[str] | None = None) -> int:
    plugins = _discover_plugins()
    parser = create_parser(plugins)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.list:
        for p in plugins:
            info = p.manifest()
            print(f"  {info['id']:<18} {info['name']}")
        return EXIT_OK
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    setup_logging(1 if args.verbose else -1 if args.quiet else 0)
    plugin = next(p for p in plugins if p.id == args.command)

    try:
        cfg = config.build(args.config, _overrides(args))
        threads = thread_count()
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE

    plugin.progress = not args.quiet and sys.stderr.isatty()
    logger.info("%s: q=%d N=%d symbol=%s seed=%d threads=%d",
                plugin.id, cfg.q, cfg.nodes, cfg.symbol, cfg.seed, threads)
    try:
        return plugin.run(cfg)
    except StripTooNarrowError as exc:
        logger.error("strip too narrow: %s", exc)
        return EXIT_USAGE
    except TreeHarmError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_USAGE

"""命令行入口.

    hawkes-stein run CONFIG [--out-dir DIR] [--seed N] [--workers N]
                            [--log-level LEVEL] [--dump-paths N]
    hawkes-stein validate CONFIG

退出码: 0 成功, 1 配置错误, 2 运行时不变量违例, 3 I/O 错误.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import TYPE_CHECKING

from .config import load_config
from .exceptions import ConfigError
from .harness import EXIT_CONFIG, EXIT_OK, run_experiment

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def configure_logging(level: str) -> None:
    """为 hawkes_stein 包配置单个 stderr 处理器."""
    root = logging.getLogger("hawkes_stein")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False


def build_parser() -> argparse.ArgumentParser:
    """构造参数解析器."""
    parser = argparse.ArgumentParser(
        prog="hawkes-stein",
        description="Simulate compound Hawkes processes and check Stein-Malliavin Wasserstein bounds.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the experiment described by a configuration file")
    run.add_argument("config", help="path to the INI configuration")
    run.add_argument("--out-dir", help="override [experiment] out_dir")
    run.add_argument("--seed", type=int, help="override [experiment] seed")
    run.add_argument("--workers", type=int, help="override [experiment] workers")
    run.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper, help="override [experiment] log_level")
    run.add_argument("--dump-paths", type=int, help="write this many base paths as CSV")

    validate = commands.add_parser("validate", help="parse and validate a configuration file")
    validate.add_argument("config", help="path to the INI configuration")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """命令行主函数, 返回退出码."""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as e:
        configure_logging(getattr(args, "log_level", None) or "INFO")
        for issue in e.issues:
            logger.error("%s: %s", args.config, issue)
        return EXIT_CONFIG

    if args.command == "validate":
        configure_logging("INFO")
        logger.info("%s: ok (kind=%s, config hash %s)", args.config, config.kind.value, config.config_hash())
        return EXIT_OK

    if args.seed is not None and not 0 <= args.seed < 2**64:
        configure_logging("INFO")
        logger.error("--seed must lie in [0, 2^64)")
        return EXIT_CONFIG
    if args.workers is not None and args.workers < 1:
        configure_logging("INFO")
        logger.error("--workers must be >= 1")
        return EXIT_CONFIG
    if args.dump_paths is not None and args.dump_paths < 0:
        configure_logging("INFO")
        logger.error("--dump-paths must be >= 0")
        return EXIT_CONFIG

    config = config.with_overrides(
        out_dir=args.out_dir,
        seed=args.seed,
        workers=args.workers,
        log_level=args.log_level,
        dump_paths=args.dump_paths,
    )
    configure_logging(config.log_level)
    return run_experiment(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line entry point: ``ssc <subcommand> --config cfg.json``."""

import argparse
import logging
import sys
import time

from .commands import COMMANDS
from .config import ConfigError, load_config

log = logging.getLogger("greedyssc")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssc", description="Greedy sparse subspace clustering experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0])
        p.add_argument("--config", help="JSON file with config overrides")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--scale", type=float, help="shrink n, d and N_l by this factor")
        p.add_argument("--convention", choices=["lemma", "printed"],
                       help="noise-penalty convention for certificates")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        cfg = load_config(args.command, args.config, seed=args.seed, out=args.out,
                          scale=args.scale, convention=args.convention)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"ssc {args.command}: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        written = COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"ssc {args.command}: {exc}", file=sys.stderr)
        return 1
    log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    for path in written.values():
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

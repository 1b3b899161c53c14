"""Command-line entry point: dlab <config.json> [--out DIR] [--threads K].

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 non-convergence.
Failures emit one machine-readable JSON object on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .runner import run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dlab",
        description="Coupled short-wave/long-wave simulations and "
                    "normalized solitary-wave solvers.",
    )
    parser.add_argument("config", help="path to a JSON run configuration")
    parser.add_argument("--out", default=None,
                        help="output directory (default: config 'output' or CWD)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for sweep tasks "
                             "(default: DLAB_THREADS or 1)")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("DLAB_THREADS", "1"))

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(json.dumps({"error": {"kind": "config", "message": str(exc)}}))
        return 2

    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(json.dumps({"error": {"kind": "config", "message": str(exc)}}))
        return 2

    out_dir = args.out or cfg.output or "."
    result = run(cfg, out_dir, threads=threads)
    if result.exit_code != 0:
        print(json.dumps({"error": result.error}, sort_keys=True))
    else:
        print(json.dumps({"verdicts": result.verdicts, "out": str(out_dir)},
                         sort_keys=True, default=str))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run every shipped experiment preset in sequence.

Writes CSVs and plot data under out/.  Pass --threads to parallelize the
sweep rows; pass --only <substring> to restrict to matching presets.
"""

import argparse
import sys
from pathlib import Path

from rbfmix.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

COMMANDS = {
    "solve": ["single_quadratic.toml"],
    "sweep": ["sweep_r02_c0.toml", "sweep_r02_c2.toml",
              "sweep_r01_c0.toml", "sweep_r01_c2.toml", "sweep_trig_c2.toml"],
    "interp-study": ["interp_study_c0.toml"],
    "infsup": ["infsup_probe.toml"],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--only", default=None,
                        help="run only presets whose filename contains this")
    args = parser.parse_args()
    worst = 0
    for command, names in COMMANDS.items():
        for name in names:
            if args.only and args.only not in name:
                continue
            argv = [command, "--config", str(CONFIG_DIR / name)]
            if command == "sweep":
                argv += ["--threads", str(args.threads)]
            print(f"== rbfmix {' '.join(argv)}")
            code = cli_main(argv)
            worst = max(worst, code)
            print(f"== exit {code}\n")
    return worst


if __name__ == "__main__":
    sys.exit(main())

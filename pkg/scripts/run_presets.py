"""Run every preset (or the ones named on the command line) into out/<preset>/."""

import sys
import time
from pathlib import Path

from maxdaemon import cli

ROOT = Path(__file__).resolve().parents[1]


def main(names):
    presets = sorted(ROOT.glob("presets/*.cfg"))
    if names:
        presets = [p for p in presets if p.stem in names]
    status = 0
    for p in presets:
        command = next(line.split("=", 1)[1].strip() for line in p.read_text().splitlines() if line.startswith("command"))
        t0 = time.perf_counter()
        code = cli.main([command, "--config", str(p), "--out", str(ROOT / "out" / p.stem)])
        print(f"{p.stem:28s} {command:10s} exit={code} {time.perf_counter() - t0:6.1f}s")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

#!/usr/bin/env python3
"""Run the three collapse regimes and write CSV logs into results/.

Each regime produces collapse_<kind>.csv plus a manifest; render figures
afterwards with the plots tool, e.g.

    gilab-plots --kind gh-convergence --input results/collapse_ray.csv \
        --output results/collapse_ray.svg
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gilab.cli import main  # noqa: E402

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
OUT = Path(__file__).resolve().parent.parent / "results"


def run() -> int:
    OUT.mkdir(exist_ok=True)
    rc = 0
    for kind in ("sk", "flat", "ray"):
        cfg = CONFIGS / f"collapse_{kind}.cfg"
        out = OUT / f"collapse_{kind}.csv"
        print(f"== regime {kind}")
        rc |= main(["collapse", "--config", str(cfg), "--output", str(out)])
    return rc


if __name__ == "__main__":
    sys.exit(run())

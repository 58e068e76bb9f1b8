#!/usr/bin/env python3
"""Measure sup|f_eps| over a decreasing eps family and fit the decay law.

Writes results/decay.csv (columns eps, sup_f) ready for
`gilab-plots --kind decay-fit --x-column eps --y-column sup_f`.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gilab.ansatz import SemiFlatParams  # noqa: E402
from gilab.gluing import GluingConfig, decay_fit, f_eps_sup  # noqa: E402

SINGULAR = (-3.2 + 1.6j, -3.2 + 3.9j)
EPS_LIST = (0.2, 0.1, 0.05, 0.025)
OUT = Path(__file__).resolve().parent.parent / "results"


def run() -> int:
    OUT.mkdir(exist_ok=True)
    configs = [GluingConfig(sf=SemiFlatParams(1, e), singular_points=SINGULAR)
               for e in EPS_LIST]
    sups = [f_eps_sup(c, n=1500, seed=2024) for c in configs]
    lines = ["eps,sup_f"] + [f"{e},{s:.12g}" for e, s in zip(EPS_LIST, sups)]
    path = OUT / "decay.csv"
    path.write_text("\n".join(lines) + "\n")
    slope, r2 = decay_fit(configs, sups=sups)
    print(f"wrote {path}")
    print(f"decay fit: slope {slope:.3f} against eps^-1/2, r2 = {r2:.5f}")
    return 0 if slope < 0 and r2 > 0.9 else 1


if __name__ == "__main__":
    sys.exit(run())

#!/usr/bin/env python3
"""Survey the scaling exponents: ball volumes and fiber diameters.

Writes results/volume_growth.csv and results/fiber_diameters.csv for the
exponent-fit figure kind.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gilab.ansatz import SemiFlatParams  # noqa: E402
from gilab.fields import Box, MetricField  # noqa: E402
from gilab.riemann import ball_volume, fiber_diameter, fit_exponent  # noqa: E402

OUT = Path(__file__).resolve().parent.parent / "results"


def run() -> int:
    OUT.mkdir(exist_ok=True)
    field = MetricField("semi-flat", SemiFlatParams(1, 1.0))
    region = Box(lo=(-28.0, 0.0, 0.0, 0.0), hi=(-0.7, 2 * np.pi, 1.0, 1.0),
                 periodic=((1, 2 * np.pi), (2, 1.0), (3, 1.0)))
    x0 = np.array([-2.0, np.pi, 0.2, 0.3])
    rows = ["r,vol,stderr"]
    pairs = []
    for r in (4.0, 8.0, 16.0, 32.0):
        vol, err = ball_volume(field, x0, r, region, samples=2600, seed=2024,
                               k=14)
        rows.append(f"{r},{vol:.8g},{err:.3g}")
        pairs.append((r, vol))
    (OUT / "volume_growth.csv").write_text("\n".join(rows) + "\n")
    fit = fit_exponent(pairs)
    print(f"volume growth exponent {fit.exponent:.3f} (expect 4/3)")

    rows = ["eps,diam"]
    dia_pairs = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        dia = fiber_diameter(MetricField("semi-flat", SemiFlatParams(1, eps)),
                             np.exp(-4.0))
        rows.append(f"{eps},{dia:.10g}")
        dia_pairs.append((eps, dia))
    (OUT / "fiber_diameters.csv").write_text("\n".join(rows) + "\n")
    fit2 = fit_exponent(dia_pairs)
    print(f"fiber diameter exponent in eps {fit2.exponent:.3f} (expect 1/2)")
    return 0


if __name__ == "__main__":
    sys.exit(run())

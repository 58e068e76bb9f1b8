"""Command-line front end: check / eval / collapse / periods / fit.

All results are CSV (stdout or files) plus a JSON manifest sidecar for
file outputs.  Identical (config, seed) give byte-identical CSV contents;
wall-clock columns are zeroed under --canonical (or GILAB_CANONICAL=1),
which the determinism contract refers to.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import checks
from .ansatz import (CalabiParams, CalabiPoint, calabi_forms, sf_forms,
                     ov_forms)
from .collapse import run_regime
from .config import (default_seed, fmt_float, gluing_from, ov_params_from,
                     parse_config, regime_from, sf_params_from,
                     weierstrass_from, write_csv, write_manifest)
from .errors import GilabError
from .fields import MetricField
from .geom import ChartPoint, metric_from_kahler, triple_residuals
from .gluing import f_eps as f_eps_of, glued_ansatz
from .periods import continue_periods, discriminant_roots, sk_segment_length
from .riemann import fit_exponent

EVAL_COLUMNS = (["family", "zeta_re", "zeta_im", "x_re", "x_im"]
                + [f"g{i}{j}" for i in range(1, 5) for j in range(i, 5)]
                + ["r1", "r2", "r3", "f_eps"])

COLLAPSE_COLUMNS = ["i", "im_tau", "c", "eps", "gh_lower", "gh_upper",
                    "fiber_diam_max", "n_points", "seed", "runtime_s", "error"]

PERIODS_COLUMNS = ["z_re", "z_im", "tau_re", "tau_im", "sheet",
                   "nearest_disc_root", "sk_dist_to_root"]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gilab",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    p_check = sub.add_parser("check", help="run an invariant suite")
    p_check.add_argument("suite", choices=sorted(checks.SUITES))
    p_check.add_argument("--seed", type=int, default=None)

    p_eval = sub.add_parser("eval", help="evaluate a metric family at a point")
    p_eval.add_argument("--family", required=True)
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--point", required=True,
                        help="zeta_re,zeta_im,x_re,x_im")

    p_col = sub.add_parser("collapse", help="run a collapse regime")
    p_col.add_argument("--config", required=True)
    p_col.add_argument("--output", default=None)
    p_col.add_argument("--output-dir", default=".")
    p_col.add_argument("--canonical", action="store_true",
                       help="zero wall-clock columns for byte determinism")

    p_per = sub.add_parser("periods", help="periods and monodromy along a path")
    p_per.add_argument("--config", required=True)
    p_per.add_argument("--output", default=None)

    p_fit = sub.add_parser("fit", help="log-log exponent fit of CSV columns")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--x", required=True)
    p_fit.add_argument("--y", required=True)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return {
            "check": _cmd_check, "eval": _cmd_eval, "collapse": _cmd_collapse,
            "periods": _cmd_periods, "fit": _cmd_fit,
        }[args.command](args)
    except GilabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


def _cmd_check(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    results = checks.run_suite(args.suite, seed=seed)
    n_fail = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {args.suite}.{name}"
        if detail:
            line += f"  ({detail})"
        print(line)
        n_fail += 0 if ok else 1
    print(f"{args.suite}: {len(results) - n_fail}/{len(results)} checks passed")
    return 0 if n_fail == 0 else 1


def _cmd_eval(args) -> int:
    cfg = parse_config(args.config)
    vals = [float(v) for v in args.point.split(",")]
    if len(vals) != 4:
        raise ValueError("--point needs 4 comma-separated reals")
    family = args.family
    fq = np.array(vals)
    f_val = ""
    if family in ("semi-flat", "generalized-sf"):
        params = sf_params_from(cfg)
        trip = sf_forms(params, ChartPoint(complex(vals[0], vals[1]),
                                           complex(vals[2], vals[3])))
        field = MetricField(family, params)
    elif family == "calabi":
        params = CalabiParams(d=int(cfg.get("calabi", {}).get("d", 1)),
                              tau=complex(*[float(t) for t in
                                            cfg.get("calabi", {}).get(
                                                "tau", "0 1").split()]))
        trip = calabi_forms(params, CalabiPoint(complex(vals[0], vals[1]),
                                                complex(vals[2], vals[3])))
        field = MetricField("calabi", params)
    elif family == "ov":
        fp = ov_params_from(cfg)
        trip = ov_forms(fp.ov, ChartPoint(complex(vals[0], vals[1]),
                                          complex(vals[2], vals[3])),
                        center=fp.center, d=fp.d, b_offset=fp.b_offset)
        field = MetricField("ov", fp)
    elif family == "glued":
        config = gluing_from(cfg)
        p = ChartPoint(complex(vals[0], vals[1]), complex(vals[2], vals[3]))
        trip = glued_ansatz(config, p)
        f_val = fmt_float(f_eps_of(config, p))
        field = MetricField("glued", config)
    elif family == "twisted":
        from .gluing import model_cocycle, twist_forms
        config = gluing_from(cfg)
        b0 = float(cfg.get("cocycle", {}).get("b0", "0.0"))
        coc = model_cocycle(b0, config.sf.d)
        p = ChartPoint(complex(vals[0], vals[1]), complex(vals[2], vals[3]))
        trip = twist_forms(coc, config, p)
        field = MetricField("twisted", config, cocycle=coc)
    else:
        raise ValueError(f"unknown family {family!r}")
    J = field.complex_structure(trip)
    from .geom import ComplexStructureValue
    g = metric_from_kahler(trip.omega, ComplexStructureValue(J)).matrix
    r1, r2, r3 = triple_residuals(trip.omega, trip.bigOmega)
    cells = [family] + [fmt_float(v) for v in vals]
    cells += [fmt_float(g[i, j]) for i in range(4) for j in range(i, 4)]
    cells += [fmt_float(r1), fmt_float(r2), fmt_float(r3), f_val]
    print(",".join(EVAL_COLUMNS))
    print(",".join(cells))
    return 0


def _cmd_collapse(args) -> int:
    cfg = parse_config(args.config)
    regime = regime_from(cfg)
    canonical = args.canonical or os.environ.get("GILAB_CANONICAL") == "1"
    rows = run_regime(regime)
    out_rows = []
    for r in rows:
        rt = 0.0 if canonical else round(r.get("runtime_s", 0.0), 3)
        out_rows.append([r["i"], r["im_tau"], r.get("c"), r.get("eps"),
                         r.get("gh_lower"), r.get("gh_upper"),
                         r.get("fiber_diam_max"), r.get("n_points", 0),
                         r.get("seed", 0), rt, r.get("error", "")])
    if args.output:
        path = Path(args.output)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = Path(args.output_dir) / f"collapse_{regime.kind}_{stamp}.csv"
    write_csv(path, COLLAPSE_COLUMNS, out_rows)
    extra = {"regime": regime.kind,
             "sk_scales": [r.get("sk_scale") for r in rows]}
    write_manifest(path, "collapse", _resolved(cfg), COLLAPSE_COLUMNS, extra)
    ghu = [r.get("gh_upper") for r in rows if not r.get("error")]
    monotone = all(b < a for a, b in zip(ghu, ghu[1:])) if len(ghu) > 1 else False
    final_ratio = ghu[-1] / regime.R if ghu else float("nan")
    print(f"wrote {path}")
    print(f"monotone gh_upper: {monotone}; final gh_upper/R = "
          f"{fmt_float(final_ratio)}")
    return 0


def _cmd_periods(args) -> int:
    cfg = parse_config(args.config)
    data = weierstrass_from(cfg)
    sf = sf_params_from(cfg)
    sec = cfg.get("path", {})
    center = complex(*[float(t) for t in sec.get("center", "0 0").split()])
    radius = float(sec.get("radius", "0.5"))
    steps = int(sec.get("steps", "1000"))
    ang = np.linspace(0.0, 2.0 * np.pi, steps + 1)
    path_pts = center + radius * np.exp(1j * ang)
    tracked, mono = continue_periods(data, path_pts)
    roots = discriminant_roots(data)
    rows = []
    for z, (t1, t2) in zip(path_pts, tracked):
        tau = t2 / t1
        sheet = int(np.floor((np.angle(z - center) + 1e-12) / (2 * np.pi)))
        if roots:
            dists = [abs(z - r) for r, _ in roots]
            jmin = int(np.argmin(dists))
            try:
                skd = sk_segment_length(sf, complex(z), roots[jmin][0])
            except GilabError:
                skd = float("nan")
            near, skv = jmin, skd
        else:
            near, skv = -1, float("nan")
        rows.append([z.real, z.imag, tau.real, tau.imag, sheet, near, skv])
    path = Path(args.output) if args.output else Path("periods.csv")
    write_csv(path, PERIODS_COLUMNS, rows)
    write_manifest(path, "periods", _resolved(cfg), PERIODS_COLUMNS,
                   {"monodromy": mono.tolist(),
                    "disc_roots": [[r.real, r.imag, m] for r, m in roots]})
    print(f"wrote {path}")
    print(f"monodromy matrix: {mono.tolist()}")
    return 0


def _cmd_fit(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if args.x not in header or args.y not in header:
            from .errors import SchemaMismatch
            raise SchemaMismatch(
                f"columns {args.x!r}/{args.y!r} not in header {header}")
        ix, iy = header.index(args.x), header.index(args.y)
        pairs = []
        for line in fh:
            cells = line.strip().split(",")
            if len(cells) <= max(ix, iy) or not cells[ix] or not cells[iy]:
                continue
            try:
                pairs.append((float(cells[ix]), float(cells[iy])))
            except ValueError:
                continue
    fit = fit_exponent(pairs)
    print("exponent,r2,window_lo,window_hi")
    print(",".join(fmt_float(v) for v in
                   [fit.exponent, fit.r2, fit.window[0], fit.window[1]]))
    return 0


def _resolved(cfg: dict) -> dict:
    return {s: dict(kv) for s, kv in cfg.items()}


if __name__ == "__main__":
    sys.exit(main())

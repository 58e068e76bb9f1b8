"""Run configuration: flat key-value files, manifests, atomic CSV output."""

from __future__ import annotations

import configparser
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import OVParams, SemiFlatParams
from .collapse import CollapseRegime, SamplingBudget
from .fields import OVFieldParams
from .gluing import GluingConfig
from .periods import WeierstrassData

SCHEMA_VERSION = 1


def default_seed() -> int:
    return int(os.environ.get("GILAB_SEED", "2024"))


def thread_cap() -> int:
    return int(os.environ.get("GILAB_THREADS", "0")) or os.cpu_count() or 1


def parse_config(path: str | Path) -> dict[str, dict[str, str]]:
    """Flat key-value configuration with [sections] and # comments."""
    cp = configparser.ConfigParser(comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",),
                                   interpolation=None)
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    return {s: dict(cp.items(s)) for s in cp.sections()}


def _get(cfg: dict, section: str, key: str, default=None):
    return cfg.get(section, {}).get(key, default)


def _floats(s: str) -> list[float]:
    return [float(t) for t in s.replace(",", " ").split()]


def _complexes(s: str) -> list[complex]:
    vals = _floats(s)
    if len(vals) % 2:
        raise ValueError("complex list needs an even number of reals")
    return [complex(a, b) for a, b in zip(vals[::2], vals[1::2])]


def sf_params_from(cfg: dict, section: str = "semiflat") -> SemiFlatParams:
    return SemiFlatParams(
        d=int(_get(cfg, section, "d", 1)),
        eps=float(_get(cfg, section, "eps", 0.1)),
        b0=float(_get(cfg, section, "b0", 0.0)))


def ov_params_from(cfg: dict, section: str = "ov") -> OVFieldParams:
    ov = OVParams(eps=float(_get(cfg, section, "eps", 0.1)),
                  series_terms=int(_get(cfg, section, "series_terms", 64)),
                  core_radius=float(_get(cfg, section, "core_radius", 1.0)))
    center = _complexes(_get(cfg, section, "center", "-3.0 0.0"))[0]
    return OVFieldParams(ov=ov, center=center,
                         d=int(_get(cfg, section, "d", 1)),
                         b_offset=float(_get(cfg, section, "b_offset", 0.0)))


def gluing_from(cfg: dict, section: str = "gluing") -> GluingConfig:
    sf = sf_params_from(cfg)
    pts = tuple(_complexes(_get(cfg, section, "singular_points",
                                "-3.2 1.6 -3.2 3.9")))
    kwargs = {}
    if _get(cfg, section, "r_outer"):
        kwargs["r_outer"] = tuple(_floats(_get(cfg, section, "r_outer")))
    if _get(cfg, section, "r_inner"):
        kwargs["r_inner"] = tuple(_floats(_get(cfg, section, "r_inner")))
    return GluingConfig(
        sf=sf, singular_points=pts,
        p_exp=float(_get(cfg, section, "p_exp", 0.5)),
        series_terms=int(_get(cfg, section, "series_terms", 64)),
        radius_scale=float(_get(cfg, section, "radius_scale", 0.5)),
        **kwargs)


def regime_from(cfg: dict, section: str = "collapse") -> CollapseRegime:
    kind = _get(cfg, section, "kind", "special-kahler")
    i_lo = int(_get(cfg, section, "i_start", 3))
    i_hi = int(_get(cfg, section, "i_stop", 7))
    taus = tuple(complex(0.0, 2.0**i) for i in range(i_lo, i_hi + 1))
    budget = SamplingBudget(
        n_points=int(_get(cfg, section, "n_points", 640)),
        limit_points=int(_get(cfg, section, "limit_points", 500)),
        seed=int(_get(cfg, section, "seed", default_seed())),
        k=int(_get(cfg, section, "k", 14)) or None,
        growth=float(_get(cfg, section, "growth", 1.2)))
    kwargs = {}
    if _get(cfg, section, "c_rule"):
        kwargs["c_rule"] = _get(cfg, section, "c_rule")
    return CollapseRegime(
        kind=kind, d=int(_get(cfg, section, "d", 1)), tau_seq=taus,
        R=float(_get(cfg, section, "r", 1.0 if kind != "flat-plane" else 0.8)),
        budget=budget,
        basepoint_rule=_get(cfg, section, "basepoint_rule", "L=4.0"),
        **kwargs)


def weierstrass_from(cfg: dict, section: str = "weierstrass") -> WeierstrassData:
    g2 = tuple(complex(v) for v in _complexes(_get(cfg, section, "g2", "4.0 0.0")))
    g3 = tuple(complex(v) for v in _complexes(_get(cfg, section, "g3", "0.0 0.0")))
    return WeierstrassData(g2_coeffs=g2, g3_coeffs=g3)


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    xf = float(x)
    if np.isnan(xf):
        return "nan"
    return format(xf, ".12g")


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if not isinstance(v, (int, np.integer))
                              else str(int(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_manifest(csv_path: str | Path, command: str, resolved: dict,
                   columns: list[str], extra: dict | None = None) -> Path:
    path = Path(str(csv_path) + ".manifest.json")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "command": command,
        "columns": columns,
        "config": resolved,
        "env": {"seed_default": default_seed(), "thread_cap": thread_cap()},
    }
    if extra:
        doc.update(extra)
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True,
                                       default=str) + "\n")
    return path

"""Finite metric spaces, GH distance estimation, collapse experiments.

GH distances are estimated through correspondences: gh_upper completes an
index map to a surjective correspondence and returns half its distortion;
gh_lower combines the diameter gap with a distance-distribution bound.
The distribution bound assumes comparably uniform sampling of both
spaces; it is an estimator, not a certificate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np
from scipy.stats import qmc

from .ansatz import SemiFlatParams
from .errors import EmptyBall, InsufficientData
from .fields import Box, MetricField
from .gluing import GluingConfig
from .riemann import PointCloud, cloud_sample, fiber_diameter, graph_distance

TWO_SQRT2_PI = 2.0 * np.sqrt(2.0) * np.pi


@dataclass(frozen=True)
class FiniteMetricSpace:
    """n points with a symmetric distance matrix and a basepoint index."""

    dist: np.ndarray
    basepoint: int = 0

    def __post_init__(self):
        D = np.asarray(self.dist, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.allclose(D, D.T, rtol=1e-9, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        D = 0.5 * (D + D.T)
        if np.any(np.diag(D) != 0.0):
            raise ValueError("diagonal must vanish")
        if np.any(D < 0):
            raise ValueError("distances must be nonnegative")
        if not (0 <= self.basepoint < len(D)):
            raise ValueError("basepoint out of range")
        object.__setattr__(self, "dist", D)

    @property
    def n(self) -> int:
        return len(self.dist)

    @property
    def diameter(self) -> float:
        return float(np.max(self.dist))

    def check_triangle(self, rng: np.random.Generator, trials: int = 2000,
                       slack: float = 1e-9) -> bool:
        n = self.n
        if n < 3:
            return True
        idx = rng.integers(0, n, size=(trials, 3))
        D = self.dist
        lhs = D[idx[:, 0], idx[:, 2]]
        rhs = D[idx[:, 0], idx[:, 1]] + D[idx[:, 1], idx[:, 2]]
        scale = max(1.0, self.diameter)
        return bool(np.all(lhs <= rhs + slack * scale))


@dataclass(frozen=True)
class GHBounds:
    """Estimator sandwich for one GH comparison."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper):
            raise ValueError("need 0 <= lower <= upper")


@dataclass(frozen=True)
class Correspondence:
    """Surjective relation between two index sets."""

    pairs: tuple[tuple[int, int], ...]

    def validate(self, nA: int, nB: int) -> None:
        a = {i for i, _ in self.pairs}
        b = {j for _, j in self.pairs}
        if a != set(range(nA)) or b != set(range(nB)):
            raise ValueError("correspondence is not surjective on both sides")


def pointed_ball(cloud: PointCloud, R: float,
                 dist: np.ndarray | None = None) -> tuple[FiniteMetricSpace, np.ndarray]:
    """Closed R-ball around the cloud basepoint in the ambient graph metric.

    Returns the finite metric space and the member indices into the cloud.
    """
    if R < 0:
        raise EmptyBall("negative radius")
    if dist is None:
        dist = graph_distance(cloud)
    d0 = dist[cloud.basepoint]
    members = np.where(d0 <= R)[0]
    if len(members) == 0:
        raise EmptyBall("no points within radius R")
    sub = dist[np.ix_(members, members)]
    base = int(np.where(members == cloud.basepoint)[0][0])
    return FiniteMetricSpace(sub, basepoint=base), members


def correspondence_from_map(A: FiniteMetricSpace, B: FiniteMetricSpace,
                            phi: np.ndarray) -> Correspondence:
    """Complete a total map A->B to a surjective correspondence.

    Unmatched B-points are paired with the A-partner of their nearest
    matched B-point; the basepoints are paired as well.
    """
    phi = np.asarray(phi, dtype=int)
    if len(phi) != A.n:
        raise ValueError("phi must be total on A")
    pairs = [(i, int(phi[i])) for i in range(A.n)]
    matched = np.unique(phi)
    unmatched = [j for j in range(B.n) if j not in set(matched.tolist())]
    if unmatched:
        back = {}
        for i, j in enumerate(phi):
            back.setdefault(int(j), int(i))
        for j in unmatched:
            jm = int(matched[np.argmin(B.dist[j, matched])])
            pairs.append((back[jm], j))
    pairs.append((A.basepoint, B.basepoint))
    return Correspondence(tuple(dict.fromkeys(pairs)))


def correspondence_distortion(A: FiniteMetricSpace, B: FiniteMetricSpace,
                              corr: Correspondence) -> float:
    ia = np.array([p[0] for p in corr.pairs])
    ib = np.array([p[1] for p in corr.pairs])
    DA = A.dist[np.ix_(ia, ia)]
    DB = B.dist[np.ix_(ib, ib)]
    return float(np.max(np.abs(DA - DB)))


def gh_upper(A: FiniteMetricSpace, B: FiniteMetricSpace,
             phi: np.ndarray) -> float:
    """Upper bound: half the distortion of the completed correspondence."""
    corr = correspondence_from_map(A, B, phi)
    return 0.5 * correspondence_distortion(A, B, corr)


def _value_set_mismatch(A: FiniteMetricSpace, B: FiniteMetricSpace) -> float:
    """Hausdorff distance between the sorted distance-value sets.

    Any correspondence of distortion D matches every occurring distance of
    one space to within D of some distance of the other (zero included), so
    half this mismatch is a true GH lower bound.
    """
    da = np.unique(np.concatenate([[0.0], A.dist.ravel()]))
    db = np.unique(np.concatenate([[0.0], B.dist.ravel()]))

    def one_sided(u: np.ndarray, v: np.ndarray) -> float:
        pos = np.clip(np.searchsorted(v, u), 1, len(v) - 1) if len(v) > 1 else \
            np.zeros(len(u), dtype=int)
        left = np.abs(u - v[np.maximum(pos - 1, 0)])
        right = np.abs(u - v[np.minimum(pos, len(v) - 1)])
        return float(np.max(np.minimum(left, right)))

    return max(one_sided(da, db), one_sided(db, da))


def gh_lower(A: FiniteMetricSpace, B: FiniteMetricSpace) -> float:
    """Diameter and distance-value-distribution lower bound."""
    lo = 0.5 * abs(A.diameter - B.diameter)
    return float(max(lo, 0.5 * _value_set_mismatch(A, B)))


def gh_brute_force(A: FiniteMetricSpace, B: FiniteMetricSpace) -> float:
    """Exact GH distance for tiny spaces by correspondence enumeration.

    Minimizes over correspondences of the form graph(f) U graph(g)^T,
    which realize the optimum among all surjective correspondences.
    """
    n, m = A.n, B.n
    if n * m > 30 or n > 5 or m > 5:
        raise InsufficientData("brute force restricted to n, m <= 5")
    DA, DB = A.dist, B.dist
    fs = np.array(list(product(range(m), repeat=n)), dtype=int)
    gs = np.array(list(product(range(n), repeat=m)), dtype=int)
    # distortion of graph(f): max |DA[i,i'] - DB[f i, f i']|
    dis_f = np.array([np.max(np.abs(DA - DB[np.ix_(f, f)])) for f in fs])
    dis_g = np.array([np.max(np.abs(DB - DA[np.ix_(g, g)])) for g in gs])
    best = np.inf
    order_f = np.argsort(dis_f)
    for fi in order_f:
        if dis_f[fi] >= best:
            break
        f = fs[fi]
        # cross distortion against all g at once: |DA[i, g j] - DB[f i, j]|
        XA = DA[:, gs.T]            # n x m x G
        XB = DB[f][:, :, None]      # n x m x 1
        cross = np.max(np.abs(XA - XB), axis=(0, 1))
        total = np.maximum(np.maximum(dis_f[fi], dis_g), cross)
        best = min(best, float(np.min(total)))
    return 0.5 * best


# --------------------------------------------------------------------------
# Collapse regimes


@dataclass(frozen=True)
class SamplingBudget:
    n_points: int = 700
    limit_points: int = 400
    seed: int = 2024
    k: int | None = None
    growth: float = 1.2  # per-step refinement of the sample size

    def n_at(self, step: int) -> int:
        return int(round(self.n_points * self.growth**step))


@dataclass(frozen=True)
class CollapseRegime:
    """One collapse experiment: scaling rule, radii, sampling budget."""

    kind: str
    d: int = 1
    tau_seq: tuple[complex, ...] = tuple(complex(0, 2.0**i) for i in range(3, 8))
    c_rule: str = ""
    R: float = 1.0
    budget: SamplingBudget = dc_field(default_factory=SamplingBudget)
    basepoint_rule: str = "L=4.0"
    singular_point: complex = -7.0 + (np.pi + 2.9) * 1j
    block_clearance: float = 1.0

    def __post_init__(self):
        if self.kind not in ("flat-plane", "special-kahler", "ray"):
            raise ValueError("kind must be flat-plane | special-kahler | ray")
        if not self.c_rule:
            default = {"flat-plane": "pow:-0.6666666666666666",
                       "special-kahler": "C-over-imtau:1.0",
                       "ray": "pow:-3.0"}[self.kind]
            object.__setattr__(self, "c_rule", default)
        ims = [t.imag for t in self.tau_seq]
        if any(b <= a for a, b in zip(ims, ims[1:])):
            raise ValueError("Im tau must be strictly increasing")
        if any(t.real != 0 for t in self.tau_seq):
            raise ValueError("collapse runs use purely imaginary tau (b0 = 0)")
        # regime invariants on the scaling rule
        kindmap = {"flat-plane": "pow", "special-kahler": "C-over-imtau",
                   "ray": "pow"}
        mode, val = self.c_rule.split(":")
        if mode != kindmap[self.kind]:
            raise ValueError(f"c_rule {self.c_rule!r} incompatible with {self.kind}")
        if self.kind == "flat-plane" and float(val) > -2.0 / 3.0 + 1e-12:
            raise ValueError("flat-plane regime needs c_i <~ Imtau^{-2/3}")
        if self.kind == "ray" and float(val) >= -1.0:
            raise ValueError("ray regime needs c_i Imtau -> 0")

    def c_of(self, tau: complex) -> float:
        mode, val = self.c_rule.split(":")
        if mode == "pow":
            return float(tau.imag ** float(val))
        return float(val) / tau.imag

    @property
    def basepoint_L(self) -> float:
        assert self.basepoint_rule.startswith("L=")
        return float(self.basepoint_rule[2:])


def _L_window(d: int, eps: float, c: float, L0: float, reach: float) -> tuple[float, float]:
    """L-range reachable within scaled base distance `reach` of level L0."""
    k = np.sqrt(c * d / (2.0 * np.pi * eps)) * (2.0 / 3.0)
    hi = (L0**1.5 + reach / k) ** (2.0 / 3.0)
    lo_val = L0**1.5 - reach / k
    lo = lo_val ** (2.0 / 3.0) if lo_val > 0 else 0.0
    return max(0.55, lo), hi


def limit_space_sample(regime: CollapseRegime, step: int,
                       sk_scale: float = 1.0) -> tuple[FiniteMetricSpace, dict]:
    """Finite sample of the predicted limit ball of radius R.

    Returns the space plus the data needed to map cloud points onto it
    (grid coordinates per kind).
    """
    R = regime.R
    m = regime.budget.limit_points
    seed = regime.budget.seed + 1000 + step
    if regime.kind == "ray":
        ts = np.linspace(0.0, R, m)
        D = np.abs(ts[:, None] - ts[None, :])
        return FiniteMetricSpace(D, basepoint=0), {"ray_ts": ts}
    if regime.kind == "flat-plane":
        eng = qmc.Halton(d=2, scramble=True, seed=seed)
        u = eng.random(m)
        r = R * np.sqrt(u[:, 0])
        th = 2.0 * np.pi * u[:, 1]
        pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        pts[0] = 0.0
        D = np.sqrt(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2))
        return FiniteMetricSpace(D, basepoint=0), {"plane_pts": pts}
    # special-kahler: graph metric of sk_scale * g_SK (eps = 1) around L0
    sf1 = SemiFlatParams(d=regime.d, eps=1.0)
    mu = np.sqrt(sk_scale)  # distance scale
    L0 = regime.basepoint_L
    lo, hi = _L_window(regime.d, 1.0, sk_scale, L0, 1.25 * R)
    field = MetricField("sk-base", sf1, scale=sk_scale)
    box = Box(lo=(lo, 0.0), hi=(hi, 2.0 * np.pi), periodic=((1, 2.0 * np.pi),))
    bp = np.array([L0, np.pi])
    cloud = cloud_sample(field, box, m, seed, basepoint_param=bp)
    dist = graph_distance(cloud)
    space, members = pointed_ball(cloud, R, dist=dist)
    coords = cloud.params[members]
    return space, {"sk_coords": coords, "sk_mu": mu, "sk_field": field}


def _sk_base_param_of(field: MetricField, coords_chart: np.ndarray,
                      ) -> np.ndarray:
    """(L, theta) of fibration chart points."""
    L = -coords_chart[:, 0]
    th = np.mod(coords_chart[:, 1], 2.0 * np.pi)
    return np.stack([L, th], axis=1)


def estimate_sk_scale(dA: np.ndarray, dSK_unscaled: np.ndarray) -> float:
    """Least-squares metric scale lambda with d_A ~ sqrt(lambda) d_SK."""
    num = float(np.sum(dA * dSK_unscaled))
    den = float(np.sum(dSK_unscaled**2))
    if den <= 0:
        raise InsufficientData("degenerate SK distances")
    return (num / den) ** 2


def run_regime(regime: CollapseRegime) -> list[dict]:
    """Run one collapse experiment; one output row per sequence step."""
    rows = []
    lam_prev = None
    for i, tau in enumerate(regime.tau_seq):
        t0 = time.perf_counter()
        row = {"i": i, "im_tau": tau.imag, "error": ""}
        try:
            out = _run_step(regime, i, tau)
            row.update(out)
        except Exception as exc:  # a failed step records an error row
            row.update({"c": np.nan, "eps": np.nan, "gh_lower": np.nan,
                        "gh_upper": np.nan, "fiber_diam_max": np.nan,
                        "n_points": 0, "seed": regime.budget.seed + i,
                        "error": f"{type(exc).__name__}: {exc}"})
        row["runtime_s"] = time.perf_counter() - t0
        rows.append(row)
    return rows


def _run_step(regime: CollapseRegime, i: int, tau: complex) -> dict:
    eps = TWO_SQRT2_PI / tau.imag
    c = regime.c_of(tau)
    seed = regime.budget.seed + i
    d = regime.d
    L0 = regime.basepoint_L
    sf = SemiFlatParams(d=d, eps=eps)
    r_out = min(0.5 * np.sqrt(eps) * regime.block_clearance,
                0.45 * regime.block_clearance)
    config = GluingConfig(sf=sf, singular_points=(regime.singular_point,),
                          r_outer=(r_out,), r_inner=(0.5 * r_out,),
                          series_terms=192)
    field = MetricField("glued", config, scale=c)

    # sampling box in (zeta1, zeta2, a, b)
    reach = 1.35 * regime.R
    lo_L, hi_L = _L_window(d, eps, c, L0, reach)
    ang_halfwidth = reach / max(1e-9, np.sqrt(c * d * lo_L / (2.0 * np.pi * eps)))
    th0 = np.pi
    fiber_periodic = ((2, 1.0), (3, 1.0))
    if ang_halfwidth >= np.pi:
        box = Box(lo=(-hi_L, 0.0, 0.0, 0.0), hi=(-lo_L, 2.0 * np.pi, 1.0, 1.0),
                  periodic=((1, 2.0 * np.pi),) + fiber_periodic)
    else:
        box = Box(lo=(-hi_L, th0 - ang_halfwidth, 0.0, 0.0),
                  hi=(-lo_L, th0 + ang_halfwidth, 1.0, 1.0),
                  periodic=fiber_periodic)
    bp = np.array([-L0, th0, 0.11, 0.23])
    cloud = cloud_sample(field, box, regime.budget.n_at(i), seed,
                         k=regime.budget.k, basepoint_param=bp)
    dist = graph_distance(cloud)
    A, members = pointed_ball(cloud, regime.R, dist=dist)
    coords = cloud.coords[members]

    # Limit-side sample: push the ball forward along the fibration
    # projection (the natural collapse correspondence).  The limit metric
    # rides the same neighbourhood graph with projected edge weights, so
    # the comparison isolates the metric difference from graph artifacts.
    lam = None
    base_idx = int(A.basepoint)
    if regime.kind == "special-kahler":
        sk1 = SemiFlatParams(d=d, eps=1.0)

        def limit_edge(q1, q2):
            L1, L2 = -q1[0], -q2[0]
            dth = _wrap_angle(q2[1] - q1[1])
            Lm = 0.5 * (L1 + L2)
            w = np.sqrt(sk1.d * Lm / (2.0 * np.pi))
            return w * np.hypot(L2 - L1, dth)
    elif regime.kind == "flat-plane":
        V0 = c * d * L0 / (2.0 * np.pi * eps)

        def limit_edge(q1, q2):
            dz = np.array([q2[0] - q1[0], _wrap_angle(q2[1] - q1[1])])
            return np.sqrt(V0) * float(np.linalg.norm(dz))
    else:  # ray
        kfac = np.sqrt(c * d / (2.0 * np.pi * eps)) * (2.0 / 3.0)

        def limit_edge(q1, q2):
            y1 = max(kfac * ((-q1[0]) ** 1.5 - L0**1.5), 0.0)
            y2 = max(kfac * ((-q2[0]) ** 1.5 - L0**1.5), 0.0)
            return abs(y2 - y1)

    D_limit = _projected_graph_distances(cloud, limit_edge)[np.ix_(members, members)]
    if regime.kind == "special-kahler":
        iu = np.triu_indices(A.n, 1)
        mu = float(np.sum(A.dist[iu] * D_limit[iu]) / np.sum(D_limit[iu] ** 2))
        lam = mu**2
        D_limit = mu * D_limit
    B = FiniteMetricSpace(D_limit, basepoint=base_idx)

    phi = np.arange(A.n)
    # both are genuine bounds of the sample-pair GH distance, so the
    # sandwich is a construction invariant (GHBounds raises otherwise)
    bounds = GHBounds(lower=gh_lower(A, B), upper=gh_upper(A, B, phi))
    ghl, ghu = bounds.lower, bounds.upper

    # fiber diameters over sampled base points of the ball
    sf_field = MetricField("semi-flat", sf, scale=c)
    picks = coords[:: max(1, len(coords) // 12)]
    fd = max(fiber_diameter(sf_field, complex(np.exp(complex(q[0], q[1]))))
             for q in picks)
    out = {"c": c, "eps": eps, "gh_lower": float(ghl), "gh_upper": float(ghu),
           "fiber_diam_max": float(fd), "n_points": int(A.n), "seed": seed}
    if lam is not None:
        out["sk_scale"] = float(lam)
    return out


def _wrap_angle(dth: float) -> float:
    return (dth + np.pi) % (2.0 * np.pi) - np.pi


def _projected_graph_distances(cloud, limit_edge) -> np.ndarray:
    """Shortest paths over the cloud graph with projected edge weights.

    limit_edge(q1, q2) gives the limit-metric length of the base projection
    of an edge between chart coordinates q1, q2.
    """
    from scipy.sparse import csr_matrix
    coo = cloud.graph.tocoo()
    w = np.array([limit_edge(cloud.coords[i], cloud.coords[j])
                  for i, j in zip(coo.row, coo.col)])
    # keep zero-length projections connected with epsilon weights
    wmax = float(np.max(w)) if len(w) else 1.0
    w = np.maximum(w, 1e-12 * max(wmax, 1.0))
    g = csr_matrix((w, (coo.row, coo.col)), shape=cloud.graph.shape)
    g = g.maximum(g.T)
    from scipy.sparse.csgraph import dijkstra
    D = dijkstra(g, directed=False)
    return np.minimum(D, D.T)


def _sk_proxy_distance(sf1: SemiFlatParams, p1: np.ndarray, p2: np.ndarray) -> float:
    """Short-segment SK distance in (L, theta) coordinates (eps = 1)."""
    dL = p2[0] - p1[0]
    dth = p2[1] - p1[1]
    if dth > np.pi:
        dth -= 2.0 * np.pi
    elif dth < -np.pi:
        dth += 2.0 * np.pi
    n = 24
    total = 0.0
    for t in (np.arange(n) + 0.5) / n:
        L = p1[0] + t * dL
        w = np.sqrt(sf1.d * L / (2.0 * np.pi * sf1.eps))
        total += w * np.hypot(dL, dth) / n
    return float(total)

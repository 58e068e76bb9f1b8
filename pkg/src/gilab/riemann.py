"""Riemannian measurements: curvature, geodesics, clouds, volumes, CYL.

All randomized procedures take explicit seeds; Monte-Carlo outputs carry a
standard error.  Distances are graph geodesics on k-NN clouds except where
a family admits a closed form (flat chart, same-fiber pairs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .errors import (ChartDomain, Disconnected, GilabError,
                     InsufficientData, LeftDomain, NotPositive, StepTooLarge,
                     Unsatisfiable)
from .fields import Box, MetricField
from .geom import tau2_of

# --------------------------------------------------------------------------
# Curvature by Richardson-extrapolated central differences


def _christoffel(field: MetricField, q: np.ndarray, h: float) -> np.ndarray:
    """Gamma^k_{ij} from central differences of the metric."""
    n = field.dim
    g0 = field.metric_at(q)
    dg = np.empty((n, n, n))
    for mu in range(n):
        e = np.zeros(n)
        e[mu] = h
        dg[mu] = (field.metric_at(q + e) - field.metric_at(q - e)) / (2.0 * h)
    ginv = np.linalg.inv(g0)
    # Gamma[k, i, j] = 1/2 g^{kl} (dg[i][j,l] + dg[j][i,l] - dg[l][i,j])
    t = np.transpose(dg, (2, 0, 1)) + np.transpose(dg, (2, 1, 0)) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, t)


def _ricci_once(field: MetricField, q: np.ndarray, h: float) -> np.ndarray:
    n = field.dim
    gam0 = _christoffel(field, q, h)
    dgam = np.empty((n, n, n, n))
    for mu in range(n):
        e = np.zeros(n)
        e[mu] = h
        dgam[mu] = (_christoffel(field, q + e, h) - _christoffel(field, q - e, h)) / (2.0 * h)
    ric = (np.einsum("kkij->ij", dgam) - np.einsum("jkik->ij", dgam)
           + np.einsum("kkl,lij->ij", gam0, gam0)
           - np.einsum("kjl,lik->ij", gam0, gam0))
    return 0.5 * (ric + ric.T)


def ricci(field: MetricField, q: np.ndarray, h: float | None = None,
          tol: float = 1e-3) -> tuple[np.ndarray, float]:
    """Ricci tensor with Richardson extrapolation over steps (h, h/2).

    The default step is 1e-3 scaled by the family's local coordinate
    scale.  Returns (Ric, error_estimate); raises StepTooLarge when the
    two steps disagree beyond tol, and ChartDomain if the stencil leaves
    validity.
    """
    q = np.asarray(q, dtype=float)
    if h is None:
        h = field.fd_step_hint(q)
    if not field.contains(q, margin=4.0 * h):
        raise ChartDomain("point too close to the validity boundary for the stencil")
    r1 = _ricci_once(field, q, h)
    r2 = _ricci_once(field, q, h / 2.0)
    err = float(np.max(np.abs(r2 - r1)) / 3.0)
    if err > tol:
        raise StepTooLarge(f"Richardson disagreement {err:.2e} beyond {tol:.0e}")
    return (4.0 * r2 - r1) / 3.0, err


# --------------------------------------------------------------------------
# Geodesic shooting


def geodesic_shoot(field: MetricField, q0: np.ndarray, v0: np.ndarray,
                   T: float, steps: int, h: float = 1e-4) -> dict:
    """RK4 integration of the geodesic equation with unit initial speed.

    Returns dict with path, velocities, speed drift; raises LeftDomain with
    the exit time if the trajectory leaves the chart.
    """
    q = np.asarray(q0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    g0 = field.metric_at(q)
    speed = float(np.sqrt(v @ g0 @ v))
    if speed <= 0:
        raise ValueError("zero initial velocity")
    v /= speed

    def acc(qq, vv):
        gam = _christoffel(field, qq, h)
        return -np.einsum("kij,i,j->k", gam, vv, vv)

    dt = T / steps
    path = np.empty((steps + 1, field.dim))
    vels = np.empty((steps + 1, field.dim))
    path[0], vels[0] = q, v
    for it in range(steps):
        if not field.contains(q, margin=2.0 * h):
            raise LeftDomain("geodesic left the chart", exit_time=it * dt)
        try:
            k1q, k1v = v, acc(q, v)
            k2q, k2v = v + 0.5 * dt * k1v, acc(q + 0.5 * dt * k1q, v + 0.5 * dt * k1v)
            k3q, k3v = v + 0.5 * dt * k2v, acc(q + 0.5 * dt * k2q, v + 0.5 * dt * k2v)
            k4q, k4v = v + dt * k3v, acc(q + dt * k3q, v + dt * k3v)
        except GilabError as exc:
            raise LeftDomain(f"geodesic left the chart ({exc})",
                             exit_time=it * dt) from exc
        q = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        path[it + 1], vels[it + 1] = q, v
    gT = field.metric_at(q)
    drift = abs(np.sqrt(v @ gT @ v) - 1.0)
    return {"path": path, "velocities": vels, "speed_drift": float(drift)}


# --------------------------------------------------------------------------
# Point clouds and graph geodesics


@dataclass(frozen=True)
class PointCloud:
    """Sampled points with a k-NN geodesic graph."""

    field: MetricField
    params: np.ndarray       # n x d sampling parameters
    coords: np.ndarray       # n x dim chart coordinates
    basepoint: int
    graph: csr_matrix
    total_volume: float
    seed: int
    k: int

    @property
    def n(self) -> int:
        return len(self.coords)


def _edge_length(field: MetricField, u1: np.ndarray, u2: np.ndarray) -> float:
    """Midpoint-rule metric length of the parameter segment u1 -> u2.

    Periodic wraps are handled upstream by ghost images, so the segment is
    taken literally on the cover.
    """
    du = u2 - u1
    mid = u1 + 0.5 * du
    qm = field.param_to_chart(mid)
    g = field.metric_at(qm)
    # chart tangent of the parameter segment
    if field.family in ("semi-flat", "generalized-sf", "ov", "glued", "twisted"):
        d = field._d()
        t2 = tau2_of(complex(mid[0], mid[1]), d)
        dt2 = d / (2j * np.pi)
        xdot = du[2] + t2 * du[3] + mid[3] * dt2 * complex(du[0], du[1])
        t = np.array([du[0], du[1], xdot.real, xdot.imag])
    else:
        t = du
    val = t @ g @ t
    if val <= 0:
        raise NotPositive("non-positive edge length")
    return float(np.sqrt(val))


def cloud_sample(field: MetricField, region: Box, n: int, seed: int,
                 k: int | None = None, basepoint_param: np.ndarray | None = None,
                 max_batches: int = 200) -> PointCloud:
    """Quasi-uniform sample of the region w.r.t. the volume density.

    Low-discrepancy proposals thinned by the metric volume density, then a
    k-NN graph with midpoint-rule metric edge lengths.  Deterministic for a
    fixed seed.
    """
    if n < 2:
        raise InsufficientData("need n >= 2")
    if k is None:
        k = max(8, int(np.ceil(2.0 * np.log(n))))
    d = region.dim
    lo, hi = np.asarray(region.lo), np.asarray(region.hi)
    eng = qmc.Halton(d=d, scramble=True, seed=seed)
    rng = np.random.default_rng(seed + 1)
    # pilot for the density ceiling
    pilot = lo + eng.random(256) * (hi - lo)
    pw = np.array([_safe_density(field, u) for u in pilot])
    w_max = float(np.max(pw)) * 1.5
    if w_max <= 0:
        raise ChartDomain("sampling region has no valid interior")
    accepted: list[np.ndarray] = []
    if basepoint_param is not None:
        accepted.append(np.asarray(basepoint_param, dtype=float))
    w_sum, m_total = float(np.sum(pw)), len(pilot)
    for _ in range(max_batches):
        if len(accepted) >= n:
            break
        batch = lo + eng.random(2 * n) * (hi - lo)
        ws = np.array([_safe_density(field, u) for u in batch])
        w_sum += float(np.sum(ws))
        m_total += len(batch)
        acc = rng.random(len(batch)) * w_max < ws
        for u in batch[acc]:
            if len(accepted) < n:
                accepted.append(u)
    if len(accepted) < n:
        raise Disconnected("could not accept enough samples; check the region")
    params = np.array(accepted[:n])
    coords = np.array([field.param_to_chart(u) for u in params])
    total_volume = region.lebesgue * w_sum / m_total
    graph = _knn_graph(field, params, coords, region, k)
    return PointCloud(field=field, params=params, coords=coords,
                      basepoint=0, graph=graph, total_volume=float(total_volume),
                      seed=seed, k=k)


def _ghost_images(field: MetricField, params: np.ndarray, region: Box,
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Periodic images of the sample on the cover.

    Pure translations for angle coordinates; wrapping the base angle of a
    fibration chart (dim 1, period 2 pi) also shears the action coordinate
    a -> a - s d b because the lattice basis changes by tau2 -> tau2 + d.
    """
    n, d = params.shape
    fib = field.family in ("semi-flat", "generalized-sf", "ov", "glued", "twisted")
    images = [params.copy()]
    for idx, period in region.periodic:
        new = []
        for img in images:
            for s in (-1.0, 0.0, 1.0):
                gg = img.copy()
                gg[:, idx] += s * period
                if s != 0.0 and fib and idx == 1:
                    gg[:, 2] -= s * field._d() * gg[:, 3]
                new.append(gg)
        images = new
    ids = np.concatenate([np.arange(n) for _ in images])
    return np.vstack(images), ids


def _knn_graph(field: MetricField, params: np.ndarray, coords: np.ndarray,
               region: Box, k: int) -> csr_matrix:
    """k-NN graph with metric edge lengths, periodic dims ghosted."""
    n, d = params.shape
    g_med = field.metric_at(coords[n // 2])
    Lchol = np.linalg.cholesky(g_med)
    jac_param = np.eye(d)
    if field.family in ("semi-flat", "generalized-sf", "ov", "glued", "twisted"):
        t2 = tau2_of(complex(*params[n // 2][:2]), field._d())
        jac_param = np.array([
            [1, 0, 0, 0], [0, 1, 0, 0],
            [0, 0, 1, t2.real], [0, 0, 0, t2.imag]], dtype=float)
    proxy_map = Lchol.T @ jac_param
    base_proxy = params @ proxy_map.T
    ghost_params, ids = _ghost_images(field, params, region)
    tree = cKDTree(ghost_params @ proxy_map.T)
    n_images = len(ghost_params) // n
    n_cand = min(4 * k + 8, n * n_images - 1)
    rows, cols, vals = [], [], []
    for i in range(n):
        _, nb = tree.query(base_proxy[i], k=n_cand + 1)
        nb = np.atleast_1d(nb)
        best: dict[int, float] = {}
        for gi in nb:
            j = int(ids[gi])
            if j == i:
                continue
            try:
                w = _edge_length(field, params[i], ghost_params[gi])
            except GilabError:
                continue  # midpoint in invalid territory: no such edge
            if j not in best or w < best[j]:
                best[j] = w
        for j, w in sorted(best.items(), key=lambda kv: kv[1])[:k]:
            rows.append(i)
            cols.append(j)
            vals.append(w)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    graph = graph.maximum(graph.T)
    ncomp, _ = connected_components(graph, directed=False)
    if ncomp != 1:
        raise Disconnected(f"graph has {ncomp} components; increase k or n")
    return graph


def _safe_density(field: MetricField, u: np.ndarray) -> float:
    try:
        q = field.param_to_chart(u)
        if not field.contains(q):
            return 0.0
        return field.param_density(u)
    except (GilabError, ValueError):
        return 0.0


def graph_distance(cloud: PointCloud, sources: np.ndarray | None = None) -> np.ndarray:
    """All-pairs (or multi-source) shortest-path distances on the cloud."""
    D = dijkstra(cloud.graph, directed=False, indices=sources)
    if sources is None:
        D = np.minimum(D, D.T)
    return D


# --------------------------------------------------------------------------
# Volumes, diameters, scaling laws


def ball_volume(field: MetricField, x0_param: np.ndarray, r: float,
                region: Box, samples: int, seed: int,
                mode: str = "graph", k: int | None = None) -> tuple[float, float]:
    """Monte-Carlo volume of the metric ball of radius r around x0.

    Uniform Lebesgue proposals in the region weighted by the volume
    density; ball membership via graph distances from x0 ('graph') or the
    family's closed-form distance ('exact').
    """
    lo, hi = np.asarray(region.lo), np.asarray(region.hi)
    eng = qmc.Halton(d=region.dim, scramble=True, seed=seed)
    pts = lo + eng.random(samples) * (hi - lo)
    x0 = np.asarray(x0_param, dtype=float)
    w = np.array([_safe_density(field, u) for u in pts])
    if mode == "exact":
        dists = np.array([
            field.exact_distance(field.param_to_chart(x0), field.param_to_chart(u))
            for u in pts])
    else:
        all_params = np.vstack([x0[None, :], pts])
        coords = np.array([field.param_to_chart(u) for u in all_params])
        k = k or max(8, int(np.ceil(2.0 * np.log(samples))))
        cloud = _cloud_from_params(field, all_params, coords, region, k, seed)
        dists = graph_distance(cloud, sources=np.array([0]))[0, 1:]
    inside = (dists <= r) & (w > 0)
    vals = w * inside
    vol = region.lebesgue * float(np.mean(vals))
    stderr = region.lebesgue * float(np.std(vals)) / np.sqrt(samples)
    return vol, stderr


def _cloud_from_params(field, params, coords, region, k, seed) -> PointCloud:
    """k-NN graph over given parameter points (no thinning)."""
    graph = _knn_graph(field, params, coords, region, k)
    return PointCloud(field=field, params=params, coords=coords, basepoint=0,
                      graph=graph, total_volume=np.nan, seed=seed, k=k)


def _lattice_covering_radius(tau: complex) -> float:
    """Covering radius of Z + Z tau with the Euclidean |dx| metric."""
    v1, v2 = 1.0 + 0.0j, complex(tau)
    # Lagrange reduction
    for _ in range(64):
        if abs(v2) < abs(v1):
            v1, v2 = v2, v1
        mu = round((v2 * np.conj(v1)).real / abs(v1) ** 2)
        if mu == 0:
            break
        v2 = v2 - mu * v1
    if (v2 * np.conj(v1)).real < 0:
        v2 = -v2
    # circumradius of the (acute) triangle (0, v1, v2)
    a, b, c = abs(v1), abs(v2), abs(v1 - v2)
    area = 0.5 * abs((v1 * np.conj(v2)).imag)
    return float(a * b * c / (4.0 * area))


def fiber_diameter(field: MetricField, z: complex, grid: int = 24,
                   method: str = "auto") -> float:
    """Intrinsic diameter of the fiber torus over z.

    Exact flat-torus formula for the semi-flat families; graph metric on a
    fiber grid for the OV and glued families.  method forces 'exact' or
    'graph' where both apply (the graph estimator carries a small
    combinatorial overshoot).
    """
    fam = field.family
    if fam not in ("semi-flat", "generalized-sf", "ov", "glued", "twisted"):
        raise ChartDomain("fiber diameter needs a fibration family")
    zeta = complex(np.log(z))
    d = field._d()
    t2 = tau2_of(zeta, d)
    if fam in ("semi-flat", "generalized-sf") and method != "graph":
        L = -zeta.real
        W = 2.0 * np.pi * field_params_eps(field) * field.scale / (d * L)
        return float(np.sqrt(W) * _lattice_covering_radius(t2))
    # graph metric over the (a, b) grid with the induced fiber metric
    def fiber_g(a: float, b: float) -> np.ndarray:
        x = a + b * t2
        q = np.array([zeta.real, zeta.imag, x.real, x.imag])
        g4 = field.metric_at(q)
        Jc = np.array([[1.0, t2.real], [0.0, t2.imag]])
        T = np.zeros((4, 2))
        T[2:, :] = Jc
        return T.T @ g4 @ T

    m = grid
    idx = lambda i, j: (i % m) * m + (j % m)
    rows, cols, vals = [], [], []
    step = 1.0 / m
    for i in range(m):
        for j in range(m):
            a, b = i * step, j * step
            for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
                a2, b2 = (i + di) * step, (j + dj) * step
                gm = fiber_g(a + 0.5 * di * step, b + 0.5 * dj * step)
                v = np.array([di * step, dj * step])
                w = float(np.sqrt(v @ gm @ v))
                rows.append(idx(i, j))
                cols.append(idx(i + di, j + dj))
                vals.append(w)
    G = csr_matrix((vals, (rows, cols)), shape=(m * m, m * m))
    G = G.maximum(G.T)
    D = dijkstra(G, directed=False)
    return float(np.max(D))


def field_params_eps(field: MetricField) -> float:
    if field.family in ("semi-flat", "generalized-sf"):
        return field.params.eps
    if field.family == "ov":
        return field.params.ov.eps
    return field.params.sf.eps


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    r2: float
    window: tuple[float, float]


def fit_exponent(pairs: list[tuple[float, float]]) -> ExponentFit:
    """Least-squares slope in log-log coordinates with r^2."""
    if len(pairs) < 4:
        raise InsufficientData("need at least 4 pairs")
    xs = np.array([p[0] for p in pairs], dtype=float)
    ys = np.array([p[1] for p in pairs], dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise InsufficientData("positive abscissae and values required")
    lx, ly = np.log(xs), np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(exponent=float(coef[0]), r2=float(r2),
                       window=(float(np.min(xs)), float(np.max(xs))))


# --------------------------------------------------------------------------
# CYL constants and distance comparison


def cyl_check(cloud: PointCloud, gamma: float, radii: list[float],
              ric_samples: int = 8, c_max: float = 1e6,
              ricci_h: float = 1e-3) -> dict:
    """Smallest C >= 1 satisfying the quantitative cylindrical conditions.

    (1) |B(x0, s)| <= C s^2 for tested s >= C; (2) Ricci lower bound
    -C r^{-2 gamma} at sampled points with r >= C; (3) the annulus
    A(x0, r - r^gamma/C, r + r^gamma/C) sits inside B(x, C r^gamma) for
    sampled x.  Returns C and the binding condition.
    """
    if not (0.0 <= gamma < 1.0):
        raise ValueError("gamma must lie in [0, 1)")
    D0 = graph_distance(cloud, sources=np.array([cloud.basepoint]))[0]
    n = cloud.n
    vol_per_pt = cloud.total_volume / n if np.isfinite(cloud.total_volume) else None
    if vol_per_pt is None:
        raise InsufficientData("cloud carries no volume estimate")
    # Ricci minima at a few sampled radii
    rng = np.random.default_rng(cloud.seed + 17)
    order = np.argsort(D0)
    pick = order[np.linspace(n // 4, n - 1, ric_samples).astype(int)]
    ric_data = []
    for i in pick:
        try:
            ric_m, _ = ricci(cloud.field, cloud.coords[i], h=ricci_h)
            g = cloud.field.metric_at(cloud.coords[i])
            # lower bound of Ric relative to g
            evals = np.linalg.eigvalsh(np.linalg.solve(g, ric_m))
            ric_data.append((float(D0[i]), float(np.min(evals))))
        except (StepTooLarge, ChartDomain, NotPositive):
            continue
    D_all = graph_distance(cloud)

    def ok(C: float) -> tuple[bool, str]:
        for s in radii:
            if s < C:
                continue
            vol = vol_per_pt * float(np.sum(D0 <= s))
            if vol > C * s * s:
                return False, "volume"
        for r, lam in ric_data:
            if r >= C and lam < -C * r ** (-2.0 * gamma):
                return False, "ricci"
        for x in range(0, n, max(1, n // 24)):
            r = D0[x]
            if r < C or r <= 0:
                continue
            lo_r, hi_r = r - r**gamma / C, r + r**gamma / C
            ann = np.where((D0 >= lo_r) & (D0 <= hi_r))[0]
            if len(ann) and float(np.max(D_all[x, ann])) > C * r**gamma:
                return False, "annulus"
        return True, ""

    okmax, _ = ok(c_max)
    if not okmax:
        raise Unsatisfiable(f"no C <= {c_max:.0e} satisfies the conditions")
    lo, hi = 1.0, c_max
    binding = ""
    for _ in range(60):
        mid = np.sqrt(lo * hi)
        good, which = ok(mid)
        if good:
            hi = mid
        else:
            lo, binding = mid, which
    return {"C": float(hi), "binding": binding or "none", "gamma": gamma}


def distance_compare(field_eps: MetricField, field_eps0: MetricField,
                     pairs: list[tuple[np.ndarray, np.ndarray]],
                     region: Box, n: int = 900, seed: int = 5) -> dict:
    """Ratios sqrt(eps) d^eps / sqrt(eps0) d^eps0 over point pairs."""
    e1 = field_params_eps(field_eps)
    e0 = field_params_eps(field_eps0)
    ratios = []
    for (pa, pb) in pairs:
        d1 = _pair_distance(field_eps, pa, pb, region, n, seed)
        d0 = _pair_distance(field_eps0, pa, pb, region, n, seed)
        ratios.append(np.sqrt(e1) * d1 / (np.sqrt(e0) * d0))
    ratios = np.array(ratios)
    C = float(max(np.max(ratios), np.max(1.0 / ratios)))
    return {"ratios": ratios, "C": C}


def _pair_distance(field, pa, pb, region, n, seed) -> float:
    params = np.vstack([np.asarray(pa)[None, :], np.asarray(pb)[None, :]])
    eng = qmc.Halton(d=region.dim, scramble=True, seed=seed)
    lo, hi = np.asarray(region.lo), np.asarray(region.hi)
    fill = lo + eng.random(n) * (hi - lo)
    allp = np.vstack([params, fill])
    coords = np.array([field.param_to_chart(u) for u in allp])
    k = max(8, int(np.ceil(2.0 * np.log(n))))
    cloud = _cloud_from_params(field, allp, coords, region, k, seed)
    D = graph_distance(cloud, sources=np.array([0]))
    return float(D[0, 1])

"""Invariant suites behind `gilab check <suite>`.

Each check returns (ok, detail); the CLI prints one line per check and
exits nonzero if any fails.  The pytest suite covers the same ground more
exhaustively; these are the fast user-facing sanity runs.
"""

from __future__ import annotations

import numpy as np

from .ansatz import (CalabiParams, CalabiPoint, OVParams, SemiFlatParams,
                     calabi_forms, local_model_inverse, local_model_map,
                     ov_forms, ov_potential, sf_fiber_area, sf_forms,
                     sk_radial_distance)
from .collapse import FiniteMetricSpace, gh_brute_force, gh_lower, gh_upper
from .fields import Box, MetricField
from .geom import (ChartPoint, ComplexFormValue, FormValue, J_STANDARD,
                   hk_rotate, metric_from_kahler, reduce_point,
                   triple_residuals, wedge2, wedge_top, wedge_top_c, DX, DZETA)
from .gluing import (CycleSpec, GluingConfig, f_eps, f_eps_sup, glued_ansatz,
                     model_cocycle, period_pairing, twist_forms)
from .riemann import (cloud_sample, fit_exponent, geodesic_shoot,
                      graph_distance, ricci)

OMEGA0 = FormValue(np.array([
    [0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]))
BIG0 = ComplexFormValue(wedge2(DZETA, DX))


def _perm_wedge(a: np.ndarray, b: np.ndarray) -> complex:
    """Brute-force wedge coefficient over all 4! frame permutations."""
    from itertools import permutations
    total = 0.0 + 0.0j
    for p in permutations(range(4)):
        sign = np.linalg.det(np.eye(4)[list(p)])
        total += sign * a[p[0], p[1]] * b[p[2], p[3]]
    return total / 4.0


def check_wedge(seed: int):
    rng = np.random.default_rng(seed)
    if wedge_top(OMEGA0, OMEGA0) != 2.0:
        return False, "omega0^2 != 2"
    e12 = FormValue(np.eye(4)[[0]].T @ np.eye(4)[[1]]
                    - np.eye(4)[[1]].T @ np.eye(4)[[0]])
    if wedge_top(e12, e12) != 0.0:
        return False, "repeated factor not zero"
    for _ in range(16):
        A = rng.normal(size=(4, 4))
        B = rng.normal(size=(4, 4))
        fa, fb = FormValue(A - A.T), FormValue(B - B.T)
        ref = _perm_wedge(fa.matrix, fb.matrix).real
        if abs(wedge_top(fa, fb) - ref) > 1e-12 * max(1, abs(ref)):
            return False, "permutation oracle mismatch"
    return True, ""


def check_metric_from_kahler(seed: int):
    rng = np.random.default_rng(seed + 1)
    g = metric_from_kahler(OMEGA0, J_STANDARD).matrix
    if not np.allclose(g, np.eye(4), atol=1e-14):
        return False, "standard pair is not the identity"
    lam = 2.7
    g2 = metric_from_kahler(FormValue(lam * OMEGA0.matrix), J_STANDARD).matrix
    if np.max(np.abs(g2 - lam * g)) > 1e-12:
        return False, "not bilinear in omega"
    # naturality under an orthogonal frame rotation commuting with J
    th = rng.uniform(0, 2 * np.pi)
    c, s = np.cos(th), np.sin(th)
    R = np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])
    from .geom import ComplexStructureValue
    omr = FormValue(R.T @ OMEGA0.matrix @ R)
    Jr = ComplexStructureValue(np.linalg.inv(R) @ J_STANDARD.matrix @ R)
    gr = metric_from_kahler(omr, Jr).matrix
    if np.max(np.abs(gr - R.T @ g @ R)) > 1e-12:
        return False, "not natural under frame rotation"
    return True, ""


def check_hk_rotate(seed: int):
    om, big = hk_rotate(OMEGA0, BIG0)
    r = triple_residuals(om, big)
    if max(r) > 1e-12:
        return False, f"rotated flat pair residuals {max(r):.1e}"
    if abs(wedge_top(om, om) - wedge_top(OMEGA0, OMEGA0)) > 1e-12:
        return False, "volume form not preserved"
    # applying twice preserves the span of (omega, Re Omega, Im Omega)
    om2, big2 = hk_rotate(om, big)
    span1 = np.stack([OMEGA0.matrix.ravel(), BIG0.matrix.real.ravel(),
                      BIG0.matrix.imag.ravel()])
    span2 = np.stack([om2.matrix.ravel(), big2.matrix.real.ravel(),
                      big2.matrix.imag.ravel()])
    rank = np.linalg.matrix_rank(np.vstack([span1, span2]), tol=1e-10)
    if rank != 3:
        return False, "double rotation leaves the triple span"
    # Calabi-ansatz values rotate within tolerance
    trip = calabi_forms(CalabiParams(d=1, tau=1j), CalabiPoint(0.3 + 0.2j, 0.1))
    omc, bigc = hk_rotate(trip.omega, trip.bigOmega)
    if max(triple_residuals(omc, bigc)) > 1e-8:
        return False, "rotated Calabi residuals exceed 1e-8"
    return True, ""


def check_triple_residuals(seed: int):
    r = triple_residuals(OMEGA0, BIG0)
    if max(r) > 0:
        return False, "flat pair not exact"
    r1, _, _ = triple_residuals(FormValue(2.0 * OMEGA0.matrix), BIG0)
    if abs(r1 - 3.0) > 1e-12:
        return False, f"doubled omega gives r1 = {r1}, want 3"
    p = ChartPoint(-1.7 + 0.4j, 0.2 + 0.1j)
    trip = sf_forms(SemiFlatParams(d=2, eps=0.07), p)
    if max(triple_residuals(trip.omega, trip.bigOmega)) > 1e-10:
        return False, "semi-flat residuals exceed 1e-10"
    return True, ""


def check_reduce(seed: int):
    rng = np.random.default_rng(seed + 2)
    for _ in range(10):
        p = ChartPoint(complex(-rng.uniform(1, 5), rng.uniform(0, 7)),
                       complex(rng.uniform(-4, 4), rng.uniform(-4, 4)))
        q = reduce_point(p, 2)
        q2 = reduce_point(q, 2)
        if q2.x != q.x or q2.zeta != q.zeta:
            return False, "reduction is not idempotent"
    return True, ""


def check_sf_families(seed: int):
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for params in (SemiFlatParams(1, 0.1), SemiFlatParams(3, 0.05, b0=0.8)):
        for _ in range(200):
            p = ChartPoint(complex(-rng.uniform(0.8, 5), rng.uniform(0, 7)),
                           complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
            trip = sf_forms(params, p)
            worst = max(worst, max(triple_residuals(trip.omega, trip.bigOmega)))
    return worst < 1e-8, f"worst residual {worst:.1e}"


def check_fiber_area(seed: int):
    for eps in (0.1, 0.02):
        for z in (0.1, 0.05 + 0.2j):
            area = sf_fiber_area(SemiFlatParams(1, eps), z)
            if abs(area - eps) > 1e-8:
                return False, f"area {area} != {eps}"
    return True, ""


def check_local_model(seed: int):
    b0, eps, alpha = local_model_map(1j, 1)
    if abs(eps - 2 * np.sqrt(2) * np.pi) > 1e-12 or abs(alpha - np.sqrt(np.pi)) > 1e-12:
        return False, "tau = i values wrong"
    rng = np.random.default_rng(seed + 4)
    for _ in range(100):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 30))
        d = int(rng.integers(1, 9))
        b0, eps, _ = local_model_map(tau, d)
        if abs(local_model_inverse(b0, eps, d) - tau) > 1e-12:
            return False, "round trip failed"
    return True, ""


def check_ov(seed: int):
    params = OVParams(eps=0.1, series_terms=64, core_radius=1.0)
    # harmonicity of the potential by a 7-point Laplacian
    z0, t0, h = 0.3 + 0.0j, 0.37, 1e-3
    def V(z, t):
        return ov_potential(params, z, t)[0]
    lap = (V(z0 + h, t0) + V(z0 - h, t0) + V(z0 + 1j * h, t0)
           + V(z0 - 1j * h, t0) + V(z0, t0 + h) + V(z0, t0 - h)
           - 6 * V(z0, t0)) / h**2
    if abs(lap) > 1e-5:
        return False, f"potential not harmonic: {lap:.1e}"
    if abs(V(0.3, 0.37) - V(0.3, 1.37)) > 1e-14:
        return False, "potential not periodic in t"
    center = -3.0 + 0.0j
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    for _ in range(20):
        zeta = center + rng.uniform(0.05, 0.9) * np.exp(1j * rng.uniform(0, 7))
        p = ChartPoint(zeta, complex(rng.uniform(0, 1), rng.uniform(0, 0.3)))
        trip = ov_forms(params, p, center=center)
        worst = max(worst, max(triple_residuals(trip.omega, trip.bigOmega)))
    return worst < 1e-7, f"worst OV residual {worst:.1e}"


def check_sk(seed: int):
    params = SemiFlatParams(1, 1.0)
    # conformal factor at |z| = e^{-2 pi}
    from .ansatz import sk_metric
    g = sk_metric(params, np.exp(-2 * np.pi))
    if abs(g[0, 0] - np.exp(4 * np.pi)) > 1e-6 * np.exp(4 * np.pi):
        return False, "conformal factor at e^{-2pi} wrong"
    # radial distance closed form vs quadrature
    from .periods import sk_segment_length
    r, r0 = 0.05, 0.3
    quad = sk_segment_length(params, r, r0, n=256)
    closed = sk_radial_distance(params, r, r0)
    if abs(quad - closed) > 1e-8 * max(1, closed):
        return False, f"radial distance {quad} vs {closed}"
    return True, ""


ANSATZ_POINT = ChartPoint(-2.0 + 0.0j, 0.0j)


def check_glued_regions(seed: int):
    cfg = GluingConfig(sf=SemiFlatParams(1, 0.1),
                       singular_points=(-3.2 + 1.6j, -3.2 + 3.9j))
    p_far = ChartPoint(-1.5 + 0.3j, 0.1 + 0.1j)
    a = glued_ansatz(cfg, p_far)
    b = sf_forms(cfg.sf, p_far)
    if not (np.array_equal(a.omega.matrix, b.omega.matrix)
            and np.array_equal(a.bigOmega.matrix, b.bigOmega.matrix)):
        return False, "outer region is not bitwise semi-flat"
    # locality: moving the far singular point leaves values bitwise equal
    cfg2 = GluingConfig(sf=cfg.sf, singular_points=(-3.2 + 1.6j, -3.4 + 4.1j),
                        r_inner=cfg.r_inner, r_outer=cfg.r_outer)
    zj = cfg.singular_points[0]
    p_core = ChartPoint(zj + 0.05, 0.2 + 0.1j)
    t1, t2 = glued_ansatz(cfg, p_core), glued_ansatz(cfg2, p_core)
    if not np.array_equal(t1.omega.matrix, t2.omega.matrix):
        return False, "locality violated"
    if abs(f_eps(cfg, p_far)) > 1e-12 or abs(f_eps(cfg, p_core)) > 1e-12:
        return False, "f_eps not supported in the annuli"
    return True, ""


def check_glued_annulus(seed: int):
    cfg = GluingConfig(sf=SemiFlatParams(1, 0.1),
                       singular_points=(-3.2 + 1.6j, -3.2 + 3.9j))
    rng = np.random.default_rng(seed + 6)
    zj, ri, ro = cfg.singular_points[0], cfg.r_inner[0], cfg.r_outer[0]
    worst23, worst_cons = 0.0, 0.0
    for _ in range(60):
        rho = rng.uniform(ri, ro)
        p = ChartPoint(zj + rho * np.exp(1j * rng.uniform(0, 7)),
                       complex(rng.uniform(0, 1), rng.uniform(0.05, 0.4)))
        trip = glued_ansatz(cfg, p)
        r1, r2, r3 = triple_residuals(trip.omega, trip.bigOmega)
        f = f_eps(cfg, p)
        worst23 = max(worst23, r2, r3)
        worst_cons = max(worst_cons, abs(
            np.exp(f) * 2.0 * wedge_top(trip.omega, trip.omega)
            - wedge_top_c(trip.bigOmega, trip.bigOmega.conj()).real))
    if worst23 > 1e-8:
        return False, f"annulus r2/r3 = {worst23:.1e}"
    if worst_cons > 1e-12:
        return False, f"f_eps consistency {worst_cons:.1e}"
    return True, ""


def check_decay(seed: int):
    sups = []
    for eps in (0.2, 0.1):
        cfg = GluingConfig(sf=SemiFlatParams(1, eps),
                           singular_points=(-3.2 + 1.6j, -3.2 + 3.9j))
        sups.append(f_eps_sup(cfg, n=200, seed=seed))
    return sups[1] < sups[0], f"sup f: {sups[0]:.2e} -> {sups[1]:.2e}"


def check_fiber_period(seed: int):
    cfg = GluingConfig(sf=SemiFlatParams(1, 0.1),
                       singular_points=(-3.2 + 1.6j,))
    cyc = CycleSpec(kind="fiber", base_path=(-2.0 + 0.5j,))
    val, err = period_pairing("omega_a", cyc, cfg)
    if abs(val.real - 0.1) > 1e-8:
        return False, f"fiber period {val.real} != eps"
    return True, ""


def check_twist(seed: int):
    cfg = GluingConfig(sf=SemiFlatParams(1, 0.1),
                       singular_points=(-3.2 + 1.6j,))
    zero = model_cocycle(0.0, 1)
    p = ChartPoint(-2.2 + 0.8j, 0.3 + 0.2j)
    t0, t1 = glued_ansatz(cfg, p), twist_forms(zero, cfg, p)
    if np.max(np.abs(t0.omega.matrix - t1.omega.matrix)) > 1e-14:
        return False, "zero cocycle changes the forms"
    # overlap agreement of the model cocycle
    coc = model_cocycle(0.7, 1)
    p_ov = ChartPoint(-2.2 + (np.pi + 0.4) * 1j, 0.3 + 0.2j)
    ids = coc.charts_at(p_ov.zeta)
    if len(ids) < 2:
        return False, "test point not in an overlap"
    ta = twist_forms(coc, cfg, p_ov, chart_index=ids[0])
    tb = twist_forms(coc, cfg, p_ov, chart_index=ids[1])
    mism = np.max(np.abs(ta.omega.matrix - tb.omega.matrix))
    if mism > 1e-9:
        return False, f"overlap mismatch {mism:.1e}"
    return True, ""


def check_ricci(seed: int):
    flat = MetricField("flat")
    R, _ = ricci(flat, np.zeros(4))
    if np.max(np.abs(R)) > 1e-10:
        return False, "flat space has nonzero Ricci"
    sf = MetricField("semi-flat", SemiFlatParams(1, 0.1))
    R, _ = ricci(sf, np.array([-2.0, 0.3, 0.2, 0.1]))
    if np.max(np.abs(R)) > 1e-4:
        return False, f"semi-flat Ricci {np.max(np.abs(R)):.1e}"
    return True, ""


def check_geodesic(seed: int):
    flat = MetricField("flat")
    out = geodesic_shoot(flat, np.zeros(4), np.array([1.0, 0, 0, 0]),
                         T=1.0, steps=100)
    if np.max(np.abs(out["path"][-1] - np.array([1.0, 0, 0, 0]))) > 1e-10:
        return False, "flat geodesic is not straight"
    if out["speed_drift"] > 1e-6:
        return False, "speed drift too large"
    return True, ""


def check_cloud(seed: int):
    flat = MetricField("flat")
    region = Box(lo=(0, 0, 0, 0), hi=(1, 1, 0.02, 0.02))
    c1 = cloud_sample(flat, region, 220, seed)
    c2 = cloud_sample(flat, region, 220, seed)
    if not (np.array_equal(c1.coords, c2.coords)
            and np.array_equal(c1.graph.toarray(), c2.graph.toarray())):
        return False, "cloud not deterministic under fixed seed"
    D = graph_distance(c1)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, c1.n, size=(500, 3))
    lhs = D[idx[:, 0], idx[:, 2]]
    rhs = D[idx[:, 0], idx[:, 1]] + D[idx[:, 1], idx[:, 2]]
    if np.any(lhs > rhs + 1e-9):
        return False, "triangle inequality violated"
    return True, ""


def check_fit(seed: int):
    fit = fit_exponent([(x, 3.0 * x**2) for x in (1, 2, 3, 4, 5)])
    if abs(fit.exponent - 2.0) > 1e-12 or abs(fit.r2 - 1.0) > 1e-12:
        return False, "exact power law not recovered"
    fit0 = fit_exponent([(x, 7.0) for x in (1, 2, 3, 4)])
    if abs(fit0.exponent) > 1e-12:
        return False, "constant data gives nonzero exponent"
    return True, ""


def check_gh_oracles(seed: int):
    A = FiniteMetricSpace(np.array([[0.0, 1.0], [1.0, 0.0]]))
    B = FiniteMetricSpace(np.array([[0.0, 2.0], [2.0, 0.0]]))
    if gh_upper(A, B, np.array([0, 1])) != 0.5:
        return False, "2-point upper bound != 1/2"
    if gh_brute_force(A, B) != 0.5:
        return False, "2-point brute force != 1/2"
    rng = np.random.default_rng(seed + 7)
    from itertools import product
    for _ in range(8):
        n, m = rng.integers(2, 5, size=2)
        PA, PB = rng.random((n, 3)), rng.random((m, 3))
        DA = np.sqrt(((PA[:, None] - PA[None]) ** 2).sum(-1))
        DB = np.sqrt(((PB[:, None] - PB[None]) ** 2).sum(-1))
        SA, SB = FiniteMetricSpace(DA), FiniteMetricSpace(DB)
        d = gh_brute_force(SA, SB)
        hi = min(gh_upper(SA, SB, np.array(f))
                 for f in product(range(m), repeat=n))
        if not (gh_lower(SA, SB) <= d + 1e-12 <= hi + 1e-12):
            return False, "estimator sandwich violated"
    return True, ""


SUITES = {
    "core": [("wedge", check_wedge),
             ("metric_from_kahler", check_metric_from_kahler),
             ("hk_rotate/triple_residuals", check_hk_rotate),
             ("triple_residuals", check_triple_residuals),
             ("reduce", check_reduce)],
    "ansatz": [("sf_residuals", check_sf_families),
               ("fiber_area", check_fiber_area),
               ("local_model_map", check_local_model),
               ("ov_block", check_ov),
               ("sk_metric", check_sk)],
    "gluing": [("regions", check_glued_regions),
               ("annulus_compatibility", check_glued_annulus),
               ("decay", check_decay),
               ("fiber_period", check_fiber_period),
               ("twist", check_twist)],
    "riemann": [("ricci", check_ricci),
                ("geodesic", check_geodesic),
                ("cloud", check_cloud),
                ("fit_exponent", check_fit)],
    "gh": [("oracles", check_gh_oracles)],
}


def run_suite(name: str, seed: int = 2024) -> list[tuple[str, bool, str]]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    out = []
    for check_name, fn in SUITES[name]:
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # a crash is a failure with the exception name
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((check_name, ok, detail))
    return out

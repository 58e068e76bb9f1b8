"""Glued ansatz: regions, closedness, error density, twists, periods."""

import numpy as np
import pytest

from gilab.ansatz import SemiFlatParams, sf_forms
from gilab.errors import ChartGap, CycleThroughSingular, OverlapMismatch
from gilab.geom import ChartPoint, tau2_of, triple_residuals, wedge_top, wedge_top_c
from gilab.gluing import (BFieldCocycle, CocycleChart, CycleSpec, GluingConfig,
                          annuli_volume, cocycle_jump_pairing, decay_fit,
                          f_eps, f_eps_sup, glued_ansatz, mass_balance,
                          model_cocycle, period_pairing, region_of,
                          twist_forms, validate_cocycle)

SINGULAR = (-3.2 + 1.6j, -3.2 + 3.9j)


def config_for(eps, points=SINGULAR, **kw):
    return GluingConfig(sf=SemiFlatParams(1, eps), singular_points=points, **kw)


class TestRegions:
    def setup_method(self):
        self.cfg = config_for(0.1)

    def test_outer_is_bitwise_semi_flat(self):
        for p in (ChartPoint(-1.2 + 0.4j, 0.3 + 0.1j),
                  ChartPoint(-4.5 + 3.0j, -0.2 + 0.5j)):
            a = glued_ansatz(self.cfg, p)
            b = sf_forms(self.cfg.sf, p)
            assert np.array_equal(a.omega.matrix, b.omega.matrix)
            assert np.array_equal(a.bigOmega.matrix, b.bigOmega.matrix)

    def test_core_is_translated_ov_block(self):
        from gilab.ansatz import OVParams, ov_forms
        zj = self.cfg.singular_points[0]
        p = ChartPoint(zj + 0.06 + 0.04j, 0.2 + 0.1j)
        a = glued_ansatz(self.cfg, p)
        b = ov_forms(OVParams(eps=0.1, series_terms=self.cfg.series_terms,
                              core_radius=1.0), p, center=zj, d=1)
        assert np.max(np.abs(a.omega.matrix - b.omega.matrix)) < 1e-15
        assert np.max(np.abs(a.bigOmega.matrix - b.bigOmega.matrix)) < 1e-15

    def test_region_classifier(self):
        zj = self.cfg.singular_points[1]
        assert region_of(self.cfg, ChartPoint(-1.0 + 0.2j, 0j)) == ("sf", -1)
        assert region_of(self.cfg, ChartPoint(zj + 0.05, 0j)) == ("core", 1)
        mid = 0.5 * (self.cfg.r_inner[1] + self.cfg.r_outer[1])
        assert region_of(self.cfg, ChartPoint(zj + mid, 0j)) == ("annulus", 1)

    def test_locality_bitwise(self):
        cfg2 = GluingConfig(sf=self.cfg.sf,
                            singular_points=(SINGULAR[0], -3.4 + 4.2j),
                            r_inner=self.cfg.r_inner, r_outer=self.cfg.r_outer)
        zj = SINGULAR[0]
        for off in (0.05, 0.25 * np.exp(0.9j)):
            p = ChartPoint(zj + off, 0.2 + 0.1j)
            t1, t2 = glued_ansatz(self.cfg, p), glued_ansatz(cfg2, p)
            assert np.array_equal(t1.omega.matrix, t2.omega.matrix)

    def test_overlapping_discs_rejected(self):
        # the auto rule keeps discs disjoint; explicit radii must be checked
        with pytest.raises(ValueError):
            GluingConfig(sf=SemiFlatParams(1, 0.1),
                         singular_points=(-3.0 + 1.0j, -3.0 + 1.2j),
                         r_inner=(0.08, 0.08), r_outer=(0.15, 0.15))


class TestClosednessAndCompatibility:
    def test_annulus_closed_by_fd(self):
        cfg = config_for(0.1)
        zj = cfg.singular_points[0]
        mid = 0.6 * cfg.r_inner[0] + 0.4 * cfg.r_outer[0]
        q0 = np.array([zj.real + mid * np.cos(0.5), zj.imag + mid * np.sin(0.5),
                       0.21, 0.13])
        h = 1e-4

        def ev(kind, q):
            p = ChartPoint(complex(q[0], q[1]), complex(q[2], q[3]))
            t = glued_ansatz(cfg, p)
            return {"o": t.omega.matrix, "re": t.bigOmega.matrix.real,
                    "im": t.bigOmega.matrix.imag}[kind]

        for kind in ("o", "re", "im"):
            worst = 0.0
            for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
                def der(mu, a, b):
                    e = np.zeros(4)
                    e[mu] = h
                    return (ev(kind, q0 + e)[a, b] - ev(kind, q0 - e)[a, b]) / (2 * h)
                worst = max(worst, abs(der(i, j, k) - der(j, i, k) + der(k, i, j)))
            assert worst < 1e-6, kind

    def test_annulus_r2_r3_tiny_r1_tracks_f(self):
        cfg = config_for(0.2)  # the largest tested eps: worst case
        rng = np.random.default_rng(8)
        zj = cfg.singular_points[0]
        for _ in range(50):
            rho = rng.uniform(cfg.r_inner[0], cfg.r_outer[0])
            p = ChartPoint(zj + rho * np.exp(1j * rng.uniform(0, 2 * np.pi)),
                           complex(rng.uniform(0, 1), rng.uniform(0.05, 0.5)))
            trip = glued_ansatz(cfg, p)
            r1, r2, r3 = triple_residuals(trip.omega, trip.bigOmega)
            assert r2 < 1e-8 and r3 < 1e-8
            f = f_eps(cfg, p)
            assert abs(r1 - abs(np.exp(-f) - 1.0)) < 1e-10
            # density identity: e^f 2 omega^2 = Omega ^ conj Omega
            lhs = np.exp(f) * 2.0 * wedge_top(trip.omega, trip.omega)
            rhs = wedge_top_c(trip.bigOmega, trip.bigOmega.conj()).real
            assert abs(lhs - rhs) < 1e-12 * abs(rhs)

    def test_positive_definite_everywhere(self):
        from gilab.fields import MetricField
        cfg = config_for(0.1)
        field = MetricField("glued", cfg)
        rng = np.random.default_rng(4)
        zj = cfg.singular_points[0]
        for _ in range(40):
            rho = rng.uniform(0.05, 2.0)
            zeta = zj + rho * np.exp(1j * rng.uniform(0, 2 * np.pi))
            if zeta.real > -0.6:
                continue
            q = np.array([zeta.real, zeta.imag, rng.uniform(0, 1), rng.uniform(0, 1)])
            g = field.metric_at(q, validate=True)
            assert np.linalg.eigvalsh(g)[0] > 0


class TestErrorDensity:
    def test_support(self):
        cfg = config_for(0.1)
        rng = np.random.default_rng(12)
        n_out = 0
        while n_out < 200:
            p = ChartPoint(complex(-rng.uniform(0.8, 6), rng.uniform(0, 2 * np.pi)),
                           complex(rng.uniform(0, 1), rng.uniform(0, 1)))
            kind, _ = region_of(cfg, p)
            if kind == "annulus":
                continue
            n_out += 1
            assert abs(f_eps(cfg, p)) < 1e-12

    def test_sup_monotone_in_eps(self):
        sups = [f_eps_sup(config_for(e), n=300, seed=2)
                for e in (0.2, 0.1, 0.05, 0.025)]
        assert all(b < a for a, b in zip(sups, sups[1:]))

    def test_decay_fit(self):
        configs = [config_for(e) for e in (0.2, 0.1, 0.05, 0.025)]
        slope, r2 = decay_fit(configs, n=300, seed=2)
        assert slope < 0
        assert r2 > 0.9

    def test_decay_fit_shift_invariance(self):
        configs = [config_for(e) for e in (0.2, 0.1, 0.05, 0.025)]
        sups = [f_eps_sup(c, n=120, seed=3) for c in configs]
        s1, _ = decay_fit(configs, sups=sups)
        s2, _ = decay_fit(configs, sups=[2.0 * s for s in sups])
        assert s1 == pytest.approx(s2, rel=1e-12)

    def test_insufficient_data(self):
        from gilab.errors import InsufficientData
        with pytest.raises(InsufficientData):
            decay_fit([config_for(0.1)])


class TestMassBalance:
    def test_vanishes(self):
        cfg = config_for(0.1)
        val, err = mass_balance(cfg, n=1500, seed=3)
        assert abs(val) < max(5 * err, 1e-12)

    def test_shift_response(self):
        cfg = config_for(0.1)
        vol = annuli_volume(cfg, n=1500, seed=3)
        shift = 0.05
        val, err = mass_balance(cfg, n=1500, seed=3, density_shift=shift)
        assert val == pytest.approx(shift * vol, rel=0.1)

    def test_no_singular_points(self):
        cfg = GluingConfig(sf=SemiFlatParams(1, 0.1), singular_points=())
        val, err = mass_balance(cfg)
        assert val == 0.0 and err == 0.0


class TestTwists:
    def setup_method(self):
        self.cfg = config_for(0.1, points=(-3.2 + 1.6j,))

    def test_zero_cocycle_identity(self):
        coc = model_cocycle(0.0, 1)
        p = ChartPoint(-2.0 + 0.8j, 0.3 + 0.2j)
        t0, t1 = glued_ansatz(self.cfg, p), twist_forms(coc, self.cfg, p)
        assert np.max(np.abs(t0.omega.matrix - t1.omega.matrix)) < 1e-14

    def test_overlap_agreement_model_cocycle(self):
        coc = model_cocycle(0.7, 1)
        validate_cocycle(coc, self.cfg)
        p = ChartPoint(-2.0 + (np.pi + 0.5) * 1j, 0.3 + 0.2j)
        ids = coc.charts_at(p.zeta)
        assert len(ids) == 2
        ta = twist_forms(coc, self.cfg, p, chart_index=ids[0])
        tb = twist_forms(coc, self.cfg, p, chart_index=ids[1])
        assert np.max(np.abs(ta.omega.matrix - tb.omega.matrix)) < 1e-9
        assert np.max(np.abs(ta.bigOmega.matrix - tb.bigOmega.matrix)) < 1e-9

    def test_lattice_section_trivial(self):
        # translation by an integer lattice section is a deck map
        charts = (CocycleChart(im_lo=-50.0, im_hi=50.0, coeffs=(2.0,)),)
        coc = BFieldCocycle(charts)
        p = ChartPoint(-2.0 + 0.8j, 0.3 + 0.2j)
        t0 = glued_ansatz(self.cfg, p)
        t1 = twist_forms(coc, self.cfg, p)
        assert np.max(np.abs(t0.omega.matrix - t1.omega.matrix)) < 1e-12

    def test_groupoid_action(self):
        p = ChartPoint(-2.3 + 0.6j, 0.25 + 0.35j)
        c1 = model_cocycle(0.4, 1)
        c2 = model_cocycle(0.9, 1)
        c12 = model_cocycle(1.3, 1)
        t12 = twist_forms(c12, self.cfg, p)
        # composing: twist by c2 of the c1-twisted field equals the sum
        # cocycle because the translations add along the fiber
        ch1, ch2 = c1.charts_at(p.zeta)[0], c2.charts_at(p.zeta)[0]
        sig = c1.charts[ch1].sigma(p.zeta) + c2.charts[ch2].sigma(p.zeta)
        q = ChartPoint(p.zeta, p.x + sig, p.sheet)
        # direct evaluation with summed translation and chained Jacobians
        dz1 = c1.charts[ch1].dsigma(p.zeta)[0] + c2.charts[ch2].dsigma(p.zeta)[0]
        trip = glued_ansatz(self.cfg, q)
        T = np.eye(4)
        T[2, 0], T[2, 1] = dz1.real, -dz1.imag
        T[3, 0], T[3, 1] = dz1.imag, dz1.real
        ref = T.T @ trip.omega.matrix @ T
        assert np.max(np.abs(t12.omega.matrix - ref)) < 1e-10

    def test_chart_gap(self):
        charts = (CocycleChart(im_lo=0.0, im_hi=1.0),)
        with pytest.raises(ChartGap):
            twist_forms(BFieldCocycle(charts), self.cfg,
                        ChartPoint(-2.0 + 3.0j, 0j))

    def test_flat_section_violation_detected(self):
        bad = BFieldCocycle((
            CocycleChart(im_lo=-10.0, im_hi=1.0, coeffs=(0.0, 0.3)),
            CocycleChart(im_lo=0.0, im_hi=10.0, coeffs=(0.0, 0.0, 0.5)),
        ))
        with pytest.raises(OverlapMismatch):
            validate_cocycle(bad, self.cfg)


class TestPeriodPairings:
    def setup_method(self):
        self.cfg = config_for(0.1, points=(-3.2 + 1.6j,))

    def test_fiber_period_is_eps(self):
        for z0 in (-2.0 + 0.5j, -3.2 + 1.6j + 0.08):  # sf region and core
            cyc = CycleSpec(kind="fiber", base_path=(z0,))
            val, err = period_pairing("omega_a", cyc, self.cfg)
            assert val.real == pytest.approx(0.1, abs=1e-8)

    def test_cylinder_b_field_shift(self):
        # loop around the puncture at fixed |z|, fiber class (1, 0)
        coc = model_cocycle(0.7, 1)
        ang = np.linspace(0.0, 2 * np.pi, 9)
        path = tuple(complex(-2.0, a) for a in ang)
        cyc = CycleSpec(kind="cylinder", base_path=path, fiber_class=(1, 0))
        v_twist, _ = period_pairing("twisted", cyc, self.cfg, cocycle=coc)
        v_plain, _ = period_pairing("omega_a", cyc, self.cfg)
        jump = cocycle_jump_pairing(coc, cyc, self.cfg)
        assert (v_twist - v_plain).real == pytest.approx(0.1 * jump, abs=1e-6)
        assert jump != 0.0

    def test_bigomega_periods_unchanged(self):
        coc = model_cocycle(0.7, 1)
        ang = np.linspace(0.0, 2 * np.pi, 9)
        for fiber_class in ((1, 0), (0, 1)):
            path = tuple(complex(-2.0, a) for a in ang)
            cyc = CycleSpec(kind="cylinder", base_path=path,
                            fiber_class=fiber_class)
            v_twist, _ = period_pairing("twisted_bigOmega", cyc, self.cfg,
                                        cocycle=coc)
            v_plain, _ = period_pairing("bigOmega", cyc, self.cfg)
            assert abs(v_twist - v_plain) < 1e-8

    def test_cycle_through_singular(self):
        path = (self.cfg.singular_points[0] - 0.5,
                self.cfg.singular_points[0] + 0.5)
        cyc = CycleSpec(kind="cylinder", base_path=path, fiber_class=(1, 0))
        with pytest.raises(CycleThroughSingular):
            period_pairing("omega_a", cyc, self.cfg)

"""Metric family evaluators: semi-flat, Calabi, Ooguri-Vafa, SK base."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gilab.ansatz import (CHART_RE_MAX, CalabiParams, CalabiPoint, OVParams,
                          SemiFlatParams, calabi_forms, local_model_inverse,
                          local_model_map, ov_forms, ov_potential,
                          sf_fiber_area, sf_forms, sk_metric,
                          sk_radial_distance)
from gilab.errors import ChartDomain, SeriesTail
from gilab.geom import ChartPoint, tau2_of, triple_residuals
from gilab.periods import sk_segment_length

RNG = np.random.default_rng(42)


def random_chart_point(rng, L_lo=0.8, L_hi=5.0):
    return ChartPoint(complex(-rng.uniform(L_lo, L_hi), rng.uniform(0, 7)),
                      complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))


class TestSemiFlat:
    def test_w_value(self):
        trip = sf_forms(SemiFlatParams(1, 0.1), ChartPoint(-2.0 + 0j, 0j))
        # fiber block coefficient is W = 2 pi eps / (d L)
        assert trip.omega.matrix[2, 3] == pytest.approx(np.pi * 0.2 / 2, abs=1e-15)
        # B vanishes on the real fiber axis
        assert trip.omega.matrix[0, 2] == 0.0

    def test_residuals_all_params(self):
        worst = 0.0
        for params in (SemiFlatParams(1, 0.1), SemiFlatParams(4, 0.03, b0=1.3)):
            for _ in range(300):
                p = random_chart_point(RNG)
                t = sf_forms(params, p)
                worst = max(worst, max(triple_residuals(t.omega, t.bigOmega)))
        assert worst < 1e-10

    def test_deck_translation_x(self):
        params = SemiFlatParams(2, 0.05, b0=0.4)
        p = ChartPoint(-1.7 + 0.9j, 0.23 + 0.41j)
        q = ChartPoint(p.zeta, p.x + 1.0)
        np.testing.assert_allclose(sf_forms(params, p).omega.matrix,
                                   sf_forms(params, q).omega.matrix,
                                   atol=1e-12)

    def test_monodromy_invariance(self):
        params = SemiFlatParams(3, 0.08)
        p = ChartPoint(-1.7 + 0.9j, 0.23 + 0.41j, 0)
        q = ChartPoint(p.zeta + 2j * np.pi, p.x, 1)
        np.testing.assert_allclose(sf_forms(params, p).omega.matrix,
                                   sf_forms(params, q).omega.matrix,
                                   atol=1e-10)

    def test_chart_domain(self):
        with pytest.raises(ChartDomain):
            sf_forms(SemiFlatParams(), ChartPoint(-0.3 + 0j, 0j))

    def test_lattice_flat_section_invariance(self):
        # pullback by the translation x -> x + (3 - 2 tau2(zeta)) is the
        # identity on the forms (deck map of the fibration)
        params = SemiFlatParams(2, 0.05, b0=0.7)
        p = ChartPoint(-2.1 + 1.3j, 0.4 + 0.2j)
        t2 = tau2_of(p.zeta, params.d)
        q = ChartPoint(p.zeta, p.x + 3.0 - 2.0 * t2)
        lam_p = -2.0 * params.d / (2j * np.pi)  # d(3 - 2 tau2)/dzeta
        T = np.eye(4)
        T[2, 0], T[2, 1] = lam_p.real, -lam_p.imag
        T[3, 0], T[3, 1] = lam_p.imag, lam_p.real
        pulled = T.T @ sf_forms(params, q).omega.matrix @ T
        np.testing.assert_allclose(pulled, sf_forms(params, p).omega.matrix,
                                   atol=1e-12)


class TestFiberArea:
    @pytest.mark.parametrize("eps", [0.1, 0.02])
    def test_equals_eps(self, eps):
        assert sf_fiber_area(SemiFlatParams(1, eps), 0.1) == pytest.approx(
            eps, abs=1e-8)

    def test_z_independent(self):
        params = SemiFlatParams(2, 0.05)
        vals = [sf_fiber_area(params, r * np.exp(0.8j))
                for r in (0.02, 0.07, 0.15, 0.3, 0.5)]
        assert max(vals) - min(vals) < 1e-8

    def test_outside_chart(self):
        with pytest.raises(ChartDomain):
            sf_fiber_area(SemiFlatParams(), 0.9)


def fd_i_ddbar(potential, q, h=1e-3):
    """Richardson-extrapolated i del delbar of a scalar potential.

    q = (v1, v2, xi1, xi2); returns the real 4x4 matrix of the 2-form.
    For K(v, xi): (i ddbar K)(u, w) with complex pairs (v, xi).
    """
    def hessian(step):
        n = 4
        H = np.zeros((n, n))
        for a in range(n):
            for b in range(n):
                ea, eb = np.zeros(n), np.zeros(n)
                ea[a], eb[b] = step, step
                H[a, b] = (potential(q + ea + eb) - potential(q + ea - eb)
                           - potential(q - ea + eb) + potential(q - ea - eb)
                           ) / (4 * step**2)
        return H

    def form_from_hessian(H):
        # i ddbar K = sum (quarter-Laplacian) terms; assemble from the
        # identity i ddbar K (u, w) = 1/2 [H(Ju, w) - H(u, Jw)] with the
        # standard J (complex coordinates v, xi).
        J = np.array([[0., -1, 0, 0], [1, 0, 0, 0],
                      [0, 0, 0, -1], [0, 0, 1, 0]])
        M = 0.5 * (J.T @ H - H @ J)
        return 0.5 * (M - M.T)

    m1 = form_from_hessian(hessian(h))
    m2 = form_from_hessian(hessian(h / 2))
    return (4 * m2 - m1) / 3


class TestCalabi:
    def setup_method(self):
        self.params = CalabiParams(d=1, tau=1j)
        self.k = np.pi * 1 / 1.0

    def potential(self, q):
        t = -np.log(q[2]**2 + q[3]**2) + self.k * q[1]**2
        return (2.0 / 3.0) * t**1.5

    def test_residuals(self):
        t = calabi_forms(self.params, CalabiPoint(0.3 + 0.2j, 0.1))
        assert max(triple_residuals(t.omega, t.bigOmega)) < 1e-8

    def test_omega_matches_fd_ddbar(self):
        q = np.array([0.3, 0.2, 0.1, 0.05])
        trip = calabi_forms(self.params, CalabiPoint(complex(q[0], q[1]),
                                                     complex(q[2], q[3])))
        ref = fd_i_ddbar(self.potential, q, h=2e-4)
        np.testing.assert_allclose(trip.omega.matrix, ref, atol=5e-7)

    def test_phase_equivariance(self):
        th = 0.77
        c, s = np.cos(th), np.sin(th)
        R = np.eye(4)
        R[2:, 2:] = [[c, -s], [s, c]]
        p0 = CalabiPoint(0.3 + 0.2j, 0.1 + 0.02j)
        p1 = CalabiPoint(p0.v, p0.xi * np.exp(1j * th))
        m0 = calabi_forms(self.params, p0).omega.matrix
        m1 = calabi_forms(self.params, p1).omega.matrix
        np.testing.assert_allclose(R.T @ m1 @ R, m0, atol=1e-12)

    def test_t_doubling_scales_base_block(self):
        # at Im v = 0 the base block is proportional to sqrt(t)
        t_of = lambda xi: -np.log(xi**2)
        xi1 = 0.2
        t1 = t_of(xi1)
        xi2 = np.exp(-t1)  # t2 = 2 t1
        m1 = calabi_forms(self.params, CalabiPoint(0.3 + 0.0j, xi1)).omega.matrix
        m2 = calabi_forms(self.params, CalabiPoint(0.3 + 0.0j, xi2)).omega.matrix
        assert m2[0, 1] / m1[0, 1] == pytest.approx(np.sqrt(2.0), abs=1e-6)

    def test_chart_domain(self):
        with pytest.raises(ChartDomain):
            calabi_forms(self.params, CalabiPoint(0.0j, 1.5 + 0j))


class TestLocalModelMap:
    def test_tau_i(self):
        b0, eps, alpha = local_model_map(1j, 1)
        assert b0 == 0.0
        assert eps == pytest.approx(2 * np.sqrt(2) * np.pi, abs=1e-12)
        assert alpha == pytest.approx(np.sqrt(np.pi), abs=1e-12)

    def test_direct_readoff(self):
        b0, _, _ = local_model_map(0.5 + 2j, 3)
        assert b0 == pytest.approx(-0.75, abs=1e-15)

    @given(st.floats(-0.5, 0.5), st.floats(0.3, 50.0), st.integers(1, 9))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, re, im, d):
        tau = complex(re, im)
        b0, eps, _ = local_model_map(tau, d)
        assert abs(local_model_inverse(b0, eps, d) - tau) < 1e-12


class TestOVPotential:
    def setup_method(self):
        self.params = OVParams(eps=0.1, series_terms=64, core_radius=2.0)

    def test_harmonic(self):
        h = 1e-3
        V = lambda z, t: ov_potential(self.params, z, t)[0]
        z0, t0 = 0.3 + 0.0j, 0.37
        lap = (V(z0 + h, t0) + V(z0 - h, t0) + V(z0 + 1j * h, t0)
               + V(z0 - 1j * h, t0) + V(z0, t0 + h) + V(z0, t0 - h)
               - 6 * V(z0, t0)) / h**2
        assert abs(lap) < 1e-5

    def test_bessel_tail_small_far_out(self):
        c0 = (1.0 + np.log(1.0 / self.params.core_radius)) / (2 * np.pi)
        v, _ = ov_potential(self.params, 1.5 + 0j, 0.0)
        vstar = v + np.log(1.5) / (2 * np.pi) - c0
        assert 0 < vstar < 1e-3
        v2, _ = ov_potential(self.params, 1.8 + 0j, 0.0)
        vstar2 = v2 + np.log(1.8) / (2 * np.pi) - c0
        assert vstar2 < vstar

    def test_periodic_in_t(self):
        v1, _ = ov_potential(self.params, 0.4 + 0.1j, 0.3)
        v2, _ = ov_potential(self.params, 0.4 + 0.1j, 1.3)
        assert v1 == v2

    def test_gradient_termwise(self):
        h = 1e-6
        z0, t0 = 0.35 + 0.12j, 0.41
        v0, grad = ov_potential(self.params, z0, t0)
        for mu, dz in enumerate((h, 1j * h)):
            vp, _ = ov_potential(self.params, z0 + dz, t0)
            vm, _ = ov_potential(self.params, z0 - dz, t0)
            assert grad[mu] == pytest.approx((vp - vm) / (2 * h), abs=1e-6)
        vp, _ = ov_potential(self.params, z0, t0 + h)
        vm, _ = ov_potential(self.params, z0, t0 - h)
        assert grad[2] == pytest.approx((vp - vm) / (2 * h), abs=1e-6)

    def test_series_tail_guard(self):
        with pytest.raises(SeriesTail):
            ov_potential(OVParams(eps=0.1, series_terms=3, core_radius=2.0),
                         0.05 + 0j, 0.3)


class TestOVForms:
    def setup_method(self):
        self.params = OVParams(eps=0.1, series_terms=64, core_radius=1.1)
        self.center = -3.0 + 0.0j

    def test_residuals_random_points(self):
        worst = 0.0
        rng = np.random.default_rng(5)
        for _ in range(20):
            zeta = self.center + rng.uniform(0.05, 1.0) * np.exp(
                1j * rng.uniform(0, 2 * np.pi))
            p = ChartPoint(zeta, complex(rng.uniform(0, 1), rng.uniform(0, 0.3)))
            t = ov_forms(self.params, p, center=self.center)
            worst = max(worst, max(triple_residuals(t.omega, t.bigOmega)))
        assert worst < 1e-7

    def test_far_field_matches_semi_flat(self):
        p = ChartPoint(self.center + 1.0 + 0.3j, 0.2 + 0.1j)
        t_ov = ov_forms(OVParams(eps=0.1, series_terms=64, core_radius=1.2),
                        p, center=self.center)
        t_sf = sf_forms(SemiFlatParams(1, 0.1), p)
        assert np.max(np.abs(t_ov.omega.matrix - t_sf.omega.matrix)) < 1e-3
        assert np.max(np.abs(t_ov.bigOmega.matrix - t_sf.bigOmega.matrix)) < 1e-3

    def test_fiber_area(self):
        # quadrature of the OV omega over a fiber inside the block
        d = 1
        zeta = self.center + 0.25
        t2 = tau2_of(zeta, d)
        m = 48
        total = 0.0
        ta = np.array([0, 0, 1.0, 0])
        for a in np.arange(m) / m:
            for b in np.arange(m) / m:
                p = ChartPoint(zeta, a + b * t2)
                w = ov_forms(self.params, p, center=self.center).omega.matrix
                tb = np.array([0, 0, t2.real, t2.imag])
                total += ta @ w @ tb
        assert total / m**2 == pytest.approx(0.1, abs=1e-6)

    def test_closed_by_finite_differences(self):
        h = 1e-4
        q0 = np.array([self.center.real + 0.3, 0.2, 0.13, 0.07])

        def ev(q):
            p = ChartPoint(complex(q[0], q[1]), complex(q[2], q[3]))
            return ov_forms(self.params, p, center=self.center).omega.matrix

        worst = 0.0
        for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
            def der(mu, a, b):
                e = np.zeros(4)
                e[mu] = h
                return (ev(q0 + e)[a, b] - ev(q0 - e)[a, b]) / (2 * h)
            worst = max(worst, abs(der(i, j, k) - der(j, i, k) + der(k, i, j)))
        assert worst < 1e-6


class TestSKMetric:
    def test_conformal_factor(self):
        g = sk_metric(SemiFlatParams(1, 1.0), np.exp(-2 * np.pi))
        assert g[0, 0] == pytest.approx(np.exp(4 * np.pi), rel=1e-12)
        assert g[0, 1] == 0.0

    def test_radial_distance_closed_form(self):
        params = SemiFlatParams(2, 0.3)
        r, r0 = 0.04, 0.35
        closed = sk_radial_distance(params, r, r0)
        quad = sk_segment_length(params, r, r0, n=256)
        assert quad == pytest.approx(closed, abs=1e-8)

    def test_scaling(self):
        params = SemiFlatParams(1, 0.2)
        base = sk_segment_length(params, 0.05, 0.2)
        c = 3.0
        # scaling the metric by c multiplies lengths by sqrt(c)
        scaled = np.sqrt(c) * base
        g = sk_metric(params, 0.1)
        gc = c * g
        v = np.array([1.0, 0.3])
        assert np.sqrt(v @ gc @ v) == pytest.approx(
            np.sqrt(c) * np.sqrt(v @ g @ v), rel=1e-12)
        assert scaled > base

    def test_domain(self):
        with pytest.raises(ChartDomain):
            sk_metric(SemiFlatParams(), 0.8)


class TestSKBaseBlockInvariant:
    def test_sk_is_section_base_block(self):
        # the SK metric is the base block of the semi-flat metric
        # restricted to vectors tangent to the zero section
        from gilab.geom import J_STANDARD, metric_from_kahler
        params = SemiFlatParams(2, 0.07)
        for zeta in (-2.0 + 0.4j, -3.5 + 2.2j):
            p = ChartPoint(zeta, 0.0j)  # on the section: connection vanishes
            g4 = metric_from_kahler(sf_forms(params, p).omega, J_STANDARD).matrix
            z = np.exp(zeta)
            g_sk = sk_metric(params, z)
            # chart conversion dz = z dzeta: the zeta-frame block picks up |z|^2
            np.testing.assert_allclose(g4[:2, :2], g_sk * abs(z) ** 2,
                                       rtol=1e-10)

    def test_fiber_area_with_b0(self):
        # the b0 twist does not change the fiber area
        assert sf_fiber_area(SemiFlatParams(2, 0.05, b0=0.7), 0.1) == (
            pytest.approx(0.05, abs=1e-8))

"""Closed-form evaluators for the model metric families.

Families on the punctured-disc fibration chart (Re zeta < -0.5): the
semi-flat family, its generalized (b0-twisted) version, and the
Ooguri-Vafa block.  The Calabi ansatz lives on its own chart
(Re v, Im v, Re xi, Im xi) over an elliptic curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import k0 as bessel_k0, k1 as bessel_k1

from .errors import ChartDomain, QuadratureFail, SeriesTail, Singular
from .geom import (DX, DZETA, ChartPoint, ComplexFormValue, FormValue,
                   HKTripleValue, tau2_of, wedge2)
from .ghframe import (TWO_PI, bessel_block, gh_frame, polar_covectors,
                      series_tail_bound)

CHART_RE_MAX = -0.5  # charts are restricted to Re zeta < -0.5

# Default center for a standalone OV block, on the zero section.
OV_DEFAULT_CENTER = -3.0 + 0.0j


@dataclass(frozen=True)
class SemiFlatParams:
    """Parameters of the (generalized) semi-flat family on the I_d model."""

    d: int = 1
    eps: float = 0.1
    b0: float = 0.0
    kappa_spec: str = "1/z"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.kappa_spec != "1/z":
            raise ValueError("only the model volume form kappa = 1/z is implemented")


@dataclass(frozen=True)
class CalabiParams:
    """Degree and base modulus of the Calabi ansatz chart."""

    d: int = 1
    tau: complex = 1j

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.tau.imag <= 0:
            raise ValueError("Im tau must be positive")


@dataclass(frozen=True)
class OVParams:
    """Fiber area, series truncation and validity radius of an OV block."""

    eps: float = 0.1
    series_terms: int = 64
    core_radius: float = 1.0

    def __post_init__(self):
        if self.eps <= 0 or self.core_radius <= 0 or self.series_terms < 1:
            raise ValueError("invalid OV parameters")


@dataclass(frozen=True)
class CalabiPoint:
    """Point (v, xi) of the Calabi chart, 0 < |xi|_h < 1."""

    v: complex
    xi: complex


def _require_chart(p: ChartPoint) -> None:
    if p.zeta.real >= CHART_RE_MAX:
        raise ChartDomain(
            f"Re zeta = {p.zeta.real:.3g} outside validity strip Re zeta < {CHART_RE_MAX}")


def sf_connection_coeff(params: SemiFlatParams, p: ChartPoint) -> complex:
    """dzeta-coefficient of the fiber connection dx + Gamma dzeta.

    In the log chart the model connection B z = i Im(x)/L; the b0 family
    adds the real shift b0 L / (2 pi^2).
    """
    L = -p.zeta.real
    gamma = 1j * p.x.imag / L
    if params.b0 != 0.0:
        gamma = gamma + params.b0 * L / (2.0 * np.pi**2)
    return gamma


def sf_forms(params: SemiFlatParams, p: ChartPoint) -> HKTripleValue:
    """Semi-flat pair at p: fiber area eps, flat fibers, Omega = dx^dzeta."""
    _require_chart(p)
    L = -p.zeta.real
    W = TWO_PI * params.eps / (params.d * L)
    eta = DX + sf_connection_coeff(params, p) * DZETA
    m = 0.5j * (wedge2(DZETA, np.conj(DZETA)) / W + W * wedge2(eta, np.conj(eta)))
    omega = FormValue(m.real)
    big = ComplexFormValue(wedge2(DX, DZETA))
    return HKTripleValue(omega, big)


def sf_fiber_area(params: SemiFlatParams, z: complex, grid: int = 16,
                  tol: float = 1e-8) -> float:
    """Quadrature of omega_sf over the fiber torus above z.

    Trapezoid rule in the action-angle cell (periodic, so spectrally
    accurate); the grid-doubling discrepancy is the error estimate.
    """
    if abs(z) >= np.exp(CHART_RE_MAX):
        raise ChartDomain("fiber base point outside |z| < e^{-1/2}")
    zeta = complex(np.log(z))

    def _integral(m: int) -> float:
        t2 = tau2_of(zeta, params.d)
        aa, bb = np.meshgrid(np.arange(m) / m, np.arange(m) / m, indexing="ij")
        total = 0.0
        ta = np.array([0.0, 0.0, 1.0, 0.0])  # d/da in the chart frame
        for a, b in zip(aa.ravel(), bb.ravel()):
            x = a + b * t2
            pt = ChartPoint(zeta, x)
            w = sf_forms(params, pt).omega.matrix
            tb = np.array([0.0, 0.0, t2.real, t2.imag])  # d/db
            total += ta @ w @ tb
        return total / m**2

    i1, i2 = _integral(grid), _integral(2 * grid)
    if abs(i2 - i1) > tol:
        raise QuadratureFail(f"fiber quadrature error estimate {abs(i2 - i1):.2e}")
    return float(i2)


def local_model_map(tau: complex, d: int) -> tuple[float, float, float]:
    """Parameters (b0, eps, alpha) of the semi-flat model matching modulus tau."""
    if tau.imag <= 0:
        raise ValueError("Im tau must be positive")
    b0 = -0.5 * tau.real * d
    eps = 2.0 * np.sqrt(2.0) * np.pi / tau.imag
    alpha = np.sqrt(d * np.pi * tau.imag)
    return float(b0), float(eps), float(alpha)


def local_model_inverse(b0: float, eps: float, d: int) -> complex:
    """Inverse of local_model_map; exact round trip."""
    return complex(-2.0 * b0 / d, 2.0 * np.sqrt(2.0) * np.pi / eps)


def calabi_forms(params: CalabiParams, q: CalabiPoint) -> HKTripleValue:
    """Calabi-ansatz pair from the potential (2/3) t^{3/2}, t = -log|xi|_h^2.

    The hermitian model on the cover is -log|xi|_h^2 = -log|xi|^2
    + (pi d / Im tau) (Im v)^2, and the base holomorphic 1-form is
    normalized so the pair is exactly compatible.
    """
    k = np.pi * params.d / params.tau.imag
    if q.xi == 0:
        raise ChartDomain("|xi| must be positive")
    t = -np.log(abs(q.xi) ** 2) + k * q.v.imag**2
    if t <= 0:
        raise ChartDomain("|xi|_h >= 1: outside the Calabi chart")
    dv = np.array([1.0, 1.0j, 0.0, 0.0])
    dxi = np.array([0.0, 0.0, 1.0, 1.0j])
    phi_v = -1j * k * q.v.imag
    alpha = -dxi / q.xi + phi_v * dv  # = del t
    m = 1j * (0.5 / np.sqrt(t) * wedge2(alpha, np.conj(alpha))
              + np.sqrt(t) * (k / 2.0) * wedge2(dv, np.conj(dv)))
    omega = FormValue(m.real)
    big = ComplexFormValue(np.sqrt(k) * wedge2(dv, dxi / q.xi))
    return HKTripleValue(omega, big)


def ov_potential(params: OVParams, z: complex, t: float) -> tuple[float, np.ndarray]:
    """Unit-period OV potential V0 + V* and its gradient (d/dz1, d/dz2, d/dt).

    V = -(1/2pi) log|z| + c0 + (1/pi) sum_n cos(2 pi n t) K0(2 pi n |z|),
    with c0 fixing V = 1/(2 pi) at |z| = core_radius.  Termwise gradients.
    """
    r = abs(z)
    if r == 0.0 or r >= params.core_radius:
        raise ChartDomain("require 0 < |z| < core_radius")
    if r < 1e-9 and abs(t - round(t)) < 1e-9:
        raise Singular("lattice singular point of the OV potential")
    tail = series_tail_bound(params.series_terms, r, 1.0)  # unit-period modes
    if tail > 1e-12:
        raise SeriesTail(f"K0 tail {tail:.2e} exceeds 1e-12; increase series_terms")
    c0 = (1.0 + np.log(1.0 / params.core_radius)) / TWO_PI
    n = np.arange(1, params.series_terms + 1, dtype=float)
    kk = TWO_PI * n
    K0, K1 = bessel_k0(kk * r), bessel_k1(kk * r)
    cs, sn = np.cos(kk * t), np.sin(kk * t)
    V = -np.log(r) / TWO_PI + c0 + np.sum(cs * K0) / np.pi
    dV_dr = -1.0 / (TWO_PI * r) - np.sum(cs * kk * K1) / np.pi
    dV_dt = -np.sum(sn * kk * K0) / np.pi
    grad = np.array([dV_dr * z.real / r, dV_dr * z.imag / r, dV_dt])
    return float(V), grad


def ov_forms(params: OVParams, p: ChartPoint, center: complex = OV_DEFAULT_CENTER,
             d: int = 1, b_offset: float = 0.0) -> HKTripleValue:
    """Ooguri-Vafa block on the model chart, centered at a base point.

    Gibbons-Hawking pair with potential V_sf + V* and connection
    A_sf + A*; exponentially asymptotic to sf_forms away from the center.
    The monopole sits on the fiber circle b = b_offset (translation by a
    holomorphic section).
    """
    _require_chart(p)
    rho, _phi, _drho, dphi = polar_covectors(p, center)
    if rho >= params.core_radius:
        raise ChartDomain(f"rho = {rho:.3g} outside the OV validity radius")
    fr = gh_frame(p, d, params.eps)
    blk = bessel_block(rho, fr.u1, params.eps, params.series_terms,
                       u1_offset=params.eps * b_offset)
    V = fr.V_sf + blk.V
    if V <= 0:
        raise ChartDomain("OV potential not positive here (too deep in the core)")
    theta = fr.ds + fr.A_sf1 * fr.du1 + blk.Aphi * dphi
    omega = FormValue(wedge2(theta, fr.du1) + V * wedge2(fr.dzeta1, fr.dzeta2))
    big = ComplexFormValue(wedge2(theta + 1j * V * fr.du1, DZETA))
    return HKTripleValue(omega, big)


def sk_metric(params: SemiFlatParams, z: complex) -> np.ndarray:
    """Special Kahler base metric (d L / 2 pi eps) |dz|^2/|z|^2 in (Re z, Im z)."""
    r = abs(z)
    if r == 0.0 or r >= np.exp(CHART_RE_MAX):
        raise ChartDomain("require 0 < |z| < e^{-1/2}")
    L = -np.log(r)
    factor = params.d * L / (TWO_PI * params.eps * r**2)
    return factor * np.eye(2)


def sk_radial_distance(params: SemiFlatParams, r: float, r0: float) -> float:
    """Closed-form radial distance |z|=r to |z|=r0 in the SK metric."""
    if not (0 < r < 1 and 0 < r0 < 1):
        raise ChartDomain("radii must lie in (0, 1)")
    c = np.sqrt(params.d / (TWO_PI * params.eps))
    L, L0 = -np.log(r), -np.log(r0)
    return float(c * (2.0 / 3.0) * abs(L**1.5 - L0**1.5))

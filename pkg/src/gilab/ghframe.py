"""Gibbons-Hawking frame machinery shared by the OV block and the gluing.

The model semi-flat metric is a GH ansatz over the flat base
(u1, zeta1, zeta2) with u1 = eps*b periodic of period eps, fiber circle
s = a (the action-angle coordinates of x = a + b tau2(zeta)), potential
V_sf = d L / (2 pi eps) and connection A_sf = d zeta2/(2 pi eps) du1.

A monopole block centered at a base point zeta_c adds the zero-mode-free
harmonic series

    V* = sum_n c_n cos(k_n (u1 - u1_off)) K0(k_n rho),   c_n = 1/(pi eps),
    A* = sum_n -c_n rho K1(k_n rho) sin(k_n (u1 - u1_off)) dphi,

with k_n = 2 pi n / eps and rho e^{i phi} = zeta - zeta_c.  Explicit
primitives used by the gluing (d eta_n and d nu_n reproduce the mode
increments of omega and Omega):

    eta_n = -(c_n/k_n) rho K1(k_n rho) cos(k_n u1) dphi
    nu_n  = (i c_n/k_n) K0(k_n rho) sin(k_n u1) dzeta

All covectors are produced in the chart frame (zeta1, zeta2, x1, x2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import k0 as bessel_k0, k1 as bessel_k1

from .errors import ChartDomain, SeriesTail, Singular
from .geom import ChartPoint, tau2_of

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GHFrame:
    """Covectors and scalars of the GH presentation at one chart point."""

    ds: np.ndarray
    du1: np.ndarray
    dzeta1: np.ndarray
    dzeta2: np.ndarray
    u1: float
    b: float
    V_sf: float
    A_sf1: float  # du1-coefficient of the flat connection
    eps: float
    d: int


def gh_frame(p: ChartPoint, d: int, eps: float) -> GHFrame:
    """GH covectors at p for the model fibration with fiber area eps."""
    L = -p.zeta.real
    if L <= 0:
        raise ChartDomain("point outside the punctured-disc chart")
    t2 = tau2_of(p.zeta, d)
    im2, re2 = t2.imag, t2.real
    b = p.x.imag / im2
    # dIm tau2 = -(d/2pi) dzeta1, dRe tau2 = (d/2pi) dzeta2.
    dzeta1 = np.array([1.0, 0.0, 0.0, 0.0])
    dzeta2 = np.array([0.0, 1.0, 0.0, 0.0])
    dx1 = np.array([0.0, 0.0, 1.0, 0.0])
    dx2 = np.array([0.0, 0.0, 0.0, 1.0])
    db = (dx2 + b * (d / TWO_PI) * dzeta1) / im2
    da = dx1 - re2 * db - b * (d / TWO_PI) * dzeta2
    du1 = eps * db
    V_sf = d * L / (TWO_PI * eps)
    A_sf1 = d * p.zeta.imag / (TWO_PI * eps)
    return GHFrame(ds=da, du1=du1, dzeta1=dzeta1, dzeta2=dzeta2,
                   u1=eps * b, b=b, V_sf=V_sf, A_sf1=A_sf1, eps=eps, d=d)


def polar_covectors(p: ChartPoint, center: complex) -> tuple[float, float, np.ndarray, np.ndarray]:
    """(rho, phi, drho, dphi) of the base offset zeta - center."""
    w = p.zeta - center
    rho = abs(w)
    if rho == 0.0:
        raise Singular("evaluation at a block center")
    phi = float(np.angle(w))
    c, s = np.cos(phi), np.sin(phi)
    drho = np.array([c, s, 0.0, 0.0])
    dphi = np.array([-s, c, 0.0, 0.0]) / rho
    return rho, phi, drho, dphi


def series_tail_bound(n_terms: int, rho: float, eps: float) -> float:
    """Upper bound for the dropped K0 tail, sum_{n > N} c_n K0(k_n rho)."""
    k_next = TWO_PI * (n_terms + 1) / eps
    x = k_next * rho
    if x <= 0:
        return np.inf
    ratio = np.exp(-TWO_PI * rho / eps)
    head = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / (np.pi * eps)
    return float(head / max(1e-300, 1.0 - ratio))


@dataclass(frozen=True)
class BesselBlock:
    """Mode sums of one monopole block at a common evaluation point.

    Carries the potential/connection increments and the primitive
    coefficients needed by the glued ansatz; all derivatives are of the
    plain sums with respect to (rho, u1).
    """

    V: float          # V*                      (scalar)
    V_rho: float
    V_u1: float
    Aphi: float       # dphi-coefficient of A*
    h_eta: float      # eta = h_eta dphi
    h_nu: complex     # nu = h_nu dzeta
    h_kap0: float     # kappa = gamma'(rho) h_kap0 dphi
    h_kap0_rho: float
    h_kap0_u1: float


def bessel_block(rho: float, u1: float, eps: float, n_terms: int,
                 u1_offset: float = 0.0, tail_tol: float = 1e-12) -> BesselBlock:
    """Evaluate all mode sums of a block at base distance rho, angle u1."""
    tail = series_tail_bound(n_terms, rho, eps)
    if tail > tail_tol:
        raise SeriesTail(
            f"K0 tail {tail:.2e} beyond {tail_tol:.0e} at rho={rho:.3g}; "
            f"increase series_terms")
    n = np.arange(1, n_terms + 1, dtype=float)
    k = TWO_PI * n / eps
    c = 1.0 / (np.pi * eps)
    x = k * rho
    K0, K1 = bessel_k0(x), bessel_k1(x)
    u = u1 - u1_offset
    cs, sn = np.cos(k * u), np.sin(k * u)
    V = c * np.sum(cs * K0)
    V_rho = -c * np.sum(cs * k * K1)          # K0' = -K1
    V_u1 = -c * np.sum(sn * k * K0)
    Aphi = -c * rho * np.sum(K1 * sn)
    h_eta = -c * rho * np.sum(K1 * cs / k)
    h_nu = 1j * c * np.sum(K0 * sn / k)
    h_kap0 = c * rho * np.sum(K0 * cs / k**2)
    # d/drho (rho K0(k rho)) = K0 - k rho K1
    h_kap0_rho = c * np.sum((K0 - x * K1) * cs / k**2)
    h_kap0_u1 = -c * rho * np.sum(K0 * sn / k)
    return BesselBlock(V=float(V), V_rho=float(V_rho), V_u1=float(V_u1),
                       Aphi=float(Aphi), h_eta=float(h_eta), h_nu=complex(h_nu),
                       h_kap0=float(h_kap0), h_kap0_rho=float(h_kap0_rho),
                       h_kap0_u1=float(h_kap0_u1))


def smootherstep(t: float) -> tuple[float, float, float]:
    """C^2 step 6t^5-15t^4+10t^3 with first and second derivatives."""
    if t <= 0.0:
        return 0.0, 0.0, 0.0
    if t >= 1.0:
        return 1.0, 0.0, 0.0
    s = t**3 * (10.0 + t * (-15.0 + 6.0 * t))
    s1 = 30.0 * t**2 * (1.0 + t * (-2.0 + t))
    s2 = 60.0 * t * (1.0 + t * (-3.0 + 2.0 * t))
    return s, s1, s2


def cutoff(rho: float, r_inner: float, r_outer: float) -> tuple[float, float, float]:
    """Profile gamma with gamma=1 for rho<=r_inner, 0 for rho>=r_outer."""
    width = r_outer - r_inner
    t = (rho - r_inner) / width
    s, s1, s2 = smootherstep(t)
    return 1.0 - s, -s1 / width, -s2 / width**2

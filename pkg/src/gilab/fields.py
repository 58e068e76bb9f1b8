"""Named metric families behind one evaluator interface.

A MetricField bundles a family tag, its parameter record and a global
scale c (the metric is c * g, realized by scaling the form pair by c).
Evaluators take chart coordinate 4-vectors; sampling uses a parameter
box whose last two coordinates are action-angle (a, b) for the fibration
families, with the Jacobian handled by param_to_chart / param_density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import (CHART_RE_MAX, CalabiPoint, OVParams, calabi_forms,
                     ov_forms, sf_forms)
from .errors import ChartDomain
from .geom import (DX, DZETA, ChartPoint, ComplexFormValue, FormValue,
                   HKTripleValue, J_STANDARD, complex_structure_from_bigomega,
                   metric_from_kahler, tau2_of, wedge2, wedge_top)
from .gluing import BFieldCocycle, glued_ansatz, twist_forms

FIBRATION_FAMILIES = ("semi-flat", "generalized-sf", "ov", "glued", "twisted")
_STD_J_FAMILIES = ("flat", "semi-flat", "generalized-sf", "calabi")

_FLAT_OMEGA = FormValue(np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
]))
_FLAT_BIG = ComplexFormValue(wedge2(DZETA, DX))


@dataclass(frozen=True)
class OVFieldParams:
    """Standalone OV block: parameters plus placement on the chart."""

    ov: OVParams
    center: complex = -3.0 + 0.0j
    d: int = 1
    b_offset: float = 0.0


@dataclass(frozen=True)
class Box:
    """Axis box of sampling parameters.

    periodic lists (dim_index, period) pairs for coordinates that wrap,
    e.g. action-angle coordinates with period 1 or angles with period 2pi.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    periodic: tuple[tuple[int, float], ...] = ()

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lebesgue(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))


@dataclass(frozen=True)
class MetricField:
    """family in {flat, semi-flat, generalized-sf, calabi, ov, glued,
    twisted, sk-base}; scale multiplies the Riemannian metric."""

    family: str
    params: object = None
    scale: float = 1.0
    cocycle: BFieldCocycle | None = None

    def __post_init__(self):
        known = ("flat", "semi-flat", "generalized-sf", "calabi", "ov",
                 "glued", "twisted", "sk-base")
        if self.family not in known:
            raise ValueError(f"unknown family {self.family!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.family == "twisted" and self.cocycle is None:
            raise ValueError("twisted field needs a cocycle")

    @property
    def dim(self) -> int:
        return 2 if self.family == "sk-base" else 4

    # -- chart-coordinate evaluators -------------------------------------

    def triple_at(self, q: np.ndarray) -> HKTripleValue:
        q = np.asarray(q, dtype=float)
        fam = self.family
        if fam == "flat":
            trip = HKTripleValue(_FLAT_OMEGA, _FLAT_BIG)
        elif fam in ("semi-flat", "generalized-sf"):
            trip = sf_forms(self.params, _chart_point(q))
        elif fam == "calabi":
            trip = calabi_forms(self.params, CalabiPoint(
                complex(q[0], q[1]), complex(q[2], q[3])))
        elif fam == "ov":
            fp: OVFieldParams = self.params
            trip = ov_forms(fp.ov, _chart_point(q), center=fp.center, d=fp.d,
                            b_offset=fp.b_offset)
        elif fam == "glued":
            trip = glued_ansatz(self.params, _chart_point(q))
        elif fam == "twisted":
            trip = twist_forms(self.cocycle, self.params, _chart_point(q))
        else:
            raise ChartDomain("sk-base has no 4d triple; use metric_at")
        if self.scale == 1.0:
            return trip
        c = self.scale
        return HKTripleValue(FormValue(c * trip.omega.matrix),
                             ComplexFormValue(c * trip.bigOmega.matrix))

    def complex_structure(self, trip: HKTripleValue) -> np.ndarray:
        if self.family in _STD_J_FAMILIES:
            return J_STANDARD.matrix
        return complex_structure_from_bigomega(trip.bigOmega).matrix

    def metric_at(self, q: np.ndarray, validate: bool = False) -> np.ndarray:
        if self.family == "sk-base":
            # coordinates (L, theta) with |dz|^2/|z|^2 = dL^2 + dtheta^2
            L = q[0]
            if L <= 0:
                raise ChartDomain("sk-base needs L > 0")
            w = self.params.d * L / (2.0 * np.pi * self.params.eps)
            return self.scale * w * np.eye(2)
        trip = self.triple_at(q)
        J = self.complex_structure(trip)
        if validate:
            return metric_from_kahler(trip.omega, _as_J(J)).matrix
        g = trip.omega.matrix @ J
        return 0.5 * (g + g.T)

    def density_at(self, q: np.ndarray) -> float:
        """Volume density against the chart Lebesgue element."""
        if self.family == "sk-base":
            g = self.metric_at(q)
            return float(np.sqrt(np.linalg.det(g)))
        trip = self.triple_at(q)
        return 0.5 * wedge_top(trip.omega, trip.omega)

    # -- parameter-space sampling helpers --------------------------------

    def param_to_chart(self, u: np.ndarray) -> np.ndarray:
        """Map sampling parameters to chart coordinates.

        Fibration families sample (zeta1, zeta2, a, b); others sample the
        chart coordinates directly.
        """
        u = np.asarray(u, dtype=float)
        if self.family in FIBRATION_FAMILIES:
            zeta = complex(u[0], u[1])
            x = u[2] + u[3] * tau2_of(zeta, self._d())
            return np.array([u[0], u[1], x.real, x.imag])
        return u.copy()

    def param_jacobian(self, u: np.ndarray) -> float:
        """|d(chart)/d(params)| of param_to_chart."""
        if self.family in FIBRATION_FAMILIES:
            return abs(tau2_of(complex(u[0], u[1]), self._d()).imag)
        return 1.0

    def param_density(self, u: np.ndarray) -> float:
        return self.density_at(self.param_to_chart(u)) * self.param_jacobian(u)

    def contains(self, q: np.ndarray, margin: float = 0.0) -> bool:
        """Validity test of a chart coordinate with an optional margin."""
        fam = self.family
        if fam == "flat":
            return True
        if fam in ("semi-flat", "generalized-sf", "glued", "twisted", "ov"):
            if q[0] >= CHART_RE_MAX - margin:
                return False
            if fam == "ov":
                fp: OVFieldParams = self.params
                rho = abs(complex(q[0], q[1]) - fp.center)
                lo = _rho_floor(fp.ov.eps, fp.ov.series_terms)
                return lo + margin < rho < fp.ov.core_radius - margin
            if fam in ("glued", "twisted"):
                cfg = self.params if fam == "glued" else self.params
                lo = _rho_floor(cfg.sf.eps, cfg.series_terms)
                from .gluing import nearest_image
                for zj in cfg.singular_points:
                    if abs(complex(q[0], q[1]) - nearest_image(complex(q[0], q[1]), zj)) < lo + margin:
                        return False
            return True
        if fam == "calabi":
            k = np.pi * self.params.d / self.params.tau.imag
            xi2 = q[2] ** 2 + q[3] ** 2
            if xi2 <= 0:
                return False
            t = -np.log(xi2) + k * q[1] ** 2
            return t > margin
        if fam == "sk-base":
            return q[0] > -CHART_RE_MAX + margin
        return True

    def fd_step_hint(self, q: np.ndarray, base: float = 1e-3) -> float:
        """Finite-difference step scaled to the local coordinate scale."""
        if self.family == "calabi":
            xi = np.hypot(q[2], q[3])
            return base * float(np.clip(xi, 1e-2, 1.0))
        return base

    def exact_distance(self, q1: np.ndarray, q2: np.ndarray) -> float | None:
        """Closed-form distance where the family admits one (flat only)."""
        if self.family == "flat":
            return float(np.sqrt(self.scale) * np.linalg.norm(np.asarray(q1) - np.asarray(q2)))
        return None

    def _d(self) -> int:
        if self.family in ("semi-flat", "generalized-sf"):
            return self.params.d
        if self.family == "ov":
            return self.params.d
        if self.family in ("glued", "twisted"):
            return self.params.sf.d
        return 1


def _chart_point(q: np.ndarray) -> ChartPoint:
    return ChartPoint(complex(q[0], q[1]), complex(q[2], q[3]))


def _as_J(J: np.ndarray):
    from .geom import ComplexStructureValue
    return ComplexStructureValue(J)


def _rho_floor(eps: float, n_terms: int, tol: float = 1e-12) -> float:
    """Smallest block radius with certified series tail below tol."""
    from .ghframe import series_tail_bound
    lo, hi = 1e-6 * eps, 10.0 * eps
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if series_tail_bound(n_terms, mid, eps) > tol:
            lo = mid
        else:
            hi = mid
    return hi

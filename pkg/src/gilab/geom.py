"""Pointwise linear algebra of 2-forms, complex structures and metrics.

Everything lives in a fixed real frame on a 4-dimensional chart.  For the
fibration charts the frame is (Re zeta, Im zeta, Re x, Im x) where zeta is
the log-base coordinate and x the fiber coordinate; other charts reuse the
same machinery with their own coordinate reading.

Conversion conventions fixed once here: a complex 1-form is stored as a
complex covector c with alpha = sum_i c[i] e^i, so dzeta = (1, i, 0, 0) and
(i/2) dz wedge dzbar = dRe z wedge dIm z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartDomain, DegenerateTriple, DivisionByZero, NotPositive

# Frame covectors of the chart (Re zeta, Im zeta, Re x, Im x).
DZETA = np.array([1.0, 1.0j, 0.0, 0.0])
DX = np.array([0.0, 0.0, 1.0, 1.0j])

# Index pairs of the strict upper triangle, row-major.
_UPPER = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def wedge2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of the wedge of two 1-form covectors: (a^b)(u,v) = u.M.v."""
    return np.outer(a, b) - np.outer(b, a)


def _check_finite(m: np.ndarray) -> None:
    if not np.all(np.isfinite(np.asarray(m, dtype=complex).view(float))):
        raise ChartDomain("non-finite tensor components")


def _antisymmetrize_exact(m: np.ndarray) -> np.ndarray:
    """Rebuild from the strict upper triangle so antisymmetry is exact."""
    out = np.zeros_like(m)
    for i, j in _UPPER:
        out[i, j] = m[i, j]
        out[j, i] = -m[i, j]
    return out


@dataclass(frozen=True)
class ChartPoint:
    """Point of the model fibration in log-base coordinates.

    zeta lives on the log cover (Re zeta < 0 over the punctured disc), x on
    the universal cover of the fiber, and sheet counts continuations of
    Im zeta across [0, 2pi).
    """

    zeta: complex
    x: complex
    sheet: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.zeta.real) and np.isfinite(self.zeta.imag)
                and np.isfinite(self.x.real) and np.isfinite(self.x.imag)):
            raise ChartDomain("non-finite chart coordinates")
        if self.zeta.real >= 0:
            raise ChartDomain(f"Re zeta must be < 0, got {self.zeta.real}")

    @property
    def z(self) -> complex:
        return complex(np.exp(self.zeta))

    @property
    def frame(self) -> np.ndarray:
        return np.array([self.zeta.real, self.zeta.imag, self.x.real, self.x.imag])


def tau2_of(zeta: complex, d: int) -> complex:
    """Second lattice period d/(2 pi i) * zeta of the model fibration."""
    return d * zeta / (2j * np.pi)


def action_angle(p: ChartPoint, d: int) -> tuple[float, float]:
    """Coordinates (a, b) with x = a + b tau2(zeta), tau1 = 1."""
    t2 = tau2_of(p.zeta, d)
    if t2.imag <= 0:
        raise ChartDomain("lattice degenerate: Im tau2 <= 0")
    b = p.x.imag / t2.imag
    a = p.x.real - b * t2.real
    return a, b


def reduce_point(p: ChartPoint, d: int) -> ChartPoint:
    """Reduce x to the fundamental lattice cell; idempotent.

    Iterates because a representative can round onto the far cell edge;
    the fixed point is returned unchanged bitwise.
    """
    t2 = tau2_of(p.zeta, d)
    q = p
    for _ in range(4):
        a, b = action_angle(q, d)
        ma, mb = np.floor(a), np.floor(b)
        if ma == 0 and mb == 0:
            return q
        q = ChartPoint(q.zeta, q.x - ma - mb * t2, q.sheet)
    return q


def deck_transform(p: ChartPoint, n: int) -> ChartPoint:
    """Continue zeta across the cut n times: zeta -> zeta + 2 pi i n."""
    return ChartPoint(p.zeta + 2j * np.pi * n, p.x, p.sheet + n)


@dataclass(frozen=True)
class FormValue:
    """Real 2-form value; antisymmetry is exact by upper-triangle storage."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        _check_finite(m)
        object.__setattr__(self, "matrix", _antisymmetrize_exact(m))

    def __add__(self, other: "FormValue") -> "FormValue":
        return FormValue(self.matrix + other.matrix)

    def __rmul__(self, c: float) -> "FormValue":
        return FormValue(c * self.matrix)


@dataclass(frozen=True)
class ComplexFormValue:
    """Complex 2-form value in the same frame; (2,0)+(0,2) content allowed."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        _check_finite(m)
        object.__setattr__(self, "matrix", _antisymmetrize_exact(m))

    def conj(self) -> "ComplexFormValue":
        return ComplexFormValue(np.conj(self.matrix))

    @property
    def real(self) -> FormValue:
        return FormValue(self.matrix.real)

    @property
    def imag(self) -> FormValue:
        return FormValue(self.matrix.imag)


@dataclass(frozen=True)
class ComplexStructureValue:
    """Almost complex structure value, J.J = -I within 1e-12."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        _check_finite(m)
        if np.max(np.abs(m @ m + np.eye(4))) > 1e-12:
            raise DegenerateTriple("J^2 != -I beyond 1e-12")
        object.__setattr__(self, "matrix", m)


# Standard complex structure of the chart (both coordinate planes).
J_STANDARD = ComplexStructureValue(np.array([
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
]))


@dataclass(frozen=True)
class RiemannMetricValue:
    """Symmetric positive definite 4x4 metric value."""

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        _check_finite(m)
        m = 0.5 * (m + m.T)
        ev = np.linalg.eigvalsh(m)
        if ev[0] <= 0:
            raise NotPositive(f"metric not positive definite, min eigenvalue {ev[0]:.3e}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "eigenvalues", ev)


@dataclass(frozen=True)
class HKTripleValue:
    """Pointwise pair (omega, Omega) of a hyperkahler structure."""

    omega: FormValue
    bigOmega: ComplexFormValue


def wedge_top(a: FormValue, b: FormValue) -> float:
    """Coefficient c with a^b = c dVol0 in the frame volume element."""
    return float(_pfaffian_pair(a.matrix, b.matrix).real)


def wedge_top_c(a, b) -> complex:
    """Complex-coefficient version of wedge_top."""
    ma = a.matrix if hasattr(a, "matrix") else np.asarray(a)
    mb = b.matrix if hasattr(b, "matrix") else np.asarray(b)
    return complex(_pfaffian_pair(ma, mb))


def _pfaffian_pair(A: np.ndarray, B: np.ndarray) -> complex:
    return (A[0, 1] * B[2, 3] - A[0, 2] * B[1, 3] + A[0, 3] * B[1, 2]
            + A[1, 2] * B[0, 3] - A[1, 3] * B[0, 2] + A[2, 3] * B[0, 1])


def metric_from_kahler(omega: FormValue, J: ComplexStructureValue) -> RiemannMetricValue:
    """Metric g(u, v) = omega(u, J v) of a compatible pair.

    Requires omega J-invariant within 1e-9; the result is symmetrized and
    must come out positive definite (NotPositive otherwise).
    """
    m, j = omega.matrix, J.matrix
    pulled = j.T @ m @ j
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(pulled - m)) > 1e-9 * scale:
        raise DegenerateTriple("omega is not J-invariant within 1e-9")
    g = m @ j
    return RiemannMetricValue(0.5 * (g + g.T))


def triple_residuals(omega: FormValue, bigOmega: ComplexFormValue) -> tuple[float, float, float]:
    """Normalization and orthogonality residuals of a candidate pair.

    r1 = |2 omega^2 / (Omega ^ conj Omega) - 1|,
    r2 = |omega ^ Omega| / |Omega ^ conj Omega|,
    r3 = |Omega ^ Omega| / |Omega ^ conj Omega|.
    """
    vol = wedge_top_c(bigOmega, bigOmega.conj())
    if abs(vol) < 1e-300:
        raise DivisionByZero("Omega ^ conj(Omega) vanishes at the point")
    r1 = abs(2.0 * wedge_top(omega, omega) / vol - 1.0)
    r2 = abs(wedge_top_c(omega, bigOmega)) / abs(vol)
    r3 = abs(wedge_top_c(bigOmega, bigOmega)) / abs(vol)
    return float(r1), float(r2), float(r3)


def hk_rotate(omega_check: FormValue, bigOmega_check: ComplexFormValue,
              tol: float = 1e-8) -> tuple[FormValue, ComplexFormValue]:
    """Rotate a triple: omega = Re Omega_check, Omega = omega_check - i Im Omega_check."""
    res = triple_residuals(omega_check, bigOmega_check)
    if max(res) > tol:
        raise DegenerateTriple(f"input residuals {res} exceed {tol:.1e}")
    omega = bigOmega_check.real
    big = ComplexFormValue(omega_check.matrix - 1j * bigOmega_check.matrix.imag)
    return omega, big


def complex_structure_from_bigomega(bigOmega: ComplexFormValue) -> ComplexStructureValue:
    """Complex structure determined by a decomposable holomorphic 2-form.

    Splits Omega = alpha ^ beta (rank-2 antisymmetric factorization) and
    declares span(alpha, beta) the (1,0)-coframe.
    """
    m = bigOmega.matrix
    # Pivot on the largest entry to get two independent rows.
    idx = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    i, j = int(idx[0]), int(idx[1])
    if abs(m[i, j]) < 1e-300:
        raise DivisionByZero("zero 2-form has no complex structure")
    alpha = m[i, :] / m[i, j]
    beta = m[:, j].copy()
    # With these normalizations m = beta alpha^T - alpha beta^T up to O(r3).
    rec = np.outer(beta, alpha) - np.outer(alpha, beta)
    if np.max(np.abs(rec - m)) > 1e-8 * np.max(np.abs(m)):
        raise DegenerateTriple("2-form is not decomposable within 1e-8")
    # (1,0)-coframe rows alpha, beta: C J = i C, conjugate rows get -i.
    C = np.vstack([alpha, beta, np.conj(alpha), np.conj(beta)])
    D = np.diag([1j, 1j, -1j, -1j])
    J = np.real(np.linalg.solve(C, D @ C))
    return ComplexStructureValue(J)


def frame_volume_density(omega: FormValue) -> float:
    """Riemannian volume density omega^2 / 2 against the frame element."""
    return 0.5 * wedge_top(omega, omega)

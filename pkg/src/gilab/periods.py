"""Weierstrass periods by complex AGM, discriminant roots, monodromy.

Periods are computed for the cubic y^2 = 4x^3 - g2 x - g3.  The AGM basis
is deterministic (roots ordered by descending real part, ties broken by
descending imaginary part); analytic continuation along a path tracks the
lattice basis by integer rebasing, so loop monodromy matrices come out
with exact integer entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFiber, RootFindFail

_AGM_TOL = 1e-15


@dataclass(frozen=True)
class WeierstrassData:
    """Polynomial families g2(z), g3(z); numpy coefficient order (high first)."""

    g2_coeffs: tuple[float | complex, ...]
    g3_coeffs: tuple[float | complex, ...]

    def __post_init__(self):
        disc = self.disc_coeffs()
        if np.allclose(disc, 0.0):
            raise DegenerateFiber("discriminant vanishes identically")

    def g2(self, z: complex) -> complex:
        return complex(np.polyval(self.g2_coeffs, z))

    def g3(self, z: complex) -> complex:
        return complex(np.polyval(self.g3_coeffs, z))

    def disc_coeffs(self) -> np.ndarray:
        g2c = np.asarray(self.g2_coeffs, dtype=complex)
        g3c = np.asarray(self.g3_coeffs, dtype=complex)
        c = np.polymul(np.polymul(g2c, g2c), g2c)
        d = 27.0 * np.polymul(g3c, g3c)
        n = max(len(c), len(d))
        c = np.concatenate([np.zeros(n - len(c), complex), c])
        d = np.concatenate([np.zeros(n - len(d), complex), d])
        return c - d

    def discriminant(self, z: complex) -> complex:
        return complex(np.polyval(self.disc_coeffs(), z))


def _agm(a: complex, b: complex) -> complex:
    """Complex AGM with the standard good square-root branch choice."""
    for _ in range(200):
        am = 0.5 * (a + b)
        gm = np.sqrt(a * b)
        if abs(am - gm) > abs(am + gm):
            gm = -gm
        a, b = am, gm
        if abs(a - b) <= _AGM_TOL * max(abs(a), 1e-300):
            return complex(0.5 * (a + b))
    return complex(0.5 * (a + b))


def _cubic_roots(g2: complex, g3: complex) -> np.ndarray:
    r = np.roots(np.array([4.0, 0.0, -g2, -g3], dtype=complex))
    if not np.all(np.isfinite(r.view(float))):
        raise RootFindFail("cubic eigensolve returned non-finite roots")
    order = np.lexsort((-r.imag, -r.real))
    return r[order]


def weierstrass_periods(data: WeierstrassData, z: complex) -> tuple[complex, complex]:
    """Period pair (tau1, tau2) at z, normalized so Im(tau2/tau1) > 0."""
    g2, g3 = data.g2(z), data.g3(z)
    if abs(data.discriminant(z)) < 1e-12 * max(1.0, abs(g2) ** 3):
        raise DegenerateFiber(f"discriminant vanishes at z = {z}")
    e1, e2, e3 = _cubic_roots(g2, g3)
    a = np.sqrt(e1 - e3)
    b = np.sqrt(e1 - e2)
    c = np.sqrt(e2 - e3)
    if abs(a - b) > abs(a + b):
        b = -b
    if abs(a - c) > abs(a + c):
        c = -c
    w1 = np.pi / _agm(a, b)          # half-period
    w2 = 1j * np.pi / _agm(a, c)     # half-period
    t1, t2 = 2.0 * w1, 2.0 * w2
    if (t2 / t1).imag < 0:
        t2 = -t2
    return complex(t1), complex(t2)


def _rebase(prev: tuple[complex, complex], fresh: tuple[complex, complex],
            ) -> tuple[tuple[complex, complex], np.ndarray]:
    """Express prev in the fresh basis with integer coefficients.

    Returns the integer-recombined continuation of prev and the integer
    matrix M with prev ~ M @ fresh.
    """
    F = np.array([[fresh[0].real, fresh[1].real],
                  [fresh[0].imag, fresh[1].imag]])
    M = np.zeros((2, 2), dtype=int)
    out = []
    for row, t in enumerate(prev):
        mn = np.linalg.solve(F, np.array([t.real, t.imag]))
        mi = np.rint(mn).astype(int)
        res = abs(mn[0] - mi[0]) + abs(mn[1] - mi[1])
        if res > 0.25:
            raise RootFindFail(
                f"period tracking lost the lattice (residual {res:.3f}); "
                "refine the continuation path")
        M[row] = mi
        out.append(mi[0] * fresh[0] + mi[1] * fresh[1])
    return (out[0], out[1]), M


def continue_periods(data: WeierstrassData, path: np.ndarray,
                     ) -> tuple[list[tuple[complex, complex]], np.ndarray]:
    """Track the period basis along a path of base points.

    Returns the tracked bases and, for a closed path, the integer monodromy
    matrix M with (tracked end basis) = M @ (start AGM basis).
    """
    tracked = [weierstrass_periods(data, complex(path[0]))]
    for z in path[1:]:
        fresh = weierstrass_periods(data, complex(z))
        new, _ = _rebase(tracked[-1], fresh)
        tracked.append(new)
    # total transformation relative to the start basis
    _, M_total = _rebase(tracked[-1], tracked[0])
    return tracked, M_total


def loop_monodromy(data: WeierstrassData, center: complex, radius: float,
                   steps: int = 1000) -> np.ndarray:
    """Integer monodromy matrix of the period basis around a closed loop."""
    ang = np.linspace(0.0, 2.0 * np.pi, steps + 1)
    path = center + radius * np.exp(1j * ang)
    _, M = continue_periods(data, path)
    return M


def discriminant_roots(data: WeierstrassData, tol: float = 1e-7,
                       ) -> list[tuple[complex, int]]:
    """Roots of the discriminant with multiplicities, clustered at tol."""
    coeffs = np.trim_zeros(data.disc_coeffs(), "f")
    if len(coeffs) <= 1:
        return []
    r = np.roots(coeffs)
    if not np.all(np.isfinite(r.view(float))):
        raise RootFindFail("companion eigensolve did not converge")
    # polish by a few Newton steps
    dcoeffs = np.polyder(coeffs)
    for _ in range(3):
        vals = np.polyval(coeffs, r)
        dvals = np.polyval(dcoeffs, r)
        mask = np.abs(dvals) > 1e-30
        r[mask] = r[mask] - vals[mask] / dvals[mask]
    clusters: list[list[complex]] = []
    for root in sorted(r, key=lambda w: (w.real, w.imag)):
        for cl in clusters:
            if abs(root - cl[0]) < max(tol, 1e3 * tol * abs(cl[0])):
                cl.append(root)
                break
        else:
            clusters.append([root])
    return [(complex(np.mean(cl)), len(cl)) for cl in clusters]


def colliding_family(eps: float, z0: complex = 0.25, mu0: float = 20.0,
                     ) -> WeierstrassData:
    """Family whose three discriminant roots collide at z0 at rate eps.

    g2(z) = 3 (1 + mu (z - z0)) with mu = mu0/eps and g3 = 1, so the
    discriminant 27[(1 + mu(z-z0))^3 - 1] has roots z0 + (w - 1)/mu over
    cube roots w of unity, pairwise sqrt(3)/mu = sqrt(3) eps / mu0 apart.
    mu0 keeps the collision spread well inside |z0| for every tested eps.
    """
    mu = mu0 / eps
    return WeierstrassData(g2_coeffs=(3.0 * mu, 3.0 * (1.0 - mu * z0)),
                           g3_coeffs=(1.0,))


def sk_segment_length(sf_params, z_a: complex, z_b: complex, n: int = 128) -> float:
    """Straight-segment length in the special Kahler metric (Gauss rule)."""
    from .ansatz import sk_metric
    nodes, weights = np.polynomial.legendre.leggauss(n)
    total = 0.0
    dz = z_b - z_a
    for t, w in zip(0.5 * (nodes + 1.0), 0.5 * weights):
        z = z_a + t * dz
        g = sk_metric(sf_params, z)
        v = np.array([dz.real, dz.imag])
        total += w * np.sqrt(v @ g @ v)
    return float(total)

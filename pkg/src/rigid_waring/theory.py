"""Closed-form condition bounds for Gaussian Waring inputs and numerical checks of them."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, pi, sqrt

import numpy as np
from scipy import integrate

from .conditioning import gamma_frob_exact
from .dense import compositions, dense_expand
from .errors import ArgumentError, CapacityError, DomainError
from .sampling import sample_root_on_hypersurface
from .waring import random_waring

ORACLE_TERM_LIMIT = 10**4


def r_factor(r: int, degree: int) -> float:
    """``R_{r,D} = prod_{j=2}^{D} r / (r - j)``."""
    if degree < 2:
        raise DomainError("degree must be >= 2")
    if r <= degree:
        raise DomainError(f"R undefined for r = {r} <= D = {degree}")
    out = 1.0
    for j in range(2, degree + 1):
        out *= r / (r - j)
    return out


def m_k(n: int, degree: int, k: int) -> float:
    """Per-order constant ``pi / (n D^2) C(D, k)^2 (n + k + 1)^k``."""
    return pi / (n * degree**2) * comb(degree, k) ** 2 * float(n + k + 1) ** k


@dataclass(frozen=True)
class BoundReport:
    n: int
    D: int
    r: int
    R: float
    bound: float
    gamma_w: float
    m_k: tuple  # M_k for k = 2..D


def theorem_bound(n: int, degree: int, r: int) -> BoundReport:
    """Upper bound on the mean squared average gamma of a Gaussian Waring form."""
    if n < 1:
        raise DomainError("n must be >= 1")
    R = r_factor(r, degree)
    bound = pi / 4 * R * (degree - 1) ** 3 * n * (1 + 3 / n) ** 2
    gamma_w = sqrt(pi) / 2 * sqrt(R) * (degree - 1) ** 1.5 * n * (1 + 3 / n)
    ms = tuple(m_k(n, degree, k) for k in range(2, degree + 1))
    return BoundReport(n, degree, r, R, bound, gamma_w, ms)


def radial_factor(r: int, m: int) -> float:
    """``Gamma(r - m) / Gamma(r - 1)`` as the product ``prod_{j=2}^{m} 1/(r-j)``."""
    if not r > m >= 1:
        raise DomainError("need r > m >= 1")
    out = 1.0
    for j in range(2, m + 1):
        out /= r - j
    return out


def radial_factor_check(r: int, m: int, rtol: float = 1e-9):
    """``(closed form, quadrature)`` for the ratio of two Gaussian radial moments."""
    closed = radial_factor(r, m)

    def moment(p):
        val, err = integrate.quad(lambda rho: rho**p * np.exp(-rho * rho), 0.0, np.inf,
                                  epsabs=0.0, epsrel=rtol, limit=200)
        if not np.isfinite(val) or err > 1e3 * rtol * abs(val):
            raise DomainError(f"quadrature did not converge for exponent {p}")
        return val

    quad = moment(2 * r - 2 * m - 1) / moment(2 * r - 3)
    return closed, quad


def _simplex_lattice(parts: int, steps: int) -> np.ndarray:
    return np.array(list(compositions(steps, parts)), dtype=float) / steps


def _q_hat(x: np.ndarray, degree: int, m: int) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.sum(np.where(x > 0, x ** (degree - m), 0.0), axis=-1)
        den = np.sum(x ** (degree - 1), axis=-1)
    return num / den


def spherical_sup_check(r: int, degree: int, m: int, max_points: int = 200_000):
    """Supremum of ``sum X^(D-m) / sum X^(D-1)`` over the simplex in ``R^r``.

    Returns ``(lattice_max, critical_max, r**(m-1))``. The lattice uses a step
    that is a multiple of ``1/r`` so it contains the barycenter; the critical
    values are those at points with ``k`` equal nonzero entries.
    """
    if not 1 <= m < degree:
        raise DomainError("need 1 <= m < D")
    if r < 1:
        raise DomainError("r must be >= 1")
    mult = 1
    # for r = 1 the simplex is a single point and any step works
    while r > 1 and comb(r * (mult + 1) + r - 1, r - 1) <= max_points:
        mult += 1
    grid = _simplex_lattice(r, r * mult)
    lattice_max = float(np.max(_q_hat(grid, degree, m)))
    critical = [float(_q_hat(np.r_[np.full(k, 1.0 / k), np.zeros(r - k)], degree, m)) for k in range(1, r + 1)]
    return lattice_max, max(critical), float(r) ** (m - 1)


def mc_gamma_avg_sq(n: int, degree: int, r: int, trials: int, rng: np.random.Generator,
                    restricted: bool = False):
    """Monte-Carlo mean and standard error of ``gamma_Frob(f, zeta)**2``.

    ``f`` is a Gaussian Waring form in ``n + 1`` variables and ``zeta`` a root
    from the random-line sampler. The unrestricted gamma (the larger of the two
    variants) is used by default so the comparison with the bound is conservative.
    """
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    if comb(n + degree, degree) > ORACLE_TERM_LIMIT:
        raise CapacityError("dense oracle too large for this (n, D)")
    values = np.empty(trials)
    for k in range(trials):
        f = random_waring(n, degree, r, rng)
        zeta = sample_root_on_hypersurface(f, rng)
        values[k] = gamma_frob_exact(dense_expand(f), zeta, restricted=restricted) ** 2
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    return mean, stderr

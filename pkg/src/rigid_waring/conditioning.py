"""Condition numbers and gamma numbers driving the step size.

* :func:`kappa` -- transversality of the hypersurfaces at a point.
* :func:`gamma_frob_exact` -- Frobenius gamma from a dense expansion (oracle).
* :func:`gamma_estimate` -- randomized black-box estimate of the Frobenius gamma.
* :func:`split_gamma` -- kappa times the root-sum-square of per-equation estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, lgamma, log, log2

import numpy as np
import scipy.linalg

from .dense import DensePolynomial, bw_norm, substitute_linear, taylor_shift
from .errors import ArgumentError, SingularPointError
from .geometry import normalize
from .waring import WaringPolynomial, WaringSystem, gradient, homogeneous_parts_at

SINGULAR_TOL = 1e-13


def sample_count(degree: int, eps: float) -> int:
    """Number of random probes ``ceil(1 + log2(D / eps))``."""
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    return int(ceil(1.0 + log2(degree / eps)))


def log_binom(a: int, b: int) -> float:
    return lgamma(a + 1) - lgamma(b + 1) - lgamma(a - b + 1)


def unit_ball_points(normals: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Map complex Gaussian vectors and U(0,1) radii to uniform points of the unit ball.

    Direction from the Gaussian, radius ``U**(1/(2m))`` for the real dimension ``2m``.
    """
    normals = np.asarray(normals, dtype=complex)
    m = normals.shape[-1]
    direction = normals / np.linalg.norm(normals, axis=-1, keepdims=True)
    return direction * (np.asarray(uniforms)[..., None] ** (1.0 / (2 * m)))


def sample_unit_ball(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    normals = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return unit_ball_points(normals, rng.random(count))


def hermitian_normal(grad, z) -> np.ndarray:
    """Hermitian normal ``conj(grad)`` projected to ``z^perp`` (not normalized).

    Its norm is the operator norm of ``v -> grad . v`` restricted to ``z^perp``.
    """
    z = normalize(z)
    g = np.conj(np.asarray(grad, dtype=complex))
    return g - np.vdot(z, g) * z


def kappa_from_normals(normals) -> float:
    """``1 / sigma_min`` of the matrix whose rows are the (unit) normals."""
    normals = np.atleast_2d(np.asarray(normals, dtype=complex))
    if normals.shape[0] == 1:
        return 1.0
    sigma = np.linalg.svd(normals, compute_uv=False)
    if sigma[-1] <= 0.0:
        raise SingularPointError("normals are linearly dependent")
    return float(1.0 / sigma[-1])


def kappa(system: WaringSystem, z) -> float:
    """Norm of the pseudo-inverse of the stacked normal projectors at ``z``.

    The stacked operator ``v -> (nu_i nu_i^H v)_i`` on ``z^perp`` has Gram
    matrix ``N^H N`` where the rows of ``N`` are the unit normals ``nu_i^H``, so
    kappa is ``1 / sigma_min(N)``. For a single equation it is exactly 1.
    """
    z = normalize(z)
    rows = []
    for f in system:
        nu = hermitian_normal(gradient(f, z), z)
        norm = np.linalg.norm(nu)
        if norm <= SINGULAR_TOL:
            raise SingularPointError("projected gradient vanishes")
        rows.append(nu / norm)
    return kappa_from_normals(rows)


def gamma_frob_exact(f: DensePolynomial, zeta, restricted: bool = True) -> float:
    """Frobenius gamma ``max_k (||g_k||_W / ||df|_{zeta^perp}||)**(1/(k-1))``.

    ``g_k`` is the degree-``k`` part of ``z -> f(zeta + z)`` at the unit
    representative of ``zeta``, computed by an exact coefficient shift. With
    ``restricted=True`` the parts are restricted to ``zeta^perp`` before taking
    the Bombieri-Weyl norm (the tangent-space version); otherwise the full parts
    are used.
    """
    zeta = normalize(zeta)
    nu = hermitian_normal(f.gradient(zeta), zeta)
    denom = float(np.linalg.norm(nu))
    if denom <= SINGULAR_TOL:
        raise SingularPointError("projected gradient vanishes")
    shifted = taylor_shift(f, zeta)
    basis = scipy.linalg.null_space(zeta.conj()[None, :]) if restricted else None
    best = 0.0
    for k in range(2, f.degree + 1):
        part = shifted.part(k)
        if restricted:
            part = substitute_linear(part, basis)
        best = max(best, (bw_norm(part) / denom) ** (1.0 / (k - 1)))
    return best


@dataclass(frozen=True)
class EstimateTerms:
    """Raw ingredients of one gamma estimate."""

    sample_count: int
    grad_norm_sq: float
    part_sums: np.ndarray  # sum_i |h_k(w_i)|**2 for k = 2..D


def estimate_terms(f: WaringPolynomial, zeta, w) -> EstimateTerms:
    zeta = np.asarray(zeta, dtype=complex)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    grad = gradient(f, zeta)
    parts = homogeneous_parts_at(f, zeta, w)
    sums = np.sum(np.abs(parts[:, 1:]) ** 2, axis=0)
    return EstimateTerms(w.shape[0], float(np.sum(np.abs(grad) ** 2)), sums)


def combine_terms(terms: EstimateTerms, n: int, degree: int) -> float:
    """``max_k ((32 n k)**k / (s ||dh(0)||**2) C(n+k+1, k) sum|h_k|**2)**(1/(2k-2))``, in log space."""
    if terms.grad_norm_sq <= 0.0:
        raise SingularPointError("gradient of the shifted polynomial vanishes")
    s = terms.sample_count
    best = 0.0
    for k in range(2, degree + 1):
        total = terms.part_sums[k - 2]
        if total <= 0.0:
            continue
        logval = (k * log(32.0 * n * k) - log(s) - log(terms.grad_norm_sq)
                  + log_binom(n + k + 1, k) + log(total))
        best = max(best, float(np.exp(logval / (2 * k - 2))))
    return best


def gamma_estimate(f: WaringPolynomial, zeta, eps: float, rng: np.random.Generator | None = None,
                   w=None) -> float:
    """Randomized estimate of the Frobenius gamma of ``f`` at ``zeta``.

    ``zeta`` is used as given (no normalization), so the example values that
    use a non-unit representative are reproduced. Probes ``w`` are drawn
    uniformly from the unit ball unless supplied; when supplied their number
    must equal ``ceil(1 + log2(D / eps))``.
    """
    if f.degree < 2:
        raise ArgumentError("degree must be >= 2")
    s = sample_count(f.degree, eps)
    if w is None:
        if rng is None:
            raise ArgumentError("need either rng or explicit probes w")
        w = sample_unit_ball(s, f.num_vars, rng)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    if w.shape[0] != s:
        raise ArgumentError(f"expected {s} probes, got {w.shape[0]}")
    return combine_terms(estimate_terms(f, zeta, w), f.num_vars - 1, f.degree)


@dataclass(frozen=True)
class GammaReport:
    per_poly: tuple
    kappa: float
    split_gamma: float
    sample_counts: tuple
    epsilon_budget: float


def split_gamma(system: WaringSystem, z, eps_each: float, rng: np.random.Generator | None = None,
                probes=None) -> GammaReport:
    """``kappa * sqrt(sum_i g_i**2)`` with ``g_i`` the per-equation estimates.

    ``probes[i]`` optionally fixes the unit-ball samples for equation ``i``.
    """
    z = normalize(z)
    k = kappa(system, z)
    estimates, counts = [], []
    for i, f in enumerate(system):
        w = None if probes is None else probes[i]
        estimates.append(gamma_estimate(f, z, eps_each, rng=rng, w=w))
        counts.append(sample_count(f.degree, eps_each))
    total = k * float(np.sqrt(np.sum(np.square(estimates))))
    return GammaReport(tuple(estimates), k, total, tuple(counts), eps_each)

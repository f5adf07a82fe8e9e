"""Sampling start pairs ``(u, zeta)`` with ``(u . f)(zeta) = 0``.

``zeta`` is the intersection of ``n`` random hyperplanes. For each equation a
random point ``y_i`` of ``V(f_i)`` is drawn and ``u_i`` is a uniformly random
unitary carrying ``y_i`` to ``zeta`` and the tangent space of ``V(f_i)`` at
``y_i`` onto the ``i``-th hyperplane.

Points on ``V(f_i)`` come from intersecting it with a random complex line and
picking one of the ``D`` intersection points uniformly. This is not claimed to
be the exact uniform measure on the hypersurface.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import SamplingError
from .geometry import Frame, match_frames, normalize
from .waring import WaringPolynomial, WaringSystem, evaluate, gradient, unitary_action

RESIDUAL_TOL = 1e-8
ROOT_SAMPLER = "random-line intersection, uniform choice among the D roots"


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class StartPair:
    unitaries: np.ndarray
    zeta: np.ndarray
    residuals: tuple


def sample_hyperplane_frames(n: int, rng: np.random.Generator, retries: int = 3):
    """Random hyperplanes ``{z : <nu_i, z> = 0}`` and their common point.

    Returns ``(frames, zeta)`` where ``frames[i]`` sits at ``zeta`` with normal ``nu_i``.
    """
    m = n + 1
    for _ in range(retries + 1):
        normals = np.array([normalize(v) for v in _complex_gaussian(rng, (n, m))])
        _, sigma, vh = np.linalg.svd(normals.conj())
        if sigma[-1] < 1e-12 * sigma[0]:
            continue
        zeta = normalize(vh[-1].conj())
        if np.max(np.abs(normals.conj() @ zeta)) >= 1e-10:
            continue
        frames = [Frame.from_normal(zeta, nu) for nu in normals]
        return frames, zeta
    raise SamplingError("hyperplane normals were rank deficient")


def line_restriction(f: WaringPolynomial, a, b) -> np.ndarray:
    """Ascending coefficients of ``t -> f(a + t b)``, a polynomial of degree ``D``."""
    alpha = f.coeffs @ np.asarray(a, dtype=complex)
    beta = f.coeffs @ np.asarray(b, dtype=complex)
    D = f.degree
    return np.array([comb(D, k) * np.sum(alpha ** (D - k) * beta ** k) for k in range(D + 1)])


def sample_root_on_hypersurface(f: WaringPolynomial, rng: np.random.Generator, retries: int = 5,
                                polish: int = 2, require_regular: bool = True) -> np.ndarray:
    """Unit vector ``y`` with ``f(y) ~ 0``, from a random line through ``V(f)``.

    Roots of the restriction come from companion-matrix eigenvalues and are
    then polished along the line by Newton steps on ``p / p'`` (quadratic
    also at multiple roots), with ``p`` evaluated through the linear forms
    rather than the expanded coefficients. With ``require_regular`` (the
    default) points where the projected gradient vanishes are rejected and
    the line is resampled.
    """
    m, D = f.num_vars, f.degree
    for _ in range(retries + 1):
        a = _complex_gaussian(rng, m)
        b = _complex_gaussian(rng, m)
        coeffs = line_restriction(f, a, b)
        scale = np.max(np.abs(coeffs))
        if scale == 0.0 or abs(coeffs[-1]) < 1e-12 * scale:
            continue
        roots = np.roots(coeffs[::-1])
        t = roots[rng.integers(len(roots))]
        t = _polish(f, a, b, t, polish)
        y = normalize(a + t * b)
        if abs(evaluate(f, y)) >= RESIDUAL_TOL:
            continue
        if require_regular:
            g = np.conj(gradient(f, y))
            if np.linalg.norm(g - np.vdot(y, g) * y) < 1e-10 * f.scale():
                continue
        return y
    raise SamplingError("could not sample a regular point on the hypersurface")


def _polish(f: WaringPolynomial, a, b, t, steps: int):
    """Newton on ``g / g'`` for ``g(t) = f(a + t b)``, evaluated through the linear forms."""
    la, lb, D = f.coeffs @ a, f.coeffs @ b, f.degree
    for _ in range(steps):
        lin = la + t * lb
        g = np.sum(lin**D)
        dg = D * np.sum(lin ** (D - 1) * lb)
        ddg = D * (D - 1) * np.sum(lin ** (D - 2) * lb**2)
        den = dg * dg - g * ddg
        if g == 0 or den == 0:
            break
        t = t - g * dg / den
    return t


def tangent_frame(f: WaringPolynomial, y) -> Frame:
    """Frame at ``y`` whose tangent block spans ``ker(grad f(y)) ∩ y^perp``."""
    return Frame.from_normal(y, np.conj(gradient(f, y)))


def sample_start_pair(system: WaringSystem, rng: np.random.Generator, retries: int = 5) -> StartPair:
    """Sample ``(u, zeta)`` on the rigid correspondence of ``system``.

    Each equation uses its own child generator, keyed by its index.
    """
    for _ in range(retries + 1):
        frames, zeta = sample_hyperplane_frames(system.n, rng)
        children = rng.spawn(system.n)
        unitaries, residuals = [], []
        for f, target, sub in zip(system, frames, children):
            y = sample_root_on_hypersurface(f, sub)
            u = match_frames(tangent_frame(f, y), target, sub)
            unitaries.append(u)
            residuals.append(abs(evaluate(unitary_action(u, f), zeta)))
        if max(residuals) < RESIDUAL_TOL:
            return StartPair(np.array(unitaries), zeta, tuple(float(r) for r in residuals))
    raise SamplingError("start pair residuals stayed above tolerance")

"""Homogeneous polynomials given as sums of powers of linear forms.

A Waring polynomial of degree ``D`` and length ``r`` in ``n + 1`` variables is

    f(z) = L_1(z)**D + ... + L_r(z)**D,   L_i(z) = sum_j lam[i, j] * z[j]

The pairing ``L_i(z)`` is bilinear (no conjugation). Evaluation costs
``O(r * (n + D))`` operations, which makes these polynomials a black box in
the sense used by the gamma estimator: only point evaluations are needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError

UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WaringPolynomial:
    """``sum_i <lam_i, z>**D`` with ``coeffs[i] = lam_i``."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.ndim != 2:
            raise ArgumentError(f"coeffs must be a 2-d array, got shape {coeffs.shape}")
        r, m = coeffs.shape
        if r < 1 or m < 2:
            raise ArgumentError(f"need r >= 1 and n + 1 >= 2, got shape {coeffs.shape}")
        if int(self.degree) != self.degree or self.degree < 2:
            raise ArgumentError(f"degree must be an integer >= 2, got {self.degree}")
        if not np.all(np.isfinite(coeffs)):
            raise ArgumentError("coeffs contain non-finite entries")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "degree", int(self.degree))

    @property
    def length(self) -> int:
        return self.coeffs.shape[0]

    @property
    def num_vars(self) -> int:
        return self.coeffs.shape[1]

    @property
    def r_effective(self) -> int:
        """Number of rows that are not identically zero."""
        return int(np.count_nonzero(np.any(self.coeffs != 0, axis=1)))

    def scale(self) -> float:
        """``sum_i ||lam_i||**D``, an upper bound for ``|f|`` on the unit sphere."""
        return float(np.sum(np.linalg.norm(self.coeffs, axis=1) ** self.degree))

    def __call__(self, z):
        return evaluate(self, z)

    def to_dict(self) -> dict:
        rows = [[[float(c.real), float(c.imag)] for c in row] for row in self.coeffs]
        return {"D": self.degree, "coeffs": rows}

    @classmethod
    def from_dict(cls, data: dict) -> "WaringPolynomial":
        rows = np.array(data["coeffs"], dtype=float)
        if rows.ndim != 3 or rows.shape[2] != 2:
            raise ArgumentError("coeffs must be a list of rows of [re, im] pairs")
        return cls(int(data["D"]), rows[..., 0] + 1j * rows[..., 1])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "WaringPolynomial":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class WaringSystem:
    """A square system of ``n`` Waring polynomials in ``n + 1`` variables."""

    polys: tuple

    def __post_init__(self):
        polys = tuple(self.polys)
        if not polys:
            raise ArgumentError("empty system")
        m = polys[0].num_vars
        if any(p.num_vars != m for p in polys):
            raise ArgumentError("all polynomials must share the same number of variables")
        if m - 1 != len(polys):
            raise ArgumentError(f"system of {len(polys)} equations in {m} variables is not square")
        object.__setattr__(self, "polys", polys)

    @property
    def n(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple:
        return tuple(p.degree for p in self.polys)

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def evaluate(self, z) -> np.ndarray:
        return np.array([evaluate(p, z) for p in self.polys])

    def jacobian(self, z) -> np.ndarray:
        return np.array([gradient(p, z) for p in self.polys])

    def residual(self, z) -> float:
        """``max_i |f_i(z)| / ||z||**d_i``."""
        z = np.asarray(z, dtype=complex)
        nz = np.linalg.norm(z)
        return float(max(abs(evaluate(p, z)) / nz ** p.degree for p in self.polys))

    def act(self, unitaries) -> "WaringSystem":
        return WaringSystem(tuple(unitary_action(u, p) for u, p in zip(unitaries, self.polys)))

    def to_dict(self) -> dict:
        return {"polys": [p.to_dict() for p in self.polys]}

    @classmethod
    def from_dict(cls, data: dict) -> "WaringSystem":
        return cls(tuple(WaringPolynomial.from_dict(p) for p in data["polys"]))


def _check_dim(f: WaringPolynomial, z: np.ndarray):
    if z.shape[-1] != f.num_vars:
        raise ArgumentError(f"point has {z.shape[-1]} coordinates, polynomial has {f.num_vars} variables")


def evaluate(f: WaringPolynomial, z):
    """Evaluate ``f`` at ``z``; ``z`` may carry leading batch dimensions."""
    z = np.asarray(z, dtype=complex)
    _check_dim(f, z)
    lin = z @ f.coeffs.T
    out = np.sum(lin ** f.degree, axis=-1)
    return out if out.ndim else complex(out)


def gradient(f: WaringPolynomial, z) -> np.ndarray:
    """Holomorphic gradient ``D * sum_i L_i(z)**(D-1) * lam_i``."""
    z = np.asarray(z, dtype=complex)
    _check_dim(f, z)
    lin = z @ f.coeffs.T
    return f.degree * (lin ** (f.degree - 1)) @ f.coeffs


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < tol)


def unitary_action(u, f: WaringPolynomial) -> WaringPolynomial:
    """Return ``f o u^{-1}``, so that ``(u.f)(u z) == f(z)``.

    Each row ``lam_i^T`` becomes ``lam_i^T u^{-1} = lam_i^T u^H``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (f.num_vars, f.num_vars) or not is_unitary(u):
        raise ArgumentError("unitary_action needs a unitary matrix of matching size")
    return WaringPolynomial(f.degree, f.coeffs @ u.conj().T)


def roots_of_unity(count: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(count) / count)


def homogeneous_parts_at(f: WaringPolynomial, zeta, w) -> np.ndarray:
    """Homogeneous parts ``h_1(w), ..., h_D(w)`` of ``h(z) = f(zeta + z)``.

    Only black-box evaluations are used: ``h`` is evaluated at the ``D + 1``
    points ``omega**j * w`` and a length ``D + 1`` DFT separates the degrees,
    since ``h(omega**j w) = sum_k omega**(j k) h_k(w)``. The constant part
    ``h_0 = f(zeta)`` is dropped.

    ``w`` may be a single vector or a stack of shape ``(s, n + 1)``; the result
    has shape ``(D,)`` or ``(s, D)`` accordingly.
    """
    zeta = np.asarray(zeta, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_dim(f, zeta)
    _check_dim(f, w)
    nodes = roots_of_unity(f.degree + 1)
    pts = zeta + nodes[:, None] * w[..., None, :]
    vals = evaluate(f, pts)
    parts = np.fft.fft(vals, axis=-1) / (f.degree + 1)
    return parts[..., 1:]


def random_waring(n: int, degree: int, length: int, rng: np.random.Generator) -> WaringPolynomial:
    """Waring polynomial with i.i.d. standard complex Gaussian coefficients.

    The coefficient matrix has density ``pi**(-(n+1) r) exp(-||L||**2)``.
    """
    shape = (length, n + 1)
    coeffs = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return WaringPolynomial(degree, coeffs)


def random_system(n: int, degree: int, length: int, rng: np.random.Generator) -> WaringSystem:
    return WaringSystem(tuple(random_waring(n, degree, length, rng) for _ in range(n)))


def system_from_coeffs(degrees: Sequence[int], coeffs: Sequence) -> WaringSystem:
    return WaringSystem(tuple(WaringPolynomial(d, c) for d, c in zip(degrees, coeffs)))

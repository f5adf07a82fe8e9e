"""Unitary-group and projective-space primitives.

Points of P^n are stored as unit vectors in C^{n+1}; two representatives are
the same point when ``|<p, q>| > 1 - 1e-10``. Tuples of unitaries and
skew-Hermitian generators are stacked into arrays of shape ``(n, n+1, n+1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ArgumentError, BranchAmbiguityError

BRANCH_TOL = 1e-9
FRAME_TOL = 1e-10


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def hdot(p, v) -> complex:
    """Hermitian inner product, conjugate-linear in the first slot."""
    return complex(np.vdot(p, v))


def project_orth(v, p) -> np.ndarray:
    """Component of ``v`` orthogonal to the unit vector ``p``."""
    v = np.asarray(v, dtype=complex)
    p = np.asarray(p, dtype=complex)
    return v - np.vdot(p, v) * p


def proj_equal(p, q, tol: float = 1e-10) -> bool:
    """Whether ``p`` and ``q`` represent the same projective point."""
    return bool(abs(np.vdot(normalize(p), normalize(q))) > 1 - tol)


def proj_distance(p, q) -> float:
    """``1 - |<p, q>|`` for unit representatives; zero iff same point."""
    return float(max(0.0, 1.0 - abs(np.vdot(normalize(p), normalize(q)))))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of U(dim) (Ginibre matrix, QR, phase fix of R's diagonal)."""
    if dim < 1:
        raise ArgumentError("dim must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_phase(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def unitary_defect(u) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[-1])))


def unitary_eig(u, tol: float = 1e-10):
    """Unitary eigendecomposition ``u = W diag(exp(i theta)) W^H`` with theta in (-pi, pi].

    A complex Schur form is used; for a normal matrix it is diagonal and ``W``
    is unitary even when eigenvalues cluster.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or unitary_defect(u) >= tol:
        raise ArgumentError("expected a unitary matrix")
    t, w = scipy.linalg.schur(u, output="complex")
    theta = np.angle(np.diagonal(t))
    return w, theta


def principal_log(u) -> np.ndarray:
    """Skew-Hermitian ``a`` with ``exp(a) = u`` and spectrum in ``i(-pi, pi)``.

    Raises :class:`BranchAmbiguityError` when an eigenvalue sits within
    ``1e-9`` radians of -1.
    """
    w, theta = unitary_eig(u)
    if np.any(np.abs(theta) > np.pi - BRANCH_TOL):
        raise BranchAmbiguityError("eigenvalue at -1: principal logarithm is ambiguous")
    a = (w * (1j * theta)) @ w.conj().T
    return 0.5 * (a - a.conj().T)


def is_skew_hermitian(a, tol: float = 1e-10) -> bool:
    a = np.asarray(a)
    return bool(np.linalg.norm(a.conj().T + a) < tol)


def speed(generators) -> float:
    """``sqrt(1/2 sum_i ||a_i||_F**2)``."""
    generators = np.asarray(generators)
    return float(np.sqrt(0.5 * np.sum(np.abs(generators) ** 2)))


class RigidPath:
    """The one-parameter subgroup ``t -> exp(t A)`` in ``U(n+1)**n``.

    Each generator is kept in diagonalized form ``a_i = V_i diag(i theta_i) V_i^H``
    so that ``exp(t a_i)`` is unitary to roundoff for every ``t``.
    """

    def __init__(self, generators, eigvecs=None, angles=None):
        generators = np.asarray(generators, dtype=complex)
        if generators.ndim != 3 or generators.shape[1] != generators.shape[2]:
            raise ArgumentError("generators must have shape (n, n+1, n+1)")
        if not all(is_skew_hermitian(a) for a in generators):
            raise ArgumentError("generators must be skew-Hermitian")
        if eigvecs is None:
            eigvecs, angles = [], []
            for a in generators:
                mu, v = np.linalg.eigh(1j * a)
                eigvecs.append(v)
                angles.append(-mu)
        self.generators = generators
        self.eigvecs = np.asarray(eigvecs, dtype=complex)
        self.angles = np.asarray(angles, dtype=float)

    @classmethod
    def from_unitaries(cls, unitaries) -> "RigidPath":
        """Path with ``exp(A) = unitaries`` using principal logarithms."""
        gens, vecs, angs = [], [], []
        for u in unitaries:
            w, theta = unitary_eig(u)
            if np.any(np.abs(theta) > np.pi - BRANCH_TOL):
                raise BranchAmbiguityError("eigenvalue at -1: principal logarithm is ambiguous")
            a = (w * (1j * theta)) @ w.conj().T
            gens.append(0.5 * (a - a.conj().T))
            vecs.append(w)
            angs.append(theta)
        return cls(np.array(gens), vecs, angs)

    @property
    def n(self) -> int:
        return self.generators.shape[0]

    @property
    def speed(self) -> float:
        return speed(self.generators)

    def at(self, t: float) -> np.ndarray:
        phases = np.exp(1j * t * self.angles)
        return np.einsum("nij,nj,nkj->nik", self.eigvecs, phases, self.eigvecs.conj())

    def inverse_at(self, t: float) -> np.ndarray:
        return self.at(-t)


def path_at(generators, t: float) -> np.ndarray:
    """``exp(t a_i)`` for each generator, ``t`` in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"t = {t} outside [0, 1]")
    return RigidPath(generators).at(t)


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal frame ``[point | tangent_basis | normal]`` of C^{n+1}.

    ``tangent_basis`` has shape ``(n+1, n-1)`` (columns). For a hyperplane or
    hypersurface through ``point``, ``point`` together with the tangent basis
    spans the (affine cone over the) projective tangent space.
    """

    point: np.ndarray
    tangent_basis: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        point = np.asarray(self.point, dtype=complex)
        normal = np.asarray(self.normal, dtype=complex)
        m = point.shape[0]
        tangent = np.asarray(self.tangent_basis, dtype=complex).reshape(m, m - 2)
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "tangent_basis", tangent)
        f = self.matrix
        if f.shape != (m, m) or np.linalg.norm(f.conj().T @ f - np.eye(m)) > FRAME_TOL:
            raise ArgumentError("frame vectors are not orthonormal")

    @property
    def matrix(self) -> np.ndarray:
        return np.column_stack([self.point, self.tangent_basis, self.normal])

    @classmethod
    def from_normal(cls, point, normal_direction) -> "Frame":
        """Frame at ``point`` whose normal is ``normal_direction`` projected to ``point^perp``."""
        point = normalize(point)
        normal = normalize(project_orth(normal_direction, point))
        normal = normalize(project_orth(normal, point))
        tangent = scipy.linalg.null_space(np.vstack([point, normal]).conj())
        return cls(point, tangent, normal)


def match_frames(src: Frame, dst: Frame, rng: np.random.Generator | None = None) -> np.ndarray:
    """Uniform ``u`` with ``u src.point ~ dst.point`` and ``u T_src = T_dst``.

    ``u = F_dst blockdiag(theta_0, V, theta_n) F_src^H``, where the free block
    is Haar on ``U(1) x U(n-1) x U(1)``. With ``rng=None`` the free block is the
    identity.
    """
    m = src.point.shape[0]
    if dst.point.shape[0] != m:
        raise ArgumentError("frames live in different dimensions")
    mid = np.eye(m, dtype=complex)
    if rng is not None:
        mid[0, 0] = haar_phase(rng)
        if m > 2:
            mid[1:-1, 1:-1] = haar_unitary(m - 2, rng)
        mid[-1, -1] = haar_phase(rng)
    return dst.matrix @ mid @ src.matrix.conj().T

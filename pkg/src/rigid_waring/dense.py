"""Dense monomial-basis polynomials.

These are slow, exact-in-structure reference objects used as oracles for the
black-box routines: multinomial expansion of Waring forms, Taylor shifts,
linear substitutions and Bombieri-Weyl norms.
"""

from __future__ import annotations

from collections import defaultdict
from math import comb, factorial, prod

import numpy as np

from .errors import ArgumentError, CapacityError
from .waring import WaringPolynomial

MAX_TERMS = 10**6
PRUNE_REL = 1e-14


def compositions(total: int, parts: int):
    """All exponent tuples of length ``parts`` summing to ``total``, in lex order (descending)."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multinomial(exps) -> int:
    out, acc = 1, 0
    for e in exps:
        acc += e
        out *= comb(acc, e)
    return out


class DensePolynomial:
    """Sparse dict of ``{exponent tuple: coefficient}``.

    Need not be homogeneous; :attr:`degree` is the largest total degree
    present. Terms below ``1e-14 * max|c|`` are pruned on construction.
    """

    def __init__(self, num_vars: int, terms=None, prune: bool = True):
        self.num_vars = int(num_vars)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.num_vars or min(exps) < 0:
                raise ArgumentError(f"bad exponent tuple {exps}")
            c = complex(c)
            if c != 0:
                clean[exps] = clean.get(exps, 0) + c
        if prune and clean:
            cutoff = PRUNE_REL * max(abs(c) for c in clean.values())
            clean = {k: v for k, v in clean.items() if abs(v) > cutoff}
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def homogeneous(cls, degree: int, num_vars: int, terms) -> "DensePolynomial":
        p = cls(num_vars, terms)
        if any(sum(e) != degree for e in p.terms):
            raise ArgumentError(f"not homogeneous of degree {degree}")
        return p

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def __repr__(self):
        return f"DensePolynomial({self.num_vars}, {self.terms!r})"

    def __eq__(self, other):
        return isinstance(other, DensePolynomial) and self.num_vars == other.num_vars and self.terms == other.terms

    def allclose(self, other: "DensePolynomial", atol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol for k in keys)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.num_vars:
            raise ArgumentError("dimension mismatch")
        out = np.zeros(z.shape[:-1], dtype=complex)
        for exps, c in self.terms.items():
            out = out + c * np.prod(z ** np.array(exps), axis=-1)
        return out if out.ndim else complex(out)

    def __add__(self, other: "DensePolynomial") -> "DensePolynomial":
        terms = defaultdict(complex, self.terms)
        for k, v in other.terms.items():
            terms[k] += v
        return DensePolynomial(self.num_vars, terms, prune=False)

    def __mul__(self, other):
        if isinstance(other, DensePolynomial):
            terms = defaultdict(complex)
            for ka, va in self.terms.items():
                for kb, vb in other.terms.items():
                    terms[tuple(a + b for a, b in zip(ka, kb))] += va * vb
            return DensePolynomial(self.num_vars, terms, prune=False)
        return DensePolynomial(self.num_vars, {k: v * other for k, v in self.terms.items()}, prune=False)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "DensePolynomial":
        out = DensePolynomial(self.num_vars, {(0,) * self.num_vars: 1.0})
        for _ in range(k):
            out = out * self
        return out

    def part(self, k: int) -> "DensePolynomial":
        """Homogeneous degree-``k`` component."""
        return DensePolynomial(self.num_vars, {e: c for e, c in self.terms.items() if sum(e) == k}, prune=False)

    def derivative(self, j: int) -> "DensePolynomial":
        terms = {}
        for exps, c in self.terms.items():
            if exps[j]:
                e = list(exps)
                e[j] -= 1
                terms[tuple(e)] = c * exps[j]
        return DensePolynomial(self.num_vars, terms, prune=False)

    def gradient(self, z) -> np.ndarray:
        return np.array([self.derivative(j)(z) for j in range(self.num_vars)])


def linear_form(coeffs) -> DensePolynomial:
    coeffs = np.asarray(coeffs, dtype=complex)
    m = len(coeffs)
    return DensePolynomial(m, {tuple(int(i == j) for i in range(m)): c for j, c in enumerate(coeffs)}, prune=False)


def dense_expand(f: WaringPolynomial, max_terms: int = MAX_TERMS) -> DensePolynomial:
    """Multinomial expansion of ``sum_i <lam_i, z>**D``."""
    m, D = f.num_vars, f.degree
    if comb(m - 1 + D, D) > max_terms:
        raise CapacityError(f"dense expansion needs {comb(m - 1 + D, D)} terms (budget {max_terms})")
    terms = {}
    for exps in compositions(D, m):
        mono = np.prod(f.coeffs ** np.array(exps), axis=1)
        terms[exps] = multinomial(exps) * np.sum(mono)
    return DensePolynomial(m, terms)


def bw_norm(p: DensePolynomial) -> float:
    """Bombieri-Weyl norm; each part of degree ``k`` uses weights ``a!/k!``."""
    total = 0.0
    for exps, c in p.terms.items():
        total += abs(c) ** 2 * prod(factorial(e) for e in exps) / factorial(sum(exps))
    return float(np.sqrt(total))


def taylor_shift(p: DensePolynomial, zeta) -> DensePolynomial:
    """Coefficients of ``z -> p(zeta + z)`` by direct binomial expansion."""
    zeta = np.asarray(zeta, dtype=complex)
    terms = defaultdict(complex)
    for exps, c in p.terms.items():
        ranges = [range(a + 1) for a in exps]
        for sub in np.ndindex(*[len(r) for r in ranges]):
            weight = c
            for a, b, zj in zip(exps, sub, zeta):
                weight *= comb(a, b) * zj ** (a - b)
            terms[sub] += weight
    return DensePolynomial(p.num_vars, terms, prune=False)


def substitute_linear(p: DensePolynomial, matrix) -> DensePolynomial:
    """``y -> p(M y)`` for an ``(num_vars, k)`` matrix ``M``."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape[0] != p.num_vars:
        raise ArgumentError("substitution matrix has the wrong number of rows")
    k = matrix.shape[1]
    forms = [DensePolynomial(k, {tuple(int(i == j) for i in range(k)): matrix[row, j] for j in range(k)},
                             prune=False) for row in range(p.num_vars)]
    powers = [dict() for _ in forms]
    out = DensePolynomial(k, {}, prune=False)
    for exps, c in p.terms.items():
        term = DensePolynomial(k, {(0,) * k: c}, prune=False)
        for row, e in enumerate(exps):
            if e:
                if e not in powers[row]:
                    powers[row][e] = forms[row] ** e
                term = term * powers[row][e]
        out = out + term
    return out

"""Compiled inner loop of the path tracker.

Mirrors the numpy reference engine in :mod:`rigid_waring.continuation` step for
step; both consume the same pre-drawn probe arrays so their traces agree to
roundoff. Systems are passed as a zero-padded coefficient array of shape
``(n, r_max, n + 1)``; zero rows contribute nothing to a Waring sum.
"""

import math

import numpy as np
from numba import njit

RUNNING = 0
REACHED_ZERO = 1
SINGULAR = 2

SINGULAR_TOL = 1e-13
DIVERGENCE_FLOOR = 1e-8
DIVERGENCE_COUNT = 5
DIVERGENCE_GROWTH = 2.0


@njit(cache=True)
def _ipow(x, k):
    out = 1.0 + 0.0j
    base = x
    while k > 0:
        if k & 1:
            out *= base
        base *= base
        k >>= 1
    return out


@njit(cache=True)
def _acted_coeffs(coeffs, vecs, angles, t, out):
    """``out[i] = coeffs[i] @ exp(-t a_i)``."""
    n, r, m = coeffs.shape
    uinv = np.empty((m, m), dtype=np.complex128)
    phase = np.empty(m, dtype=np.complex128)
    for i in range(n):
        for j in range(m):
            phase[j] = np.exp(-1j * t * angles[i, j])
        for a in range(m):
            for b in range(m):
                acc = 0j
                for j in range(m):
                    acc += vecs[i, a, j] * phase[j] * np.conj(vecs[i, b, j])
                uinv[a, b] = acc
        for row in range(r):
            for b in range(m):
                acc = 0j
                for a in range(m):
                    acc += coeffs[i, row, a] * uinv[a, b]
                out[i, row, b] = acc


@njit(cache=True)
def _evaluate(c, degree, p):
    r, m = c.shape
    total = 0j
    for row in range(r):
        lin = 0j
        for j in range(m):
            lin += c[row, j] * p[j]
        total += _ipow(lin, degree)
    return total


@njit(cache=True)
def _gradient(c, degree, p, out):
    r, m = c.shape
    for j in range(m):
        out[j] = 0j
    for row in range(r):
        lin = 0j
        for j in range(m):
            lin += c[row, j] * p[j]
        w = degree * _ipow(lin, degree - 1)
        for j in range(m):
            out[j] += w * c[row, j]


@njit(cache=True)
def _residual(ct, degrees, z):
    best = 0.0
    for i in range(ct.shape[0]):
        v = abs(_evaluate(ct[i], degrees[i], z))
        if v > best:
            best = v
    return best


@njit(cache=True)
def _log_binom(a, b):
    return math.lgamma(a + 1.0) - math.lgamma(b + 1.0) - math.lgamma(a - b + 1.0)


@njit(cache=True)
def _gamma_estimate(c, degree, z, normals, uniforms, s, n):
    """Randomized Frobenius-gamma estimate; returns -1.0 on a vanishing gradient."""
    m = z.shape[0]
    grad = np.empty(m, dtype=np.complex128)
    _gradient(c, degree, z, grad)
    g2 = 0.0
    for j in range(m):
        g2 += grad[j].real ** 2 + grad[j].imag ** 2
    if g2 <= 0.0:
        return -1.0
    nodes = degree + 1
    omega = np.empty(nodes, dtype=np.complex128)
    for j in range(nodes):
        omega[j] = np.exp(2j * np.pi * j / nodes)
    sums = np.zeros(degree + 1)
    vals = np.empty(nodes, dtype=np.complex128)
    w = np.empty(m, dtype=np.complex128)
    p = np.empty(m, dtype=np.complex128)
    for q in range(s):
        nrm = 0.0
        for j in range(m):
            nrm += normals[q, j].real ** 2 + normals[q, j].imag ** 2
        radius = uniforms[q] ** (1.0 / (2 * m)) / math.sqrt(nrm)
        for j in range(m):
            w[j] = normals[q, j] * radius
        for jn in range(nodes):
            for j in range(m):
                p[j] = z[j] + omega[jn] * w[j]
            vals[jn] = _evaluate(c, degree, p)
        for k in range(2, degree + 1):
            acc = 0j
            for jn in range(nodes):
                acc += vals[jn] * np.conj(omega[(jn * k) % nodes])
            acc /= nodes
            sums[k] += acc.real ** 2 + acc.imag ** 2
    best = 0.0
    for k in range(2, degree + 1):
        if sums[k] <= 0.0:
            continue
        logval = (k * math.log(32.0 * n * k) - math.log(s) - math.log(g2)
                  + _log_binom(n + k + 1, k) + math.log(sums[k]))
        val = math.exp(logval / (2 * k - 2))
        if val > best:
            best = val
    return best


@njit(cache=True)
def _kappa(ct, degrees, z):
    """``1/sigma_min`` of the unit Hermitian normals; -1.0 if a normal vanishes."""
    n, r, m = ct.shape
    rows = np.empty((n, m), dtype=np.complex128)
    grad = np.empty(m, dtype=np.complex128)
    for i in range(n):
        _gradient(ct[i], degrees[i], z, grad)
        proj = 0j
        for j in range(m):
            proj += z[j] * grad[j]
        nrm = 0.0
        for j in range(m):
            rows[i, j] = np.conj(grad[j]) - proj.conjugate() * z[j]
            nrm += rows[i, j].real ** 2 + rows[i, j].imag ** 2
        nrm = math.sqrt(nrm)
        if nrm <= SINGULAR_TOL:
            return -1.0
        for j in range(m):
            rows[i, j] /= nrm
    if n == 1:
        return 1.0
    sigma = np.linalg.svd(rows)[1]
    if sigma[n - 1] <= 0.0:
        return -1.0
    return 1.0 / sigma[n - 1]


@njit(cache=True)
def _newton(ct, degrees, z, steps):
    """Projective Newton steps; returns (z, ok)."""
    n, r, m = ct.shape
    mat = np.empty((m, m), dtype=np.complex128)
    rhs = np.empty(m, dtype=np.complex128)
    jp = np.empty((n, m), dtype=np.complex128)
    grad = np.empty(m, dtype=np.complex128)
    for _ in range(steps):
        for i in range(n):
            _gradient(ct[i], degrees[i], z, grad)
            jz = 0j
            for j in range(m):
                mat[i, j] = grad[j]
                jz += grad[j] * z[j]
            for j in range(m):
                jp[i, j] = grad[j] - jz * np.conj(z[j])
            rhs[i] = _evaluate(ct[i], degrees[i], z)
        for j in range(m):
            mat[n, j] = np.conj(z[j])
        rhs[n] = 0j
        sigma = np.linalg.svd(jp)[1]
        if sigma[n - 1] <= SINGULAR_TOL:
            return z, False
        delta = np.linalg.solve(mat, rhs)
        nrm = 0.0
        for j in range(m):
            z[j] = z[j] - delta[j]
            nrm += z[j].real ** 2 + z[j].imag ** 2
        nrm = math.sqrt(nrm)
        for j in range(m):
            z[j] /= nrm
    return z, True


@njit(cache=True)
def track_chunk(coeffs, degrees, vecs, angles, z, t, normals, uniforms, s_counts, steps_allowed,
                newton_steps, heuristic, h_step, step0, grow_count, prev_res,
                out_t, out_dt, out_kappa, out_split, out_gmean, out_res, out_res_before, out_z):
    """Run up to ``steps_allowed`` continuation steps.

    Returns ``(steps_done, status, t, grow_count, prev_res)``; ``z`` is updated
    in place. The last two carry the heuristic divergence monitor across chunks.
    """
    n, r, m = coeffs.shape
    ct = np.empty_like(coeffs)
    status = RUNNING
    done = 0
    for step in range(steps_allowed):
        if heuristic:
            dt = h_step
            kap = np.nan
            split = np.nan
            gmean = np.nan
            t_new = max(1.0 - (step0 + step + 1) * h_step, 0.0)
        else:
            _acted_coeffs(coeffs, vecs, angles, t, ct)
            kap = _kappa(ct, degrees, z)
            if kap < 0.0:
                status = SINGULAR
                break
            total = 0.0
            gsum = 0.0
            singular = False
            for i in range(n):
                g = _gamma_estimate(ct[i], degrees[i], z, normals[step, i], uniforms[step, i],
                                    s_counts[i], m - 1)
                if g < 0.0:
                    singular = True
                    break
                total += g * g
                gsum += g
            if singular:
                status = SINGULAR
                break
            split = kap * math.sqrt(total)
            gmean = gsum / n
            dt = 1.0 / (240.0 * kap * split)
            t_new = max(t - dt, 0.0)
        _acted_coeffs(coeffs, vecs, angles, t_new, ct)
        res_before = _residual(ct, degrees, z)
        z, ok = _newton(ct, degrees, z, newton_steps)
        if not ok:
            status = SINGULAR
            break
        res = _residual(ct, degrees, z)
        out_t[step] = t_new
        out_dt[step] = dt
        out_kappa[step] = kap
        out_split[step] = split
        out_gmean[step] = gmean
        out_res[step] = res
        out_res_before[step] = res_before
        for j in range(m):
            out_z[step, j] = z[j]
        done = step + 1
        t = t_new
        if heuristic:
            if res > DIVERGENCE_GROWTH * prev_res and res > DIVERGENCE_FLOOR:
                grow_count += 1
            else:
                grow_count = 0
            prev_res = res
            if grow_count >= DIVERGENCE_COUNT:
                status = SINGULAR
                break
        if t <= 0.0:
            status = REACHED_ZERO
            break
    return done, status, t, grow_count, prev_res

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigid_waring.conditioning import (estimate_terms, gamma_estimate, gamma_frob_exact, kappa, kappa_from_normals,
                                       sample_count, sample_unit_ball, split_gamma)
from rigid_waring.dense import DensePolynomial, dense_expand
from rigid_waring.errors import ArgumentError, SingularPointError
from rigid_waring.geometry import haar_unitary, normalize
from rigid_waring.sampling import sample_root_on_hypersurface, sample_start_pair
from rigid_waring.waring import (WaringPolynomial, WaringSystem, random_system, random_waring, system_from_coeffs,
                                 unitary_action)

seeds = st.integers(0, 2**32 - 1)


def _system_with_normals(c1, c2):
    """Quadrics vanishing at e0 whose Hermitian normals there are conj(c1), conj(c2)."""
    rows = [[[1, *c], [1j, 0, 0]] for c in (c1, c2)]
    return system_from_coeffs([2, 2], rows)


def test_sample_count():
    assert sample_count(2, 0.25) == 4
    assert sample_count(3, 1e-8) == int(np.ceil(1 + np.log2(3e8)))
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(ArgumentError):
            sample_count(2, eps)


def test_unit_ball_samples(rng):
    w = sample_unit_ball(5000, 3, rng)
    norms = np.linalg.norm(w, axis=1)
    assert np.all(norms <= 1)
    # radius^(2m) is uniform on [0, 1] for the uniform measure on the ball of real dimension 2m
    assert abs(np.mean(norms**6) - 0.5) < 0.02


def test_kappa_single_equation_is_one(rng):
    f = random_waring(1, 3, 4, rng)
    s = WaringSystem((f,))
    z = sample_root_on_hypersurface(f, rng)
    assert kappa(s, z) == 1.0
    assert kappa(s, rng.standard_normal(2) + 0j) == 1.0


def test_kappa_orthogonal_normals():
    s = _system_with_normals([1, 0], [0, 1])
    assert kappa(s, [1, 0, 0]) == pytest.approx(1.0, abs=1e-15)


def test_kappa_correlated_normals():
    s = _system_with_normals([1, 0], [0.6, 0.8])
    assert kappa(s, [1, 0, 0]) == pytest.approx(1 / np.sqrt(1 - 0.6), rel=1e-12)
    # direct SVD of the stacked unit normals
    direct = 1 / np.linalg.svd(np.array([[1, 0], [0.6, 0.8]]), compute_uv=False)[-1]
    assert kappa(s, [1, 0, 0]) == pytest.approx(direct, rel=1e-12)


def test_kappa_singular():
    s = _system_with_normals([0, 0], [0, 1])
    with pytest.raises(SingularPointError):
        kappa(s, [1, 0, 0])
    with pytest.raises(SingularPointError):
        kappa_from_normals([[1, 0], [1, 0]])


@given(seed=seeds)
def test_kappa_at_least_one_and_scale_invariant(seed):
    rng = np.random.default_rng(seed)
    s = random_system(2, 3, 4, rng)
    z = normalize(rng.standard_normal(3) + 1j * rng.standard_normal(3))
    k = kappa(s, z)
    assert k >= 1.0 - 1e-12
    c = 3.0 * np.exp(0.7j)
    scaled = WaringSystem((WaringPolynomial(3, s[0].coeffs * c ** (1 / 3)), s[1]))
    assert kappa(scaled, z) == pytest.approx(k, rel=1e-10)


def test_gamma_exact_conic(conic):
    assert abs(gamma_frob_exact(dense_expand(conic), [1, 1, 0]) - 0.5) < 1e-12
    assert gamma_frob_exact(dense_expand(conic), [1, 1, 0], restricted=False) == pytest.approx(np.sqrt(3) / 2)


def test_gamma_exact_bilinear_form():
    p = DensePolynomial(2, {(1, 1): 1})
    # tangent-space version: z^perp is spanned by e1 and z0 z1 vanishes there
    assert gamma_frob_exact(p, [1, 0]) == pytest.approx(0.0, abs=1e-15)
    assert gamma_frob_exact(p, [1, 0], restricted=False) == pytest.approx(1 / np.sqrt(2), rel=1e-14)


def test_gamma_exact_singular():
    with pytest.raises(SingularPointError):
        gamma_frob_exact(DensePolynomial(2, {(2, 0): 1}), [0, 1])


@given(seed=seeds, restricted=st.booleans())
def test_gamma_exact_scale_invariance(seed, restricted):
    rng = np.random.default_rng(seed)
    f = random_waring(2, 3, 4, rng)
    zeta = sample_root_on_hypersurface(f, rng)
    c = complex(rng.standard_normal(), rng.standard_normal())
    a = gamma_frob_exact(dense_expand(f), zeta, restricted)
    b = gamma_frob_exact(c * dense_expand(f), zeta, restricted)
    assert b == pytest.approx(a, rel=1e-12)


@given(seed=seeds, restricted=st.booleans())
def test_gamma_exact_unitary_invariance(seed, restricted):
    rng = np.random.default_rng(seed)
    f = random_waring(2, 3, 4, rng)
    zeta = sample_root_on_hypersurface(f, rng)
    u = haar_unitary(3, rng)
    a = gamma_frob_exact(dense_expand(f), zeta, restricted)
    b = gamma_frob_exact(dense_expand(unitary_action(u, f)), u @ zeta, restricted)
    assert b == pytest.approx(a, rel=1e-8)


def test_restricted_never_exceeds_unrestricted(rng):
    for _ in range(20):
        f = random_waring(2, 4, 5, rng)
        zeta = sample_root_on_hypersurface(f, rng)
        p = dense_expand(f)
        assert gamma_frob_exact(p, zeta) <= gamma_frob_exact(p, zeta, restricted=False) * (1 + 1e-12)


def test_estimate_worked_example(conic, conic_probes):
    terms = estimate_terms(conic, [1, 1, 0], conic_probes)
    assert terms.sample_count == 4
    assert terms.grad_norm_sq == 8.0
    value = gamma_estimate(conic, [1, 1, 0], 0.25, w=conic_probes)
    assert value == pytest.approx(95.4, rel=0.01)


def test_estimate_probe_count_checked(conic, conic_probes):
    with pytest.raises(ArgumentError):
        gamma_estimate(conic, [1, 1, 0], 0.25, w=conic_probes[:3])
    with pytest.raises(ArgumentError):
        gamma_estimate(conic, [1, 1, 0], 0.25)


def test_estimate_zero_gradient(rng):
    f = WaringPolynomial(3, [[1, 0, 0]])
    with pytest.raises(SingularPointError):
        gamma_estimate(f, [0, 1, 0], 0.25, rng)


def test_estimate_quadric_single_term(rng):
    f = random_waring(2, 2, 3, rng)
    zeta = sample_root_on_hypersurface(f, rng)
    terms = estimate_terms(f, zeta, sample_unit_ball(4, 3, rng))
    assert terms.part_sums.shape == (1,)


def test_estimate_deterministic(rng):
    f = random_waring(2, 3, 4, rng)
    zeta = sample_root_on_hypersurface(f, rng)
    a = gamma_estimate(f, zeta, 0.1, np.random.default_rng(5))
    b = gamma_estimate(f, zeta, 0.1, np.random.default_rng(5))
    assert a == b


def test_split_gamma_single_equation(rng):
    f = random_waring(1, 3, 4, rng)
    z = sample_root_on_hypersurface(f, rng)
    rep = split_gamma(WaringSystem((f,)), z, 0.01, np.random.default_rng(1))
    assert rep.kappa == 1.0
    assert rep.split_gamma == rep.per_poly[0]
    assert rep.sample_counts == (sample_count(3, 0.01),)


def test_split_gamma_formula_and_homogeneity(rng):
    s = random_system(2, 3, 4, rng)
    pair = sample_start_pair(s, rng)
    h = s.act(pair.unitaries)
    probes = [sample_unit_ball(sample_count(3, 1e-3), 3, rng) for _ in range(2)]
    rep = split_gamma(h, pair.zeta, 1e-3, probes=probes)
    assert rep.split_gamma == pytest.approx(rep.kappa * np.sqrt(np.sum(np.square(rep.per_poly))), rel=1e-12)
    # for quadrics g_i scales with the squared probe radius, so sqrt(2) probes double every g_i
    q = random_system(2, 2, 3, rng)
    qp = sample_start_pair(q, rng)
    hq = q.act(qp.unitaries)
    w = [sample_unit_ball(sample_count(2, 1e-3), 3, rng) for _ in range(2)]
    base = split_gamma(hq, qp.zeta, 1e-3, probes=w)
    doubled = split_gamma(hq, qp.zeta, 1e-3, probes=[np.sqrt(2) * x for x in w])
    assert doubled.split_gamma == pytest.approx(2 * base.split_gamma, rel=1e-12)


def test_split_gamma_magnitudes_small_systems():
    gammas, kappas = [], []
    for seed in range(30):
        rng = np.random.default_rng(seed)
        s = random_system(2, 3, 4, rng)
        pair = sample_start_pair(s, rng)
        rep = split_gamma(s.act(pair.unitaries), pair.zeta, 1e-8 / 2e7, rng)
        gammas.extend(rep.per_poly)
        kappas.append(rep.kappa)
    # same order of magnitude as the published averages (about 460 and 2.4)
    assert 46 < np.mean(gammas) < 4600
    assert 1.0 <= np.median(kappas) < 24

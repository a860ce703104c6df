import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkzkit.scattering import (
    YBE_KINDS, CouplingParams, PoleError, _product, derive_smatrix_from_matching,
    f_from_g, f_of_x, g_of_t, matching_system, phase_of_x, proportionality,
    r_matrix, r_matrix_normalized, s_matrix_lr, s_matrix_lr_inverse,
    s_matrix_same, scalar_ratio, verify_ybe,
)
from qkzkit.spin import permutation_op, sigma_dot_sigma

I4 = np.eye(4)
P4 = permutation_op().mat
P0 = CouplingParams(1.0, 0.0)


def naive_g(alpha, beta, t, branch=1):
    u = 2 * alpha * t + beta
    return (2 / 3) * (-2 * u + branch * cmath.sqrt(4 * u * u + 3))


def test_g_examples():
    assert abs(g_of_t(P0, 0) - 2 / math.sqrt(3)) < 1e-15
    assert abs(g_of_t(P0, 1) - (2 / 3) * (-4 + math.sqrt(19))) < 1e-15
    assert abs(g_of_t(P0, 1) - 0.23926596) < 1e-8
    assert abs(g_of_t(CouplingParams(1, 0, branch=-1), 0) + 2 / math.sqrt(3)) < 1e-15


def test_g_matches_naive_formula_where_well_conditioned():
    rng = np.random.default_rng(0)
    for t in rng.uniform(-0.3, 0.3, 50):
        for br in (1, -1):
            p = CouplingParams(1.3, 0.2, branch=br)
            assert abs(g_of_t(p, t) - naive_g(1.3, 0.2, t, br)) < 1e-13


def test_f_examples():
    assert abs(f_of_x(P0, 0)) < 1e-15
    assert abs(f_of_x(P0, 2) - 2) < 1e-12
    assert abs(f_of_x(CouplingParams(2, 1), 3) - 7) < 1e-12
    with pytest.raises(ZeroDivisionError):
        f_from_g(0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-50, 50), st.sampled_from([(1, 0), (2, 1), (0.5, -0.3), (100, 100)]),
       st.sampled_from([1, -1]))
def test_integrability_constraint(x, ab, branch):
    p = CouplingParams(*ab, branch=branch)
    target = p.alpha * x + p.beta
    assert abs(f_of_x(p, x) - target) < 1e-12 * (1 + abs(target))


def test_phase_examples():
    assert abs(phase_of_x(P0, 0) - cmath.exp(-1j * math.pi / 3)) < 1e-15
    rng = np.random.default_rng(1)
    for x in rng.uniform(-10, 10, 100):
        assert abs(abs(phase_of_x(CouplingParams(1.0, 0.3), x)) - 1) < 1e-13
    assert abs(abs(phase_of_x(CouplingParams(1 + 0.5j, 0), 1)) - 1) > 1e-3


def test_s_lr_at_coincidence():
    s = s_matrix_lr(P0, 0.4, 0.4).mat
    assert np.abs(s - cmath.exp(-1j * math.pi / 3) * P4).max() < 1e-15


def _off_block(m):
    mask = np.ones((4, 4), bool)
    mask[0, 0] = mask[3, 3] = False
    mask[1:3, 1:3] = False
    return np.abs(m[mask]).max()


def test_spin_conservation():
    rng = np.random.default_rng(2)
    p = CouplingParams(1.7, -0.4)
    for _ in range(20):
        a, b = rng.uniform(-5, 5, 2)
        for m in (s_matrix_lr(p, a, b).mat, s_matrix_same(p, a, b).mat,
                  r_matrix(p, a).mat):
            assert _off_block(m) < 1e-15


def test_lr_inverse():
    rng = np.random.default_rng(3)
    p = CouplingParams(0.8, 0.6)
    for a, b in rng.uniform(-5, 5, (20, 2)):
        prod = s_matrix_lr(p, a, b).mat @ s_matrix_lr_inverse(p, a, b).mat
        assert np.abs(prod - I4).max() < 1e-13


def test_s_same_examples():
    p = CouplingParams(1.0, 0.3)
    assert np.array_equal(s_matrix_same(p, 0.7, 0.7).mat, P4.astype(complex))
    rng = np.random.default_rng(4)
    for u, v in rng.uniform(-5, 5, (50, 2)):
        prod = s_matrix_same(p, u, v).mat @ s_matrix_same(p, v, u).mat
        assert np.abs(prod - I4).max() < 1e-13
    m = s_matrix_same(p, 0.0, 1.0).mat
    assert np.abs(m - (1j * I4 + P4) / (1j + 1)).max() < 1e-15
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert np.abs(m @ singlet - 1j * singlet).max() < 1e-15
    with pytest.raises(PoleError):
        s_matrix_same(p, 0.0, 1j)


def test_r_matrix_examples():
    p = CouplingParams(2.5, 0.1)
    assert np.abs(r_matrix(p, 0).mat - P4 / 2.5).max() < 1e-15
    rng = np.random.default_rng(5)
    for lam in rng.uniform(-5, 5, 20):
        r1 = r_matrix(P0, lam).mat @ r_matrix(P0, -lam).mat
        assert np.abs(r1 - I4).max() < 1e-13
        r2 = r_matrix(p, lam).mat @ r_matrix(p, -lam).mat
        scale = (lam ** 2 + p.alpha ** -2) / (lam ** 2 + 1)
        assert np.abs(r2 - scale * I4).max() < 1e-12
    with pytest.raises(PoleError):
        r_matrix(p, 1j)


def test_scalar_ratio_closed_form():
    assert abs(scalar_ratio(P0, 0.7) - phase_of_x(P0, 0.7)) < 1e-12
    rng = np.random.default_rng(6)
    for _ in range(30):
        a, b = rng.uniform(0.2, 3), rng.uniform(-2, 2)
        p = CouplingParams(a, b)
        x = rng.uniform(-4, 4)
        lam = x + b / a
        expected = phase_of_x(p, x) * (1j * lam + 1) / (1j * lam + 1 / a)
        assert abs(scalar_ratio(p, x) - expected) < 1e-12 * abs(expected)
        c, spread = proportionality(s_matrix_lr(p, 0, x).mat, r_matrix(p, lam).mat)
        assert spread < 1e-11


def test_scalar_ratio_where_f_vanishes():
    p = CouplingParams(2.0, 1.0)
    x = -0.5  # alpha x + beta = 0
    c = scalar_ratio(p, x)
    s = s_matrix_lr(p, 0.0, x).mat
    assert np.abs(s - phase_of_x(p, x) * P4).max() < 1e-12
    assert np.abs(s - c * r_matrix(p, x + 0.5).mat).max() < 1e-12


def test_normalized_r_bridges():
    p = CouplingParams(1.9, 0.7)
    rng = np.random.default_rng(7)
    for z, zb in rng.uniform(-3, 3, (20, 2)):
        s = s_matrix_lr(p, z, zb).mat
        rn = r_matrix_normalized(p, zb - z + p.beta / p.alpha).mat
        assert np.abs(s - phase_of_x(p, zb - z) * rn).max() < 1e-12
        assert np.abs(s_matrix_same(p, z, zb).mat - r_matrix_normalized(p, zb - z).mat).max() < 1e-13


@pytest.mark.parametrize("kind", YBE_KINDS)
def test_ybe_random(kind):
    p = CouplingParams(1.0, 0.3)
    rng = np.random.default_rng(8)
    for c in rng.uniform(-5, 5, (100, 3)):
        assert verify_ybe(kind, p, c) < 1e-11


def test_ybe_degenerate_coincidence():
    p = CouplingParams(1.0, 0.3)
    assert verify_ybe("LRR'", p, (0.2, 1.1, 1.1)) < 1e-12


@pytest.mark.parametrize("kind", ["LRR'", "RRL'"])
def test_ybe_quadratic_control(kind):
    p = CouplingParams(1.0, 0.3).broken()
    rng = np.random.default_rng(9)
    bad = sum(verify_ybe(kind, p, c) > 1e-3 for c in rng.uniform(-5, 5, (100, 3)))
    assert bad >= 95


def test_same_chirality_argument_order_is_forced():
    # with S'(z_j, z_i) in place of S'(z_i, z_j) the RRL' relation breaks
    p = CouplingParams(1.0, 0.3)
    zi, zj, zbk = 0.3, -1.2, 2.1
    x = (s_matrix_lr(p, zj, zbk).mat, 2, 3)
    y = (s_matrix_lr(p, zi, zbk).mat, 1, 3)
    z_bad = (s_matrix_same(p, zj, zi).mat, 1, 2)
    assert np.abs(_product([x, y, z_bad]) - _product([z_bad, y, x])).max() > 1e-3
    assert verify_ybe("RRL'", p, (zi, zj, zbk)) < 1e-12


def test_matching_system_structure():
    c21, c12 = matching_system(0.4)
    ss = sigma_dot_sigma().mat
    assert np.abs(c21 - (-2j * I4 + 0.4 * ss)).max() < 1e-15
    assert np.abs(c12 - (2j * I4 + 0.4 * ss)).max() < 1e-15


def test_matching_examples():
    s, dev = derive_smatrix_from_matching(P0, 0.0)
    assert np.abs(s.mat - cmath.exp(-1j * math.pi / 3) * P4).max() < 1e-11
    assert dev < 1e-11
    rng = np.random.default_rng(10)
    for t in rng.uniform(-3, 3, 20):
        assert derive_smatrix_from_matching(CouplingParams(1.0, 0.3), t)[1] < 1e-11


def test_weak_coupling_limit():
    # g is small on the branch whose sign matches that of t
    for t, br in ((1e4, 1), (-1e4, -1)):
        s, _ = derive_smatrix_from_matching(CouplingParams(100.0, 100.0, branch=br), t)
        assert np.abs(s.mat - I4).max() < 1e-6

import numpy as np
import pytest

from qkzkit.scattering import (
    CouplingParams, constant_s_matrix, s_matrix_lr, s_matrix_same,
)
from qkzkit.spin import apply_pair, spin_flip, total_sz
from qkzkit.transport import (
    build_Z, build_Z_constant, constant_provider, energy_constant,
    mutual_commutators, pbc_residual, plane_wave, simultaneous_eigensystem,
    transport_consistency,
)
from qkzkit.wavefunction import ParticleConfig

P = CouplingParams(1.0, 0.3, length_L=2.5)


def written_product(factors, n):
    """Dense product of (mat, a, b) factors written left to right."""
    out = np.eye(2 ** n, dtype=complex)
    for mat, a, b in reversed(factors):
        out = apply_pair(mat, a, b, n, out)
    return out


def printed_Z(p, cfg, c, j):
    """Right-mover transport string with the default reference ordering:
    S'(z_j, z_m + L) for m = j+1..N, then S(z_j, zbar_l) for the left movers
    l = 1..N_L, then S'(z_j, z_m) for m = N_L+1..j-1."""
    n, nl, L = cfg.n_total, cfg.n_left, p.length_L
    facs = [(s_matrix_same(p, c[j - 1], c[m - 1] + L).mat, j, m) for m in range(j + 1, n + 1)]
    facs += [(s_matrix_lr(p, c[j - 1], c[l - 1]).mat, j, l) for l in range(1, nl + 1)]
    facs += [(s_matrix_same(p, c[j - 1], c[m - 1]).mat, j, m) for m in range(nl + 1, j)]
    return written_product(facs, n)


def test_two_particle_single_factor():
    cfg = ParticleConfig.standard(2, 1, P)
    c = np.array([0.9, 0.2])
    z = build_Z(cfg, c, 2)
    assert z.factor_count == 1
    ref = written_product([(s_matrix_lr(P, c[1], c[0]).mat, 2, 1)], 2)
    assert np.abs(z.dense() - ref).max() < 1e-15


def test_three_particle_formula():
    cfg = ParticleConfig.from_pattern("RLL", P, reference=(1, 2, 3))
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = rng.uniform(-2, 2, 3)
        ref = written_product([(s_matrix_lr(P, c[0], c[2]).mat, 1, 3),
                               (s_matrix_lr(P, c[0], c[1]).mat, 1, 2)], 3)
        assert np.abs(build_Z(cfg, c, 1).dense() - ref).max() < 1e-13


@pytest.mark.parametrize("n,nl", [(3, 1), (4, 2), (5, 2), (5, 0)])
def test_right_movers_match_printed_string(n, nl):
    cfg = ParticleConfig.standard(n, nl, P)
    rng = np.random.default_rng(n + nl)
    c = rng.uniform(-3, 3, n)
    for j in cfg.right_movers():
        z = build_Z(cfg, c, j)
        assert z.factor_count == n - 1
        assert np.abs(z.dense() - printed_Z(P, cfg, c, j)).max() < 1e-13


def test_left_movers_follow_substitution():
    # with only left movers the string is the right-mover one with z -> zbar
    rng = np.random.default_rng(1)
    c = rng.uniform(-3, 3, 4)
    left = ParticleConfig.standard(4, 4, P)
    right = ParticleConfig.standard(4, 0, P)
    for j in range(1, 5):
        assert np.abs(build_Z(left, c, j).dense() - build_Z(right, c, j).dense()).max() < 1e-14


def test_symmetries():
    cfg = ParticleConfig.standard(4, 2, P)
    rng = np.random.default_rng(2)
    sz = np.diag(total_sz(4))
    flip = spin_flip(4)
    for _ in range(5):
        c = rng.uniform(-3, 3, 4)
        for j in range(1, 5):
            z = build_Z(cfg, c, j).dense()
            assert np.abs(z @ sz - sz @ z).max() < 1e-13
            assert np.abs(z @ flip - flip @ z).max() < 1e-13


def test_consistency_three_particles():
    cfg = ParticleConfig.from_pattern("RLL", P)
    rng = np.random.default_rng(3)
    for _ in range(10):
        c = rng.uniform(-3, 3, 3)
        for j, k in [(1, 2), (1, 3), (2, 3)]:
            assert transport_consistency(cfg, c, j, k) < 1e-10


def test_consistency_four_particles():
    cfg = ParticleConfig.from_pattern("RRLL", P)
    rng = np.random.default_rng(4)
    for _ in range(20):
        c = rng.uniform(-3, 3, 4)
        worst = max(transport_consistency(cfg, c, j, k)
                    for j in range(1, 5) for k in range(j + 1, 5))
        assert worst < 1e-10


def test_consistency_negative_control():
    cfg = ParticleConfig.from_pattern("RRLL", P.broken())
    rng = np.random.default_rng(5)
    c = rng.uniform(-3, 3, 4)
    worst = max(transport_consistency(cfg, c, j, k)
                for j in range(1, 5) for k in range(j + 1, 5))
    assert worst > 1e-3
    with pytest.raises(ValueError):
        transport_consistency(cfg, c, 2, 2)


def test_pbc_single_particle():
    cfg = ParticleConfig.from_pattern("R", P)
    vec = np.array([0.6, 0.8j])
    f = lambda c: np.exp(2j * np.pi * c[0] / P.length_L) * vec
    assert build_Z(cfg, [0.3], 1).factor_count == 0
    assert pbc_residual(cfg, [0.3], f, 1) < 1e-12


@pytest.mark.parametrize("g", [0.3, 0.7, 1.5])
def test_constant_commutators(g):
    for n in (3, 4, 5):
        cfg = ParticleConfig.standard(n, 2, P)
        zs = [build_Z_constant(cfg, g, j).dense() for j in range(1, n + 1)]
        assert all(build_Z_constant(cfg, g, j).factor_count == n - 1 for j in range(1, n + 1))
        assert mutual_commutators(zs) < 1e-12


def test_constant_free_limit_is_cyclic_shift():
    cfg = ParticleConfig.standard(4, 0, P)
    for j in range(1, 5):
        z = build_Z_constant(cfg, 0.0, j).dense()
        assert np.abs(np.linalg.matrix_power(z, 4) - np.eye(16)).max() < 1e-14
        lam = np.linalg.eigvals(z)
        assert np.abs(lam ** 4 - 1).max() < 1e-12


def test_constant_matrix_is_built_from_S_and_P():
    cfg = ParticleConfig.standard(2, 1, P)
    g = 0.7
    z = build_Z_constant(cfg, g, 2).dense()
    ref = written_product([(constant_s_matrix(g).mat, 2, 1)], 2)
    assert np.abs(z - ref).max() < 1e-15


def test_two_particle_eigenproblem():
    cfg = ParticleConfig.standard(2, 1, P)
    g = 0.7
    zs = [build_Z_constant(cfg, g, j).dense() for j in (1, 2)]
    vecs, vals = simultaneous_eigensystem(zs)
    assert np.abs(np.abs(vals) - 1).max() < 1e-12
    for z, lam in zip(zs, vals):
        for k in range(4):
            assert np.abs(z @ vecs[:, k] - lam[k] * vecs[:, k]).max() < 1e-12
    # plane waves built from the common eigenvectors solve the boundary condition
    prov = constant_provider(cfg, g)
    momenta = -np.angle(vals) / P.length_L
    rng = np.random.default_rng(6)
    for k in range(4):
        f = plane_wave(momenta[:, k], vecs[:, k])
        for j in (1, 2):
            assert pbc_residual(cfg, rng.uniform(0, 2, 2), f, j, prov) < 1e-10


def test_simultaneous_diagonalization_four_particles():
    cfg = ParticleConfig.standard(4, 2, P)
    zs = [build_Z_constant(cfg, 0.7, j).dense() for j in range(1, 5)]
    vecs, vals = simultaneous_eigensystem(zs, seed=3)
    assert np.abs(vecs.conj().T @ vecs - np.eye(16)).max() < 1e-9
    for z, lam in zip(zs, vals):
        assert np.abs(z @ vecs - vecs * lam).max() < 1e-9


def test_energy_examples():
    rl = ParticleConfig.from_pattern("RL", P)
    assert energy_constant([1, 2], rl) == -1
    assert energy_constant([0, 0], rl) == 0
    assert energy_constant([3, 1, 1], ParticleConfig.from_pattern("RLL", P)) == 1
    with pytest.raises(ValueError):
        energy_constant([1], rl)

"""Transport operators for periodic boundary conditions.

Periodicity in x_j identifies the amplitude with particle j at the far left
of the reference ordering with the amplitude where it sits at the far right,
its light-cone coordinate advanced by L.  Writing M_right(c) for the exchange
string that walks j from its reference slot to the right end and M_left(c)
for the one that walks it to the left end gives

    f(c - L e_j) = Z_j(c) f(c),   Z_j(c) = M_left(c - L e_j)^-1 M_right(c),

with N - 1 two-body factors in total.  Left movers need no separate
treatment: the same walk is taken in z-bar.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .scattering import constant_s_matrix
from .spin import (
    PairOperator,
    SpinVector,
    apply_pair,
    commutator_norm,
    permutation_op,
)
from .wavefunction import (
    KinematicPoint,
    ParticleConfig,
    Provider,
    neighbor_smatrix,
    physical_provider,
    swapped,
)


def _coords(point) -> np.ndarray:
    if isinstance(point, KinematicPoint):
        return np.array(point.coords, dtype=complex)
    return np.array(point, dtype=complex)


@dataclass(frozen=True)
class TransportOperator:
    """Z_j as an ordered string of pair factors (leftmost written first)."""

    j: int
    n_sites: int
    factors: tuple[PairOperator, ...]
    coords: np.ndarray

    @property
    def factor_count(self) -> int:
        return len(self.factors)

    def apply(self, vec):
        if isinstance(vec, SpinVector):
            return SpinVector(self.n_sites, self.apply(vec.amps))
        out = np.asarray(vec, dtype=complex)
        for op in reversed(self.factors):
            out = apply_pair(op.mat, op.site_a, op.site_b, self.n_sites, out)
        return out

    __call__ = apply

    def dense(self) -> np.ndarray:
        return self.apply(np.eye(2 ** self.n_sites, dtype=complex))


def _walk(config, coords, start, word, provider):
    q = tuple(start)
    out = []
    for k in word:
        s, (a, b) = neighbor_smatrix(config, coords, q, k, provider)
        out.append(PairOperator(a, b, s))
        q = swapped(q, k)
    return out


def transport_factors(config: ParticleConfig, coords, j: int,
                      provider: Provider, shift: float):
    ref = config.reference
    pos = ref.index(j)
    n = config.n_total
    right = _walk(config, coords, ref, range(pos, n - 1), provider)
    shifted = np.array(coords, dtype=complex)
    shifted[j - 1] -= shift
    left = _walk(config, shifted, ref, range(pos - 1, -1, -1), provider)
    # M_left^-1 = (S_k ... S_1)^-1 = S_1^-1 ... S_k^-1, written left to right
    inv = [PairOperator(op.site_a, op.site_b, np.linalg.inv(op.mat))
           for op in left]
    # M_right = S_last ... S_first, written left to right
    return tuple(inv) + tuple(reversed(right))


def build_Z(config: ParticleConfig, point, j: int,
            provider: Provider | None = None) -> TransportOperator:
    """Transport operator of particle j at a kinematic point."""
    if not 1 <= j <= config.n_total:
        raise IndexError(f"particle {j} out of range")
    c = _coords(point)
    provider = provider or physical_provider(config)
    facs = transport_factors(config, c, j, provider, config.coupling.length_L)
    return TransportOperator(j, config.n_total, facs, c)


def transport_consistency(config: ParticleConfig, point, j: int, k: int,
                          provider: Provider | None = None) -> float:
    """Max-abs of Z_j(c - L e_k) Z_k(c) - Z_k(c - L e_j) Z_j(c)."""
    if j == k:
        raise ValueError("j and k must differ")
    c = _coords(point)
    L = config.coupling.length_L
    ck, cj = c.copy(), c.copy()
    ck[k - 1] -= L
    cj[j - 1] -= L
    lhs = build_Z(config, ck, j, provider).apply(build_Z(config, c, k, provider).dense())
    rhs = build_Z(config, cj, k, provider).apply(build_Z(config, c, j, provider).dense())
    return float(np.abs(lhs - rhs).max())


def pbc_residual(config: ParticleConfig, point, candidate: Callable, j: int,
                 provider: Provider | None = None) -> float:
    """Defect of f(..., c_j - L, ...) = Z_j f(..., c_j, ...).

    ``candidate`` maps a coordinate vector to the reference-ordering
    amplitude (SpinVector or array).
    """
    c = _coords(point)
    shifted = c.copy()
    shifted[j - 1] -= config.coupling.length_L
    f0 = _amps(candidate(c))
    f1 = _amps(candidate(shifted))
    z = build_Z(config, c, j, provider)
    return float(np.abs(f1 - z.apply(f0)).max())


def _amps(v) -> np.ndarray:
    return v.amps if isinstance(v, SpinVector) else np.asarray(v, dtype=complex)


# constant coupling ---------------------------------------------------------

def constant_provider(config: ParticleConfig, g) -> Provider:
    """Fixed-g exchanges: S between opposite chiralities, P otherwise."""
    s = constant_s_matrix(g).mat
    s_inv = np.linalg.inv(s)
    p = permutation_op().mat

    def provide(a: int, b: int, coords) -> np.ndarray:
        ra, rb = config.is_right(a), config.is_right(b)
        if ra and not rb:
            return s
        if rb and not ra:
            return s_inv
        return p

    return provide


def build_Z_constant(config: ParticleConfig, g, j: int) -> TransportOperator:
    """Transfer matrix of particle j for constant coupling g."""
    zeros = np.zeros(config.n_total)
    return build_Z(config, zeros, j, constant_provider(config, g))


def energy_constant(momenta: Sequence[float], config: ParticleConfig) -> float:
    if len(momenta) != config.n_total:
        raise ValueError("one momentum per particle required")
    return float(sum(k if config.is_right(j) else -k
                     for j, k in enumerate(momenta, start=1)))


def plane_wave(momenta: Sequence[float], amps) -> Callable:
    """Candidate amplitude c -> exp(i sum_j k_j c_j) A.

    Its transport eigenvalue is exp(-i k_j L): a transfer-matrix eigenvector
    with eigenvalue lam_j gives k_j = -arg(lam_j) / L.
    """
    k = np.asarray(momenta, dtype=float)
    a = _amps(amps)

    def f(coords):
        return np.exp(1j * np.dot(k, np.asarray(coords))) * a

    return f


def mutual_commutators(mats: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for i in range(len(mats)):
        for k in range(i + 1, len(mats)):
            worst = max(worst, commutator_norm(mats[i], mats[k]))
    return worst


def simultaneous_eigensystem(mats: Sequence[np.ndarray], seed: int = 0,
                             tol: float = 1e-9):
    """Common eigenvectors of commuting normal matrices.

    A random Hermitian combination of the Hermitian and anti-Hermitian parts
    splits degeneracies; each column is then checked as an eigenvector of
    every input.  Returns ``(vectors, eigenvalues)`` with eigenvalues[j, k]
    belonging to mats[j] and column k.
    """
    rng = np.random.default_rng(seed)
    dim = mats[0].shape[0]
    h = np.zeros((dim, dim), dtype=complex)
    for m in mats:
        a, b = rng.standard_normal(2)
        h += a * (m + m.conj().T) / 2 + b * (m - m.conj().T) / 2j
    _, vecs = np.linalg.eigh(h)
    vals = np.array([[np.vdot(v, m @ v) for v in vecs.T] for m in mats])
    for m, lam in zip(mats, vals):
        resid = np.abs(m @ vecs - vecs * lam).max()
        if resid > tol:
            raise np.linalg.LinAlgError(
                f"no common eigenbasis (residual {resid:.2e})")
    return vecs, vals

"""Dense complex linear algebra on N spin-1/2 tensor factors.

Basis convention (global): site 1 is the most significant bit of the basis
index and up (bit 0) precedes down (bit 1).  A basis index ``s`` therefore
encodes the spins ``(s >> (N - k)) & 1`` for site ``k = 1..N``.

Pair operators are applied matrix-free: the state is reshaped to a rank-N
tensor and the 4x4 block is contracted against the two named legs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UP, DOWN = 0, 1

MAX_SITES = 12

_I4 = np.eye(4, dtype=complex)
_P4 = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]],
    dtype=complex,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |up> -> |down>


class SiteError(ValueError):
    """Raised when a site index is outside ``1..n_sites`` or pairs collide."""


def _check_n(n_sites: int) -> None:
    if not 1 <= n_sites <= MAX_SITES:
        raise SiteError(f"n_sites must lie in 1..{MAX_SITES}, got {n_sites}")


@dataclass(frozen=True)
class SpinVector:
    """Amplitude vector over the 2**n_sites spin basis."""

    n_sites: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n_sites)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.n_sites:
            raise ValueError(
                f"expected {2 ** self.n_sites} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, spins) -> "SpinVector":
        """Product state from a sequence of 0 (up) / 1 (down) or 'u'/'d'."""
        bits = [_as_bit(s) for s in spins]
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[basis_index(bits)] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def reference(cls, n_sites: int) -> "SpinVector":
        """All spins up."""
        amps = np.zeros(2 ** n_sites, dtype=complex)
        amps[0] = 1.0
        return cls(n_sites, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "SpinVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return SpinVector(self.n_sites, self.amps / nrm)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(np.vdot(self.amps, self.amps).real - 1.0) < tol

    def __add__(self, other: "SpinVector") -> "SpinVector":
        _same_size(self, other)
        return SpinVector(self.n_sites, self.amps + other.amps)

    def __sub__(self, other: "SpinVector") -> "SpinVector":
        _same_size(self, other)
        return SpinVector(self.n_sites, self.amps - other.amps)

    def __mul__(self, scalar) -> "SpinVector":
        return SpinVector(self.n_sites, self.amps * scalar)

    __rmul__ = __mul__


def _same_size(a: SpinVector, b: SpinVector) -> None:
    if a.n_sites != b.n_sites:
        raise ValueError("spin vectors live on different numbers of sites")


def _as_bit(s) -> int:
    if s in (0, "u", "U", "up", "+"):
        return UP
    if s in (1, "d", "D", "down", "-"):
        return DOWN
    raise ValueError(f"not a spin label: {s!r}")


def basis_index(bits) -> int:
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    return idx


def basis_bits(index: int, n_sites: int) -> tuple[int, ...]:
    return tuple((index >> (n_sites - k)) & 1 for k in range(1, n_sites + 1))


@dataclass(frozen=True)
class PairOperator:
    """4x4 matrix acting on sites ``(site_a, site_b)`` (1-based).

    The matrix is written in the ordered basis uu, ud, du, dd of
    ``(site_a, site_b)``.
    """

    site_a: int
    site_b: int
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.site_a == self.site_b:
            raise SiteError("a pair operator needs two distinct sites")
        if min(self.site_a, self.site_b) < 1:
            raise SiteError("site indices are 1-based")
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (4, 4):
            raise ValueError(f"pair operator must be 4x4, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def on(self, site_a: int, site_b: int) -> "PairOperator":
        """Same matrix relocated to another pair of sites."""
        return PairOperator(site_a, site_b, self.mat)

    def swapped(self) -> "PairOperator":
        """Equivalent operator with the site order reversed."""
        return PairOperator(self.site_b, self.site_a, _P4 @ self.mat @ _P4)

    def __matmul__(self, other: "PairOperator") -> "PairOperator":
        if {self.site_a, self.site_b} != {other.site_a, other.site_b}:
            raise SiteError("can only compose pair operators on the same pair")
        rhs = other if other.site_a == self.site_a else other.swapped()
        return PairOperator(self.site_a, self.site_b, self.mat @ rhs.mat)


def identity_op(site_a: int = 1, site_b: int = 2) -> PairOperator:
    return PairOperator(site_a, site_b, _I4)


def permutation_op(site_a: int = 1, site_b: int = 2) -> PairOperator:
    """The exchange P of the two spin factors."""
    return PairOperator(site_a, site_b, _P4)


def sigma_dot_sigma(site_a: int = 1, site_b: int = 2) -> PairOperator:
    mat = sum(np.kron(s, s) for s in (PAULI_X, PAULI_Y, PAULI_Z))
    return PairOperator(site_a, site_b, mat)


def apply_pair(mat: np.ndarray, a: int, b: int, n_sites: int,
               arr: np.ndarray) -> np.ndarray:
    """Act with a 4x4 ``mat`` on sites ``a, b`` (1-based) of ``arr``.

    ``arr`` has leading dimension 2**n_sites; trailing dimensions (e.g. the
    columns of a matrix) are carried along untouched.
    """
    arr = np.asarray(arr)
    tail = arr.shape[1:]
    t = arr.reshape((2,) * n_sites + tail)
    op = np.asarray(mat).reshape(2, 2, 2, 2)
    out = np.tensordot(op, t, axes=([2, 3], [a - 1, b - 1]))
    # tensordot puts the two new legs first; move them back into place
    out = np.moveaxis(out, [0, 1], [a - 1, b - 1])
    return out.reshape(arr.shape)


@dataclass(frozen=True)
class EmbeddedOperator:
    """A pair operator lifted to the full 2**n_sites space."""

    op: PairOperator
    n_sites: int

    def apply(self, vec):
        if isinstance(vec, SpinVector):
            if vec.n_sites != self.n_sites:
                raise ValueError("vector size does not match the embedding")
            return SpinVector(self.n_sites, self.apply(vec.amps))
        return apply_pair(self.op.mat, self.op.site_a, self.op.site_b,
                          self.n_sites, vec)

    __call__ = apply

    def __matmul__(self, other):
        if isinstance(other, EmbeddedOperator):
            return self.dense() @ other.dense()
        return self.apply(other)

    def dense(self) -> np.ndarray:
        return self.apply(np.eye(2 ** self.n_sites, dtype=complex))


def embed_pair_op(op: PairOperator, n_sites: int) -> EmbeddedOperator:
    _check_n(n_sites)
    if max(op.site_a, op.site_b) > n_sites:
        raise SiteError(
            f"sites ({op.site_a}, {op.site_b}) out of range for {n_sites} sites")
    return EmbeddedOperator(op, n_sites)


def total_sz(n_sites: int) -> np.ndarray:
    """Diagonal of total S^z in the computational basis."""
    idx = np.arange(2 ** n_sites)
    downs = np.array([bin(i).count("1") for i in idx])
    return n_sites / 2.0 - downs


def flip_count(n_sites: int) -> np.ndarray:
    """Number of down spins for each basis index."""
    return np.array([bin(i).count("1") for i in range(2 ** n_sites)])


def sector_mask(n_sites: int, m_flips: int) -> np.ndarray:
    return flip_count(n_sites) == m_flips


def off_sector_mass(vec, m_flips: int) -> float:
    """Largest |amplitude| outside the ``m_flips``-down sector."""
    amps = vec.amps if isinstance(vec, SpinVector) else np.asarray(vec)
    n = int(round(np.log2(amps.size)))
    off = amps[~sector_mask(n, m_flips)]
    return float(np.abs(off).max()) if off.size else 0.0


def spin_flip(n_sites: int) -> np.ndarray:
    """Global up<->down flip as a permutation matrix."""
    dim = 2 ** n_sites
    mat = np.zeros((dim, dim), dtype=complex)
    mat[dim - 1 - np.arange(dim), np.arange(dim)] = 1.0
    return mat


def sigma_minus_on(site: int, n_sites: int, vec: np.ndarray) -> np.ndarray:
    """Apply the single-site lowering operator to ``vec``."""
    t = np.asarray(vec).reshape((2,) * n_sites)
    out = np.tensordot(SIGMA_MINUS, t, axes=([1], [site - 1]))
    return np.moveaxis(out, 0, site - 1).reshape(-1)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a @ b - b @ a).max())

"""Particle configurations, light-cone kinematics and Bethe amplitudes.

An ordering ``Q`` is the tuple of particle labels read from left to right in
space.  The free amplitude lives at the reference ordering (by default
``(N, ..., 1)``); every other ordering is reached by adjacent exchanges, each
contributing one two-body S-matrix acting on the spin factors of the two
exchanged particles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .scattering import (
    CouplingParams,
    s_matrix_lr,
    s_matrix_lr_inverse,
    s_matrix_same,
)
from .spin import MAX_SITES, SpinVector, apply_pair, basis_index

LEFT, RIGHT = "L", "R"

# A provider returns the 4x4 matrix (on the sites of particles a, b) that maps
# the amplitude of an ordering with a immediately left of b to the ordering
# with the two exchanged.
Provider = Callable[[int, int, np.ndarray], np.ndarray]


class CoincidenceError(ValueError):
    """Two particles sit on the same point (a measure-zero hyperplane)."""


class BoxError(ValueError):
    """A position lies outside [0, L]."""


class StencilError(ValueError):
    """A finite-difference stencil would cross a hyperplane or the box edge."""


@dataclass(frozen=True)
class ParticleConfig:
    chirality: tuple[str, ...]
    coupling: CouplingParams
    reference: tuple[int, ...] | None = None

    def __post_init__(self):
        chir = tuple(str(c).upper() for c in self.chirality)
        if not 1 <= len(chir) <= MAX_SITES:
            raise ValueError(f"need 1..{MAX_SITES} particles")
        if any(c not in (LEFT, RIGHT) for c in chir):
            raise ValueError("chirality labels must be 'L' or 'R'")
        object.__setattr__(self, "chirality", chir)
        n = len(chir)
        ref = tuple(range(n, 0, -1)) if self.reference is None \
            else tuple(int(q) for q in self.reference)
        check_ordering(ref, n)
        object.__setattr__(self, "reference", ref)

    @classmethod
    def standard(cls, n_total: int, n_left: int,
                 coupling: CouplingParams) -> "ParticleConfig":
        """Particles 1..n_left move left, the rest move right."""
        if not 0 <= n_left <= n_total:
            raise ValueError("need 0 <= n_left <= n_total")
        return cls((LEFT,) * n_left + (RIGHT,) * (n_total - n_left), coupling)

    @classmethod
    def from_pattern(cls, pattern: str, coupling: CouplingParams,
                     reference=None) -> "ParticleConfig":
        return cls(tuple(pattern), coupling, reference)

    @property
    def n_total(self) -> int:
        return len(self.chirality)

    @property
    def n_left(self) -> int:
        return self.chirality.count(LEFT)

    @property
    def n_right(self) -> int:
        return self.chirality.count(RIGHT)

    def is_right(self, j: int) -> bool:
        return self.chirality[j - 1] == RIGHT

    def right_movers(self) -> list[int]:
        return [j for j in range(1, self.n_total + 1) if self.is_right(j)]

    def left_movers(self) -> list[int]:
        return [j for j in range(1, self.n_total + 1) if not self.is_right(j)]


@dataclass(frozen=True)
class KinematicPoint:
    """Positions and time; ``coords`` holds z = x - t (right movers) or
    zbar = x + t (left movers) per particle."""

    positions: tuple[float, ...]
    time: float
    coords: np.ndarray

    @property
    def n(self) -> int:
        return len(self.positions)


def light_cone_coords(config: ParticleConfig, positions, t) -> np.ndarray:
    x = np.asarray(positions, dtype=float)
    signs = np.array([-1.0 if config.is_right(j) else 1.0
                      for j in range(1, config.n_total + 1)])
    return x + signs * t


def lightcone(config: ParticleConfig, positions, t: float) -> KinematicPoint:
    x = tuple(float(v) for v in positions)
    if len(x) != config.n_total:
        raise ValueError("one position per particle required")
    L = config.coupling.length_L
    for v in x:
        if not 0.0 <= v <= L:
            raise BoxError(f"position {v} outside [0, {L}]")
    return KinematicPoint(x, float(t), light_cone_coords(config, x, t))


def check_ordering(q: Sequence[int], n: int) -> None:
    if sorted(q) != list(range(1, n + 1)):
        raise ValueError(f"{tuple(q)} is not a permutation of 1..{n}")


def physical_provider(config: ParticleConfig) -> Provider:
    """S-matrices of the time-dependent model."""
    p = config.coupling

    def provide(a: int, b: int, coords: np.ndarray) -> np.ndarray:
        ra, rb = config.is_right(a), config.is_right(b)
        ca, cb = coords[a - 1], coords[b - 1]
        if ra and not rb:
            return s_matrix_lr(p, ca, cb).mat
        if rb and not ra:
            return s_matrix_lr_inverse(p, cb, ca).mat
        return s_matrix_same(p, ca, cb).mat

    return provide


def neighbor_smatrix(config: ParticleConfig, coords, q: Sequence[int], k: int,
                     provider: Provider | None = None):
    """Matrix taking the amplitude of ``q`` to that of ``q`` with positions
    ``k, k+1`` (0-based) exchanged, together with the two particle labels."""
    if not 0 <= k < len(q) - 1:
        raise IndexError(f"no adjacent pair at position {k}")
    provider = provider or physical_provider(config)
    a, b = q[k], q[k + 1]
    return provider(a, b, np.asarray(coords)), (a, b)


def swapped(q: Sequence[int], k: int) -> tuple[int, ...]:
    q = list(q)
    q[k], q[k + 1] = q[k + 1], q[k]
    return tuple(q)


def reduced_word(start: Sequence[int], target: Sequence[int],
                 method: str = "bubble") -> list[int]:
    """Adjacent-swap positions turning ``start`` into ``target``.

    Both methods give words of minimal length (the inversion count).  Bubble
    sort sweeps left to right; insertion sort grows a sorted block from the
    right end, so the two words differ whenever more than one exists.
    """
    rank = {lab: i for i, lab in enumerate(target)}
    keys = [rank[lab] for lab in start]
    n = len(keys)
    word: list[int] = []
    if method == "bubble":
        for sweep in range(n):
            for k in range(n - 1 - sweep):
                if keys[k] > keys[k + 1]:
                    keys[k], keys[k + 1] = keys[k + 1], keys[k]
                    word.append(k)
    elif method == "insertion":
        for i in range(n - 2, -1, -1):
            k = i
            while k < n - 1 and keys[k] > keys[k + 1]:
                keys[k], keys[k + 1] = keys[k + 1], keys[k]
                word.append(k)
                k += 1
    else:
        raise ValueError(f"unknown method {method!r}")
    return word


def operator_along(config: ParticleConfig, coords, start: Sequence[int],
                   word: Sequence[int], provider: Provider | None = None):
    """Accumulate the exchange matrices along ``word``.

    Returns ``(final_ordering, matrix)`` with the matrix acting on the full
    2**N spin space (rightmost factor = first exchange).
    """
    n = config.n_total
    provider = provider or physical_provider(config)
    coords = np.asarray(coords)
    q = tuple(start)
    mat = np.eye(2 ** n, dtype=complex)
    for k in word:
        s, (a, b) = neighbor_smatrix(config, coords, q, k, provider)
        mat = apply_pair(s, a, b, n, mat)
        q = swapped(q, k)
    return q, mat


def apply_along(config: ParticleConfig, coords, start, word, vec,
                provider: Provider | None = None):
    n = config.n_total
    provider = provider or physical_provider(config)
    coords = np.asarray(coords)
    q = tuple(start)
    v = np.asarray(vec, dtype=complex)
    for k in word:
        s, (a, b) = neighbor_smatrix(config, coords, q, k, provider)
        v = apply_pair(s, a, b, n, v)
        q = swapped(q, k)
    return q, v


def _amps(seed) -> np.ndarray:
    return seed.amps if isinstance(seed, SpinVector) else np.asarray(seed)


def amplitude_for_ordering(config: ParticleConfig, coords, seed,
                           target: Sequence[int],
                           method: str = "bubble") -> SpinVector:
    """Amplitude at ordering ``target`` generated from the reference seed."""
    check_ordering(target, config.n_total)
    word = reduced_word(config.reference, target, method)
    _, v = apply_along(config, coords, config.reference, word, _amps(seed))
    return SpinVector(config.n_total, v)


def amplitude_field(config: ParticleConfig, coords, seed,
                    method: str = "bubble") -> dict[tuple[int, ...], SpinVector]:
    """All N! ordering amplitudes at one kinematic point."""
    n = config.n_total
    return {q: amplitude_for_ordering(config, coords, seed, q, method)
            for q in itertools.permutations(range(1, n + 1))}


def ordering_of(positions, tol: float = 1e-9) -> tuple[int, ...]:
    x = np.asarray(positions, dtype=float)
    order = np.argsort(x, kind="stable")
    gaps = np.diff(x[order])
    if gaps.size and gaps.min() < tol:
        k = int(np.argmin(gaps))
        raise CoincidenceError(
            f"particles {order[k] + 1} and {order[k + 1] + 1} coincide")
    return tuple(int(i) + 1 for i in order)


SeedFn = Callable[[np.ndarray], object]


def evaluate_F(config: ParticleConfig, point: KinematicPoint,
               seed_fn: SeedFn) -> SpinVector:
    """Wavefunction vector F(x, t): the amplitude of the ordering realised
    by the positions (the one surviving step-function term)."""
    q = ordering_of(point.positions)
    return amplitude_for_ordering(config, point.coords,
                                  seed_fn(point.coords), q)


def antisymmetrize(config: ParticleConfig, seed_fn: SeedFn,
                   normalize: bool = True, fermionic: bool = True):
    """First-quantised wavefunction Psi(xi_1, ..., xi_N), xi = (x, chi, spin).

    Psi = c * sum_pi sign(pi) F(xi_pi(1), ..., xi_pi(N)) with c = 1/sqrt(N!)
    when ``normalize``; F vanishes unless the chirality labels match the
    configuration.  ``fermionic=False`` drops the permutation sign.
    """
    n = config.n_total
    perms = list(itertools.permutations(range(n)))
    signs = [_parity(pi) if fermionic else 1 for pi in perms]
    norm = 1.0 / math.sqrt(math.factorial(n)) if normalize else 1.0

    def psi(positions, chiralities, spins, t: float) -> complex:
        pos = list(positions)
        chis = [str(c).upper() for c in chiralities]
        bits = list(spins)
        total = 0j
        for pi, sgn in zip(perms, signs):
            if tuple(chis[i] for i in pi) != config.chirality:
                continue
            x = [pos[i] for i in pi]
            vec = evaluate_F(config, lightcone(config, x, t), seed_fn)
            total += sgn * vec.amps[basis_index([bits[i] for i in pi])]
        return norm * total

    return psi


def _parity(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def free_evolution_residual(config: ParticleConfig, seed_fn: SeedFn,
                            point: KinematicPoint, h: float) -> float:
    """Central-difference estimate of (d_t + sum_R d_xj - sum_L d_xk) F.

    Each partial derivative gets its own central difference, so the estimate
    carries the O(h^2) truncation error of the individual stencils.
    """
    x0 = np.array(point.positions, dtype=float)
    t0 = point.time
    L = config.coupling.length_L
    if x0.min() < 10 * h or x0.max() > L - 10 * h:
        raise StencilError("stencil too close to the box edge")
    xs = np.sort(x0)
    if xs.size > 1 and np.diff(xs).min() < 10 * h:
        raise StencilError("stencil too close to a coincidence hyperplane")

    def F(x, t):
        return evaluate_F(config, lightcone(config, x, t), seed_fn).amps

    total = (F(x0, t0 + h) - F(x0, t0 - h)) / (2 * h)
    for j in range(1, config.n_total + 1):
        e = np.zeros_like(x0)
        e[j - 1] = h
        d = (F(x0 + e, t0) - F(x0 - e, t0)) / (2 * h)
        total = total + d if config.is_right(j) else total - d
    return float(np.abs(total).max())

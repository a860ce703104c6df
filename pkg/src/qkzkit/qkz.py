"""Phase/spin separation, qKZ transport operators and Jackson-sum solutions.

After pulling out the scalar factor prod h(zbar_l - z_j), the spin part of
the reference amplitude obeys a qKZ system with step L.  In the rescaled
variables

    w_j = z_j / L (right movers),  wbar_l = zbar_l / L + beta / (alpha L),
    eta = 1 / (alpha L),

every exchange becomes the normalised rational R-matrix
R(x) = (x I - i eta P) / (x - i eta), and

    A(..., w_j - 1, ...) = Z'_j(w) A(w).

Solutions are built as truncated Jackson sums over Bethe vectors
B(u_1)...B(u_M)|up...up> on the lattice u_a = u~_a - l_a.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .scattering import (
    CouplingParams,
    PoleError,
    g_asymptotic,
    phase_from_g,
    phase_of_x,
    r_matrix,
    r_matrix_normalized,
)
from .spin import PairOperator, SpinVector, apply_pair, permutation_op
from .special import GammaPoleError, gamma_ratio, near_pole
from .transport import TransportOperator, _coords
from .wavefunction import ParticleConfig

_I4 = np.eye(4, dtype=complex)
_P4 = permutation_op().mat

ORIENTATIONS = ("w-u", "u-w")
SITE_PRODUCTS = ("single", "literal")
LATTICE_POLE_TOL = 1e-6


class LatticePoleError(ArithmeticError):
    """A Jackson lattice point sits on a Gamma or R-matrix pole."""

    def __init__(self, index: int, shift: int, what: str):
        super().__init__(f"lattice pole for rapidity {index} at l={shift}: {what}")
        self.index = index
        self.shift = shift


@dataclass(frozen=True)
class QKZParams:
    step: float
    step_eta: float
    w: tuple[complex, ...]
    m_flips: int = 0
    u_tilde: tuple[complex, ...] = ()
    trunc: int = 10
    orientation: str = "w-u"
    monodromy_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.step_eta == 0:
            raise ValueError("eta must be nonzero")
        object.__setattr__(self, "w", tuple(complex(v) for v in self.w))
        object.__setattr__(self, "u_tilde",
                           tuple(complex(v) for v in self.u_tilde))
        n = len(self.w)
        if not 0 <= self.m_flips <= n:
            raise ValueError("need 0 <= M <= N")
        if len(self.u_tilde) != self.m_flips:
            raise ValueError("need one base rapidity per flipped spin")
        for a, b in itertools.combinations(self.u_tilde, 2):
            d = a - b
            if abs(d - round(d.real)) < 1e-9:
                raise ValueError("base rapidities must be distinct mod 1")
        if self.trunc < 0:
            raise ValueError("truncation radius must be >= 0")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        order = tuple(range(1, n + 1)) if self.monodromy_order is None \
            else tuple(self.monodromy_order)
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError("monodromy order must permute the sites")
        object.__setattr__(self, "monodromy_order", order)

    @classmethod
    def from_point(cls, config: ParticleConfig, point, m_flips: int = 0,
                   u_tilde: Sequence[complex] = (), trunc: int = 10,
                   **kw) -> "QKZParams":
        """Rescaled parameters at a kinematic point.

        The monodromy runs over the reference ordering read right to left
        unless ``monodromy_order`` is given.
        """
        p = config.coupling
        kw.setdefault("monodromy_order", tuple(reversed(config.reference)))
        return cls(p.length_L, 1.0 / (p.alpha * p.length_L),
                   tuple(w_from_coords(config, _coords(point))),
                   m_flips, tuple(u_tilde), trunc, **kw)

    @property
    def n_sites(self) -> int:
        return len(self.w)

    def with_w(self, w) -> "QKZParams":
        return replace(self, w=tuple(w))

    def shifted(self, j: int, by: float = -1.0) -> "QKZParams":
        w = list(self.w)
        w[j - 1] += by
        return self.with_w(w)


def w_from_coords(config: ParticleConfig, coords) -> np.ndarray:
    p = config.coupling
    c = np.asarray(coords, dtype=complex)
    shift = np.array([0.0 if config.is_right(j) else p.beta / p.alpha
                      for j in range(1, config.n_total + 1)])
    return (c + shift) / p.length_L


# phase part ----------------------------------------------------------------

def h_gamma(p: CouplingParams, x, n: int = 0, pole_tol: float = 1e-12) -> complex:
    """Large-alpha, beta solution of the analytic difference equation."""
    L = p.length_L
    s = x + p.beta / p.alpha
    ratio = gamma_ratio((s - 1j / p.alpha) / L, (s - 0.5j / p.alpha) / L,
                        pole_tol)
    return cmath.exp(2j * math.pi * n * x / L) * ratio


def h_recursive(p: CouplingParams, base: Callable | None = None,
                x0: float = 0.0) -> Callable:
    """Exact solution of h(x + L) = e^{i phi(x)} h(x) from data on [x0, x0+L).

    ``base`` supplies h on the fundamental interval (default 1); values
    elsewhere follow by stepping the recursion with the exact phase.
    """
    L = p.length_L
    base = base or (lambda x: 1.0 + 0j)

    def h(x) -> complex:
        k = math.floor((float(np.real(x)) - x0) / L)
        y = x - k * L
        val = complex(base(y))
        for _ in range(max(k, 0)):
            val *= phase_of_x(p, y)
            y += L
        for _ in range(max(-k, 0)):
            y -= L
            val /= phase_of_x(p, y)
        return val

    return h


def analytic_diff_residual(p: CouplingParams, h: Callable, xs,
                           g_mode: str = "exact",
                           phase: Callable | None = None) -> float:
    """max_x |h(x + L) - e^{i phi(x)} h(x)| / |h(x)|.

    ``g_mode="asymptotic"`` takes the phase from g = 1/(4(alpha t + beta/2))
    instead of the exact coupling; ``phase`` overrides both.
    """
    if phase is None:
        if g_mode == "exact":
            phase = lambda x: phase_of_x(p, x)
        elif g_mode == "asymptotic":
            phase = lambda x: phase_from_g(g_asymptotic(p, x / 2.0))
        else:
            raise ValueError(f"unknown g_mode {g_mode!r}")
    worst = 0.0
    for x in np.atleast_1d(xs):
        hx = h(x)
        worst = max(worst, abs(h(x + p.length_L) - phase(x) * hx) / abs(hx))
    return worst


def separation_factor(config: ParticleConfig, point,
                      h: Callable | None = None) -> complex:
    """prod over right movers j and left movers l of h(zbar_l - z_j)."""
    c = _coords(point)
    if h is None:
        h = lambda x: h_gamma(config.coupling, x)
    out = 1.0 + 0j
    for j in config.right_movers():
        for l in config.left_movers():
            out *= h(c[l - 1] - c[j - 1])
    return out


# spin part -----------------------------------------------------------------

def r_hat(x, eta) -> np.ndarray:
    den = x - 1j * eta
    if abs(den) < 1e-12:
        raise PoleError(f"R-matrix pole at x={x!r}")
    return (x * _I4 - 1j * eta * _P4) / den


def _qkz_pairs(config: ParticleConfig, j: int):
    """(m, wraps) for the factors of Z'_j, written left to right."""
    ref = config.reference
    pos = ref.index(j)
    left = [(m, True) for m in reversed(ref[:pos])]   # nearest first
    right = [(m, False) for m in reversed(ref[pos + 1:])]  # farthest first
    return left + right


def qkz_operator(config: ParticleConfig, point, j: int,
                 normalized: bool = False) -> TransportOperator:
    """Z'_j from R-matrices R^{jm}(c_m [+L] - c_j) in physical coordinates.

    Left-mover coordinates carry the beta/alpha offset.  ``normalized``
    selects the R-matrix with unit up-up entry instead of the literal one.
    """
    p = config.coupling
    c = _coords(point)
    ct = w_from_coords(config, c) * p.length_L
    rmat = r_matrix_normalized if normalized else r_matrix
    facs = []
    for m, wraps in _qkz_pairs(config, j):
        lam = ct[m - 1] + (p.length_L if wraps else 0.0) - ct[j - 1]
        facs.append(PairOperator(j, m, rmat(p, lam).mat))
    return TransportOperator(j, config.n_total, tuple(facs), c)


def qkz_operator_w(config: ParticleConfig, qp: QKZParams, j: int) -> np.ndarray:
    """Dense Z'_j(w) with the normalised R-matrix and unit step."""
    n = qp.n_sites
    out = np.eye(2 ** n, dtype=complex)
    w = qp.w
    for m, wraps in reversed(_qkz_pairs(config, j)):
        x = w[m - 1] + (1.0 if wraps else 0.0) - w[j - 1]
        out = apply_pair(r_hat(x, qp.step_eta), j, m, n, out)
    return out


def bridge_deviation(config: ParticleConfig, point, j: int):
    """Compare transport Z_j with the literal R-matrix Z'_j.

    Returns ``(scalar, spread, factor_product)``: the overall ratio, its
    element dependence, and the product of per-factor ratios.
    """
    from .scattering import proportionality
    from .transport import build_Z

    z = build_Z(config, point, j)
    zr = qkz_operator(config, point, j)
    c, spread = proportionality(z.dense(), zr.dense())
    prod = 1.0 + 0j
    for a, b in zip(z.factors, zr.factors):
        if {a.site_a, a.site_b} != {b.site_a, b.site_b}:
            raise AssertionError("factor strings are not aligned")
        bm = b.mat if a.site_a == b.site_a else _P4 @ b.mat @ _P4
        ci, _ = proportionality(a.mat, bm)
        prod *= ci
    return c, spread, prod


def _x(qp: QKZParams, wi, u):
    return wi - u if qp.orientation == "w-u" else u - wi


def monodromy_B(qp: QKZParams, u) -> np.ndarray:
    """Lowering block <up_a| T(u) |down_a> of the monodromy matrix.

    T(u) = R_{a s1}(x_1) ... R_{a sN}(x_N) over ``qp.monodromy_order``, with
    x = w - u (or u - w) and the auxiliary space as the leading factor.
    """
    n = qp.n_sites
    dim = 2 ** (n + 1)
    t = np.eye(dim, dtype=complex)
    for s in reversed(qp.monodromy_order):
        x = _x(qp, qp.w[s - 1], u)
        t = apply_pair(r_hat(x, qp.step_eta), 1, s + 1, n + 1, t)
    d = 2 ** n
    return t[:d, d:]


def b_coefficients(qp: QKZParams, u):
    """Single-flip coefficients of B(u)|Omega>, raw and reduced.

    The raw coefficient of site i carries the diagonal factors b(x_k) =
    x_k / (x_k - i eta) of the sites after i in the monodromy string;
    dividing them out leaves a function of x_i alone.
    """
    n = qp.n_sites
    vec = monodromy_B(qp, u)[:, 0]
    raw = np.array([vec[1 << (n - s)] for s in range(1, n + 1)])
    reduced = raw.copy()
    order = qp.monodromy_order
    for pos, s in enumerate(order):
        for k in order[pos + 1:]:
            x = _x(qp, qp.w[k - 1], u)
            reduced[s - 1] /= x / (x - 1j * qp.step_eta)
    return raw, reduced


def _check_pole(z, index, shift, what):
    if near_pole(z, LATTICE_POLE_TOL):
        raise LatticePoleError(index, shift, f"{what} = {z:.6g}")


def site_weight(qp: QKZParams, u, n_left: int = 0, site_product: str = "single",
                index: int = 0, shift: int = 0) -> complex:
    """prod_i Gamma(w_i - u) / Gamma(w_i - u - i eta).

    ``site_product="literal"`` repeats each right-mover factor n_left times
    and each left-mover factor N - n_left times (a double product over
    right and left sites); kept only as a negative control.
    """
    if site_product not in SITE_PRODUCTS:
        raise ValueError(f"site_product must be one of {SITE_PRODUCTS}")
    eta = qp.step_eta
    n = qp.n_sites
    out = 1.0 + 0j
    for i, wi in enumerate(qp.w, start=1):
        a = wi - u
        _check_pole(a, index, shift, "Gamma(w - u)")
        _check_pole(a - 1j * eta, index, shift, "Gamma(w - u - i eta)")
        r = gamma_ratio(a, a - 1j * eta)
        if site_product == "literal":
            r = r ** (n_left if i > n_left else n - n_left)
        out *= r
    return out


def pair_weight(x, eta) -> complex:
    """x Gamma(x - i eta) / Gamma(x + i eta + 1)."""
    return x * gamma_ratio(x - 1j * eta, x + 1j * eta + 1.0)


@dataclass(frozen=True)
class JacksonResult:
    state: SpinVector
    tail: float
    terms: int


def jackson_sum(qp: QKZParams, n_left: int = 0, site_product: str = "single",
                drop_pair_factor: bool = False) -> JacksonResult:
    """Truncated Jackson sum over the box |l_a| <= trunc.

    Terms are accumulated in lexicographic order of (l_1, ..., l_M); ``tail``
    is the norm of the contribution of the outermost shell.
    """
    n, m, lam, eta = qp.n_sites, qp.m_flips, qp.trunc, qp.step_eta
    omega = np.zeros(2 ** n, dtype=complex)
    omega[0] = 1.0
    if m == 0:
        return JacksonResult(SpinVector(n, omega), 0.0, 1)
    shifts = range(-lam, lam + 1)
    bmats, sweights = [], []
    for a, ut in enumerate(qp.u_tilde, start=1):
        bs, ws = {}, {}
        for l in shifts:
            u = ut - l
            for wi in qp.w:
                if abs(_x(qp, wi, u) - 1j * eta) < LATTICE_POLE_TOL:
                    raise LatticePoleError(a, l, "R-matrix pole")
            ws[l] = site_weight(qp, u, n_left, site_product, a, l)
            bs[l] = monodromy_B(qp, u)
        bmats.append(bs)
        sweights.append(ws)

    pair_cache: dict = {}

    def pair(a, b, la, lb):
        key = (a, b, la - lb)
        if key not in pair_cache:
            x = qp.u_tilde[a] - qp.u_tilde[b] - (la - lb)
            for arg in (x - 1j * eta, x + 1j * eta + 1.0):
                if near_pole(arg, LATTICE_POLE_TOL):
                    raise LatticePoleError(a + 1, la, f"pair Gamma at {arg:.6g}")
            pair_cache[key] = pair_weight(x, eta)
        return pair_cache[key]

    total = np.zeros_like(omega)
    tail = np.zeros_like(omega)
    count = 0
    for ls in itertools.product(shifts, repeat=m):
        wt = 1.0 + 0j
        for a, l in enumerate(ls):
            wt *= sweights[a][l]
        if not drop_pair_factor:
            for a, b in itertools.combinations(range(m), 2):
                wt *= pair(a, b, ls[a], ls[b])
        vec = omega
        for a in reversed(range(m)):
            vec = bmats[a][ls[a]] @ vec
        term = wt * vec
        total += term
        if max(abs(l) for l in ls) == lam:
            tail += term
        count += 1
    return JacksonResult(SpinVector(n, total), float(np.linalg.norm(tail)), count)


def jackson_solution(qp: QKZParams, **kw) -> SpinVector:
    return jackson_sum(qp, **kw).state


def qkz_residual(config: ParticleConfig, qp: QKZParams, j: int,
                 solution: Callable | None = None) -> float:
    """||A(w - e_j) - Z'_j(w) A(w)||_inf / ||A(w)||_inf.

    ``solution`` maps QKZParams to the amplitude; the truncated Jackson sum
    is used when omitted.
    """
    solution = solution or jackson_solution
    a0 = _amps(solution(qp))
    a1 = _amps(solution(qp.shifted(j)))
    z = qkz_operator_w(config, qp, j)
    return float(np.abs(a1 - z @ a0).max() / np.abs(a0).max())


def _amps(v) -> np.ndarray:
    return v.amps if isinstance(v, SpinVector) else np.asarray(v, dtype=complex)


def swap_factor(u1, u2, eta) -> complex:
    """1-periodic ratio picked up when two base rapidities are exchanged."""
    d = u1 - u2
    return cmath.sin(math.pi * (d + 1j * eta)) / cmath.sin(math.pi * (d - 1j * eta))


def physical_candidate(config: ParticleConfig, h: Callable,
                       qp: QKZParams, **kw) -> Callable:
    """c -> separation_factor(c) * A(w(c)): a full reference amplitude."""

    def f(coords):
        w = w_from_coords(config, coords)
        return separation_factor(config, coords, h) * \
            jackson_solution(qp.with_w(w), **kw).amps

    return f

"""Coupling functions, S- and R-matrices, and Yang-Baxter / matching checks.

All scattering matrices are built from the identity ``I`` and the spin
exchange ``P`` on two spin-1/2 factors, times scalar prefactors.  The
integrable couplings are those for which the S-matrix parameter

    f(x) = (1 - 3 g(x/2)**2 / 4) / (2 g(x/2))

is linear, f(x) = alpha * x + beta.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, replace

import numpy as np

from .spin import PairOperator, permutation_op, sigma_dot_sigma, apply_pair

_I4 = np.eye(4, dtype=complex)
_P4 = permutation_op().mat

F_MODES = ("linear", "quadratic")
YBE_KINDS = ("LRR'", "RRL'", "same-chirality")


class PoleError(ArithmeticError):
    """A scattering matrix was requested at (or near) one of its poles."""


class MatchingError(ArithmeticError):
    """The coincidence matching system could not be solved."""


@dataclass(frozen=True)
class CouplingParams:
    """Integrable coupling f(x) = alpha x + beta plus branch and system size.

    ``f_mode="quadratic"`` swaps the linear f for f(x) = x**2 inside the
    opposite-chirality S-matrix; it exists only as a negative control.
    """

    alpha: complex = 1.0
    beta: complex = 0.0
    branch: int = 1
    length_L: float = 1.0
    f_mode: str = "linear"
    pole_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero; use the constant-coupling "
                             "transfer matrices for fixed g")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if not self.length_L > 0:
            raise ValueError("length_L must be positive")
        if self.f_mode not in F_MODES:
            raise ValueError(f"f_mode must be one of {F_MODES}")

    @property
    def hermitian(self) -> bool:
        return self.alpha.imag == 0 and self.beta.imag == 0

    def broken(self) -> "CouplingParams":
        return replace(self, f_mode="quadratic")


def g_of_t(p: CouplingParams, t) -> complex:
    """Interaction strength g(t) compatible with a linear f.

    Evaluated in a cancellation-free form: of the two algebraically equal
    expressions a + d and -3 / (a - d) (times 2/3) the one without
    subtractive loss is used.
    """
    u = 2.0 * p.alpha * t + p.beta
    a = -2.0 * u
    d = p.branch * cmath.sqrt(4.0 * u * u + 3.0)
    if abs(a + d) >= abs(a - d):
        return (2.0 / 3.0) * (a + d)
    return -2.0 / (a - d)


def g_asymptotic(p: CouplingParams, t) -> complex:
    """Large alpha, beta form g(t) = 1 / (4 (alpha t + beta / 2))."""
    return 1.0 / (4.0 * (p.alpha * t + p.beta / 2.0))


def f_from_g(g) -> complex:
    if g == 0:
        raise ZeroDivisionError("f is singular at g = 0")
    return (1.0 - 0.75 * g * g) / (2.0 * g)


def phase_from_g(g, tol: float = 1e-12) -> complex:
    den = 1j * g - (1.0 + 0.75 * g * g)
    if abs(den) < tol:
        raise PoleError(f"phase denominator vanishes at g={g!r}")
    return (2j * g - 1.0 + 0.75 * g * g) / den


def f_of_x(p: CouplingParams, x) -> complex:
    return f_from_g(g_of_t(p, x / 2.0))


def phase_of_x(p: CouplingParams, x) -> complex:
    """e^{i phi(x)} of the opposite-chirality S-matrix."""
    return phase_from_g(g_of_t(p, x / 2.0), p.pole_tol)


def _f_used(p: CouplingParams, x) -> complex:
    if p.f_mode == "quadratic":
        return complex(x) ** 2
    return f_of_x(p, x)


def _rational(coef, scale, tol) -> np.ndarray:
    # (i coef I + scale P) / (i coef + 1)
    den = 1j * coef + 1.0
    if abs(den) < tol:
        raise PoleError(f"pole: i*{coef!r} + 1 = 0")
    return (1j * coef * _I4 + scale * _P4) / den


def s_matrix_lr(p: CouplingParams, z_right, zbar_left, sites=(1, 2)) -> PairOperator:
    """S^{jk}(z_j, zbar_k) between right mover j and left mover k."""
    x = zbar_left - z_right
    mat = phase_of_x(p, x) * _rational(_f_used(p, x), 1.0, p.pole_tol)
    return PairOperator(sites[0], sites[1], mat)


def s_matrix_same(p: CouplingParams, u, v, sites=(1, 2)) -> PairOperator:
    """S'(u, v) between two particles of equal chirality."""
    return PairOperator(sites[0], sites[1],
                        _rational(p.alpha * (v - u), 1.0, p.pole_tol))


def s_matrix_lr_inverse(p: CouplingParams, z_right, zbar_left,
                        sites=(1, 2)) -> PairOperator:
    """Inverse of :func:`s_matrix_lr` (left mover crossing a right mover).

    Uses (i f I + P)(-i f I + P) = (1 + f^2) I, so no matrix inversion.
    """
    x = zbar_left - z_right
    mat = _rational(-_f_used(p, x), 1.0, p.pole_tol) / phase_of_x(p, x)
    return PairOperator(sites[0], sites[1], mat)


def r_matrix(p: CouplingParams, lam, sites=(1, 2)) -> PairOperator:
    """XXX R-matrix (i lam I + P / alpha) / (i lam + 1), as printed."""
    den = 1j * lam + 1.0
    if abs(den) < p.pole_tol:
        raise PoleError(f"R-matrix pole at lambda={lam!r}")
    return PairOperator(sites[0], sites[1],
                        (1j * lam * _I4 + _P4 / p.alpha) / den)


def r_matrix_normalized(p: CouplingParams, lam, sites=(1, 2)) -> PairOperator:
    """R-matrix rescaled so that its up-up entry is 1.

    Equals (i lam I + P / alpha) / (i lam + 1 / alpha); with this scaling
    S = e^{i phi} R(zbar - z + beta / alpha) and S'(u, v) = R(v - u) hold
    without leftover scalars.
    """
    den = 1j * lam + 1.0 / p.alpha
    if abs(den) < p.pole_tol:
        raise PoleError(f"R-matrix pole at lambda={lam!r}")
    return PairOperator(sites[0], sites[1],
                        (1j * lam * _I4 + _P4 / p.alpha) / den)


def proportionality(a: np.ndarray, b: np.ndarray, floor: float = 1e-14):
    """Return (c, spread) with a ~= c * b over entries where b is nonzero.

    ``spread`` is the largest deviation of an individual entry ratio from c,
    relative to |c|.
    """
    mask = np.abs(b) > floor
    if not mask.any():
        raise ValueError("reference matrix is zero")
    ratios = a[mask] / b[mask]
    c = ratios[np.argmax(np.abs(b[mask]))]
    spread = float(np.abs(ratios - c).max() / max(abs(c), floor))
    leak = float(np.abs(a[~mask]).max()) if (~mask).any() else 0.0
    return complex(c), max(spread, leak)


def scalar_ratio(p: CouplingParams, x, tol: float = 1e-10) -> complex:
    """c(x) with S_lr(zbar - z = x) = c(x) * R(x + beta / alpha)."""
    s = s_matrix_lr(p, 0.0, x).mat
    r = r_matrix(p, x + p.beta / p.alpha).mat
    c, spread = proportionality(s, r)
    if spread > tol:
        raise ValueError(f"S and R are not proportional (spread {spread:.3e})")
    return c


def constant_s_matrix(g, sites=(1, 2)) -> PairOperator:
    """Constant-coupling S-matrix; g = 0 gives its free limit, the identity."""
    if g == 0:
        return PairOperator(sites[0], sites[1], _I4)
    f = f_from_g(g)
    return PairOperator(sites[0], sites[1],
                        phase_from_g(g) * _rational(f, 1.0, 1e-14))


def _product(factors) -> np.ndarray:
    # factors are (mat, a, b), listed left to right; rightmost acts first
    out = np.eye(8, dtype=complex)
    for mat, a, b in reversed(factors):
        out = apply_pair(mat, a, b, 3, out)
    return out


def ybe_factors(kind: str, p: CouplingParams, coords):
    """The three factor matrices (X, Y, Z) of the chosen Yang-Baxter relation.

    Sites are 1, 2, 3 = (i, j, k).  The relation checked is
    X Y Z = Z Y X with
      LRR' : X = S^{ij}(z_i, zb_j), Y = S^{ik}(z_i, zb_k), Z = S'^{jk}(zb_j, zb_k)
      RRL' : X = S^{jk}(z_j, zb_k), Y = S^{ik}(z_i, zb_k), Z = S'^{ij}(z_i, z_j)
      same-chirality : X = S'^{ij}, Y = S'^{ik}, Z = S'^{jk}
    ``coords`` are the light-cone coordinates of (i, j, k) for that pattern.
    """
    ci, cj, ck = coords
    if kind == "LRR'":
        return ((s_matrix_lr(p, ci, cj).mat, 1, 2),
                (s_matrix_lr(p, ci, ck).mat, 1, 3),
                (s_matrix_same(p, cj, ck).mat, 2, 3))
    if kind == "RRL'":
        return ((s_matrix_lr(p, cj, ck).mat, 2, 3),
                (s_matrix_lr(p, ci, ck).mat, 1, 3),
                (s_matrix_same(p, ci, cj).mat, 1, 2))
    if kind == "same-chirality":
        return ((s_matrix_same(p, ci, cj).mat, 1, 2),
                (s_matrix_same(p, ci, ck).mat, 1, 3),
                (s_matrix_same(p, cj, ck).mat, 2, 3))
    raise ValueError(f"unknown YBE kind {kind!r}; expected one of {YBE_KINDS}")


def verify_ybe(kind: str, p: CouplingParams, coords) -> float:
    """Max-abs residual of X Y Z - Z Y X on the three-site space."""
    x, y, z = ybe_factors(kind, p, coords)
    lhs = _product([x, y, z])
    rhs = _product([z, y, x])
    return float(np.abs(lhs - rhs).max())


# Coefficient bookkeeping for the coincidence matching condition.  With
# F = f12 theta(x2 - x1) + f21 theta(x1 - x2), the transport derivative
# (d_t + d_x1 - d_x2) only sees the step functions:
_STEP_DERIV = {"12": -2.0, "21": +2.0}
_THETA_AT_ZERO = 0.5
_COUPLING_NORM = 2.0  # the spin-exchange term carries 2 g(t) sigma.sigma


def matching_system(g):
    """Coefficient matrices (C21, C12) with C21 f21 + C12 f12 = 0.

    Integrating the two-particle equation across x1 = x2 gives
    -i * [step jump] f + (2 g) * theta(0) * (sigma.sigma) f for each
    ordering.
    """
    ss = sigma_dot_sigma().mat
    coup = _COUPLING_NORM * g * _THETA_AT_ZERO * ss
    c21 = -1j * _STEP_DERIV["21"] * _I4 + coup
    c12 = -1j * _STEP_DERIV["12"] * _I4 + coup
    return c21, c12


def derive_smatrix_from_matching(p: CouplingParams, t):
    """Solve the coincidence matching at time t for S (f21 = S f12).

    Returns ``(S, deviation)`` where deviation is the max-abs elementwise
    difference from :func:`s_matrix_lr` at zbar - z = 2 t.
    """
    g = g_of_t(p, t)
    c21, c12 = matching_system(g)
    if abs(np.linalg.det(c21)) < 1e-300 or np.linalg.cond(c21) > 1e12:
        raise MatchingError(f"singular matching system at t={t!r}")
    s = np.linalg.solve(c21, -c12)
    ref = s_matrix_lr(replace(p, f_mode="linear"), 0.0, 2.0 * t).mat
    return PairOperator(1, 2, s), float(np.abs(s - ref).max())

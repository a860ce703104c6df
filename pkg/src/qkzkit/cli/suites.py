"""Verification suites: seeded case generators plus replayable evaluators.

Every case is a JSON-serialisable ``inputs`` dict; ``evaluate`` maps
(config, inputs) to a residual, so any recorded case can be re-run alone.
"""

from __future__ import annotations

import itertools
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import qkz, scattering, transport, wavefunction
from ..special import GammaPoleError
from ..spin import off_sector_mass
from .config import RunConfig

SAMPLER = "numpy.random.PCG64"

SKIP_ERRORS = (scattering.PoleError, scattering.MatchingError, GammaPoleError,
               qkz.LatticePoleError, ZeroDivisionError, np.linalg.LinAlgError)


def suite_rng(cfg: RunConfig, name: str) -> np.random.Generator:
    """Independent stream per suite so results do not depend on which
    other suites run."""
    ss = np.random.SeedSequence([cfg.seed, zlib.crc32(name.encode())])
    return np.random.Generator(np.random.PCG64(ss))


def _config(cfg: RunConfig) -> wavefunction.ParticleConfig:
    return wavefunction.ParticleConfig.standard(cfg.n_total, cfg.n_left,
                                                cfg.coupling())


def _coords(cfg, rng, n=None):
    lo, hi = cfg.sample_range
    return [float(v) for v in rng.uniform(lo, hi, n or cfg.n_total)]


# generators return [(case_id, inputs, tol)] ---------------------------------

def _gen_coupling(cfg, rng):
    lo, hi = cfg.sample_range
    return [(f"x{i}", {"x": float(x)}, 1e-12)
            for i, x in enumerate(rng.uniform(lo, hi, cfg.samples))]


def _eval_coupling(cfg, d):
    p = cfg.coupling()
    x = d["x"]
    target = p.alpha * x + p.beta
    return abs(scattering.f_of_x(p, x) - target) / (1 + abs(target))


def _gen_ybe(cfg, rng):
    out = []
    for kind in scattering.YBE_KINDS:
        for i in range(cfg.samples):
            out.append((f"{kind}#{i}", {"kind": kind, "coords": _coords(cfg, rng, 3)},
                        1e-11))
    return out


def _eval_ybe(cfg, d):
    return scattering.verify_ybe(d["kind"], cfg.coupling(), d["coords"])


def _gen_matching(cfg, rng):
    return [(f"t{i}", {"t": float(t)}, 1e-11)
            for i, t in enumerate(rng.uniform(-3.0, 3.0, cfg.samples))]


def _eval_matching(cfg, d):
    return scattering.derive_smatrix_from_matching(cfg.coupling(), d["t"])[1]


def _gen_points(tol):
    def gen(cfg, rng):
        return [(f"p{i}", {"coords": _coords(cfg, rng)}, tol)
                for i in range(cfg.samples)]
    return gen


def _eval_paths(cfg, d):
    conf = _config(cfg)
    n = conf.n_total
    worst = 0.0
    for q in itertools.permutations(range(1, n + 1)):
        mats = []
        for method in ("bubble", "insertion"):
            word = wavefunction.reduced_word(conf.reference, q, method)
            mats.append(wavefunction.operator_along(conf, d["coords"],
                                                    conf.reference, word)[1])
        worst = max(worst, float(np.abs(mats[0] - mats[1]).max()))
    return worst


def _eval_transport(cfg, d):
    conf = _config(cfg)
    n = conf.n_total
    return max((transport.transport_consistency(conf, d["coords"], j, k)
                for j in range(1, n + 1) for k in range(j + 1, n + 1)),
               default=0.0)


def _h(cfg):
    p = cfg.coupling()
    if cfg.h_mode == "user-table":
        return qkz.h_recursive(p)
    return lambda x: qkz.h_gamma(p, x)


def _eval_pbc(cfg, d):
    conf = _config(cfg)
    h = _h(cfg)
    omega = np.zeros(2 ** conf.n_total, dtype=complex)
    omega[0] = 1.0

    def cand(c):
        return qkz.separation_factor(conf, c, h) * omega

    return max(transport.pbc_residual(conf, d["coords"], cand, j)
               for j in range(1, conf.n_total + 1))


def _gen_constant(cfg, rng):
    return [(f"g{i}", {"g": float(g)}, 1e-12)
            for i, g in enumerate(rng.uniform(0.1, 2.0, cfg.samples))]


def _eval_constant(cfg, d):
    conf = _config(cfg)
    zs = [transport.build_Z_constant(conf, d["g"], j).dense()
          for j in range(1, conf.n_total + 1)]
    comm = transport.mutual_commutators(zs)
    _, vals = transport.simultaneous_eigensystem(zs)
    return max(comm, float(np.abs(np.abs(vals) - 1).max()))


_DECADES = (1e2, 1e3, 1e4)


def _gen_analytic(cfg, rng):
    out = []
    for a in _DECADES:
        for i, x in enumerate(rng.uniform(0.0, cfg.length_L, cfg.samples)):
            out.append((f"a{a:g}#{i}", {"alpha": a, "x": float(x)}, 0.1 / a))
    return out


def _eval_analytic(cfg, d):
    a = d["alpha"]
    p = scattering.CouplingParams(a, a * cfg.beta / cfg.alpha, cfg.branch,
                                  cfg.length_L)
    return qkz.analytic_diff_residual(p, lambda x: qkz.h_gamma(p, x), [d["x"]])


def _qp(cfg, conf, coords, m, trunc):
    return qkz.QKZParams.from_point(conf, coords, m, cfg.u_list()[:m], trunc)


def _gen_qkz(cfg, rng):
    out = []
    for i in range(cfg.samples):
        c = _coords(cfg, rng)
        out.append((f"sector#{i}", {"check": "sector", "coords": c}, 1e-13))
        out.append((f"m0#{i}", {"check": "m0", "coords": c}, 1e-12))
    return out


def _eval_qkz(cfg, d):
    conf = _config(cfg)
    if d["check"] == "sector":
        qp = _qp(cfg, conf, d["coords"], cfg.m_flips, max(cfg.trunc))
        return off_sector_mass(qkz.jackson_solution(qp), cfg.m_flips)
    qp = _qp(cfg, conf, d["coords"], 0, 0)
    return max(qkz.qkz_residual(conf, qp, j) for j in range(1, conf.n_total + 1))


def convergence_curve(cfg, coords, m=None, trunc=None):
    """[(trunc, residual, tail)] for the Jackson solution at ``coords``."""
    conf = _config(cfg)
    m = cfg.m_flips if m is None else m
    rows = []
    for lam in (trunc or cfg.trunc):
        qp = _qp(cfg, conf, coords, m, lam)
        r = max(qkz.qkz_residual(conf, qp, j) for j in range(1, conf.n_total + 1))
        rows.append((lam, r, qkz.jackson_sum(qp).tail))
    return rows


def _gen_convergence(cfg, rng):
    return [(f"p{i}", {"coords": _coords(cfg, rng)}, 1.0)
            for i in range(cfg.samples)]


def _eval_convergence(cfg, d):
    """Largest ratio of successive residuals (< 1 means strictly decreasing)."""
    rows = convergence_curve(cfg, d["coords"])
    res = [r for _, r, _ in rows]
    return max((b / a for a, b in zip(res, res[1:])), default=0.0)


@dataclass(frozen=True)
class Suite:
    name: str
    generate: object
    evaluate: object


SUITES = {s.name: s for s in (
    Suite("coupling", _gen_coupling, _eval_coupling),
    Suite("ybe", _gen_ybe, _eval_ybe),
    Suite("matching", _gen_matching, _eval_matching),
    Suite("path-independence", _gen_points(1e-10), _eval_paths),
    Suite("transport", _gen_points(1e-10), _eval_transport),
    Suite("pbc", _gen_points(1e-10), _eval_pbc),
    Suite("constant-mode", _gen_constant, _eval_constant),
    Suite("analytic-diff", _gen_analytic, _eval_analytic),
    Suite("qkz", _gen_qkz, _eval_qkz),
    Suite("jackson-convergence", _gen_convergence, _eval_convergence),
)}


def run_case(name: str, cfg: RunConfig, inputs: dict) -> float:
    """Re-evaluate one recorded case."""
    return float(SUITES[name].evaluate(cfg, inputs))


def run_suite(name: str, cfg: RunConfig, workers: int = 1):
    """Evaluate every case of a suite.

    Returns ``(cases, seconds)``: case dicts in generation order and the
    matching wall times, kept apart so the cases stay deterministic.
    """
    suite = SUITES[name]
    cases = suite.generate(cfg, suite_rng(cfg, name))
    override = cfg.tolerances.get(name)

    def one(case):
        cid, inputs, tol = case
        tol = override if override is not None else tol
        t0 = time.perf_counter()
        try:
            r = float(suite.evaluate(cfg, inputs))
            status = "pass" if r < tol else "fail"
        except SKIP_ERRORS as exc:
            r, status = None, f"skipped: {type(exc).__name__}"
        entry = {"suite": name, "case": cid, "inputs": inputs,
                 "residual": r, "tol": tol, "status": status}
        return entry, time.perf_counter() - t0

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, cases))
    else:
        results = [one(c) for c in cases]
    return [r[0] for r in results], [r[1] for r in results]

"""Flat key = value run configuration with dotted keys.

Example::

    # coupling
    coupling.alpha = 1.0
    coupling.beta  = 0.3
    system.N   = 4
    system.N_L = 2
    kinematics.samples = 20
    kinematics.seed    = 7
    qkz.u     = 0.3+0.2j, 0.75-0.1j
    qkz.trunc = 5, 10, 20, 40
    suites = ybe, transport
    tol.ybe = 1e-11

Blank lines and ``#`` comments are ignored.  Unknown keys are an error.
The only environment override is ``QKZ_KIT_SEED``.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace

from ..scattering import CouplingParams

SEED_ENV = "QKZ_KIT_SEED"

SUITE_NAMES = (
    "coupling", "ybe", "matching", "path-independence", "transport", "pbc",
    "constant-mode", "analytic-diff", "qkz", "jackson-convergence",
)
H_MODES = ("gamma-asymptotic", "user-table")


class ConfigError(ValueError):
    pass


def _float_list(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v.strip())


def _int_list(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.split(",") if v.strip())


def _complex_list(s: str) -> tuple[complex, ...]:
    return tuple(complex(v.replace(" ", "")) for v in s.split(",") if v.strip())


def _names(s: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _choice(options):
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {options}")
        return s
    return parse


# key -> (attribute path, parser)
_SCHEMA = {
    "coupling.alpha": ("alpha", float),
    "coupling.beta": ("beta", float),
    "coupling.branch": ("branch", int),
    "coupling.L": ("length_L", float),
    "system.N": ("n_total", int),
    "system.N_L": ("n_left", int),
    "kinematics.positions": ("positions", _float_list),
    "kinematics.time": ("time", float),
    "kinematics.range": ("sample_range", _float_list),
    "kinematics.samples": ("samples", int),
    "kinematics.seed": ("seed", int),
    "qkz.M": ("m_flips", int),
    "qkz.u": ("u_tilde", _complex_list),
    "qkz.trunc": ("trunc", _int_list),
    "qkz.h_mode": ("h_mode", _choice(H_MODES)),
    "suites": ("suites", _names),
    "output.path": ("out", str),
    "output.format": ("fmt", _choice(("json", "csv"))),
    "run.workers": ("workers", int),
    "run.break_f": ("break_f", _choice(("none", "quadratic"))),
}


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 1.0
    beta: float = 0.3
    branch: int = 1
    length_L: float = 1.0
    n_total: int = 4
    n_left: int = 2
    positions: tuple[float, ...] = ()
    time: float = 0.0
    sample_range: tuple[float, ...] = (-5.0, 5.0)
    samples: int = 20
    seed: int = 0
    m_flips: int = 1
    u_tilde: tuple[complex, ...] = (0.3 + 0.2j,)
    trunc: tuple[int, ...] = (5, 10, 20, 40)
    h_mode: str = "user-table"
    suites: tuple[str, ...] = ()
    tolerances: dict = field(default_factory=dict)
    out: str = ""
    fmt: str = "json"
    workers: int = 1
    break_f: str = "none"

    def validate(self) -> "RunConfig":
        if self.alpha == 0:
            raise ConfigError("coupling.alpha must be nonzero")
        if self.branch not in (1, -1):
            raise ConfigError("coupling.branch must be 1 or -1")
        if self.length_L <= 0:
            raise ConfigError("coupling.L must be positive")
        if not 1 <= self.n_total <= 6:
            raise ConfigError("system.N must lie in 1..6")
        if not 0 <= self.n_left <= self.n_total:
            raise ConfigError("need 0 <= system.N_L <= system.N")
        if self.positions and len(self.positions) != self.n_total:
            raise ConfigError("kinematics.positions needs one value per particle")
        if len(self.sample_range) != 2 or self.sample_range[0] >= self.sample_range[1]:
            raise ConfigError("kinematics.range must be 'lo, hi' with lo < hi")
        if self.samples < 0:
            raise ConfigError("kinematics.samples must be >= 0")
        if not 0 <= self.m_flips <= self.n_total:
            raise ConfigError("qkz.M must lie in 0..N")
        if any(t < 0 for t in self.trunc):
            raise ConfigError("qkz.trunc entries must be >= 0")
        if self.workers < 1:
            raise ConfigError("run.workers must be >= 1")
        for s in self.suites:
            if s not in SUITE_NAMES:
                raise ConfigError(f"unknown suite {s!r}")
        for s in self.tolerances:
            if s not in SUITE_NAMES:
                raise ConfigError(f"tolerance for unknown suite {s!r}")
        return self

    def coupling(self) -> CouplingParams:
        return CouplingParams(self.alpha, self.beta, self.branch, self.length_L,
                              "quadratic" if self.break_f == "quadratic" else "linear")

    def u_list(self) -> tuple[complex, ...]:
        """Base rapidities for the requested M (padded deterministically)."""
        u = list(self.u_tilde[: self.m_flips])
        while len(u) < self.m_flips:
            u.append(complex(0.3 + 0.45 * len(u), 0.2 - 0.3 * len(u)))
        return tuple(u)

    def digest(self) -> str:
        d = asdict(self)
        d.pop("out")
        d.pop("workers")  # output must not depend on the worker count
        blob = json.dumps(d, sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    tols = dict(base.tolerances) if base else {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("tol."):
            try:
                tols[key[4:]] = float(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad tolerance {val!r}") from None
            continue
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, parse = _SCHEMA[key]
        try:
            values[attr] = parse(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    cfg = replace(base or RunConfig(), tolerances=tols, **values)
    return cfg.validate()


def load_config(path: str | None) -> RunConfig:
    """Read ``path`` (or defaults) and apply the seed environment override.

    OSError propagates so the caller can map it to the I/O exit class.
    """
    cfg = RunConfig()
    if path:
        with open(path, encoding="utf-8") as fh:
            cfg = parse_config_text(fh.read(), cfg)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            cfg = replace(cfg, seed=int(env))
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    return cfg.validate()

"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` and trailing ``# ...`` are comments. Unknown keys are
rejected. Free times ``t1``..``t3`` accept a number, ``onset`` (the pulse start)
or ``optimize`` (minimize the eigenvalue objective before use); when left unset
``fig2`` optimizes ``t1`` and every other command uses the onset.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .kam import KamParams
from .metrics import METHODS
from .model import PulseShape, two_level_problem
from .quadrature import ALLOWED_ORDERS

SWEEP_PARAMETERS = ("epsilon", "area", "t1", "t2", "t3", "t1_lower", "t2_lower", "t3_lower")
SCAN_PARAMETERS = ("t1", "t2", "t3", "t1_lower", "t2_lower", "t3_lower")


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 2)."""


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _methods(text):
    out = [m.strip().upper() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad:
        raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
    return out


def _free_time(text):
    text = text.strip().lower()
    if text in ("onset", "optimize"):
        return text
    return float(text)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(options):
    def parse(text):
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"{text!r} not in {options}")
        return t

    return parse


@dataclass
class ExperimentConfig:
    area: float = 1.0
    epsilon: float = 0.5
    pulse: str = "sin2"
    t_start: float = 0.0
    t_end: float = 1.0
    scan_parameter: str = "t1"
    scan_lo: float | None = None
    scan_hi: float | None = None
    scan_points: int = 101
    methods: list[str] = field(default_factory=lambda: ["DYSON1", "DYSON2", "MAGNUS1", "MAGNUS2", "KAM1", "KAM2"])
    t1: float | str | None = None
    t2: float | str | None = None
    t3: float | str | None = None
    t1_lower: float | None = None
    t2_lower: float | None = None
    t3_lower: float | None = None
    epsilons: list[float] = field(default_factory=lambda: [0.05, 0.1, 0.2])
    sweep_parameter: str = "epsilon"
    sweep_lo: float = 0.05
    sweep_hi: float = 0.5
    sweep_points: int = 10
    quad_panels: int = 64
    quad_order: int = 8
    series_tol: float = 1e-15
    series_max_terms: int = 60
    ode_tol: float = 1e-12
    output_dir: str = "out"
    svg: bool = False

    def validate(self):
        if not self.t_start < self.t_end:
            raise ConfigError("t_start must be < t_end")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.scan_points < 3 or self.sweep_points < 2:
            raise ConfigError("scan_points must be >= 3 and sweep_points >= 2")
        if self.quad_order not in ALLOWED_ORDERS or self.quad_panels < 4:
            raise ConfigError(f"quad_order must be in {ALLOWED_ORDERS} and quad_panels >= 4")
        if not 1e-14 <= self.ode_tol <= 1e-6:
            raise ConfigError("ode_tol must lie in [1e-14, 1e-6]")
        if len(self.epsilons) < 3 or any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons needs at least 3 positive values")
        lo, hi = self.scan_range()
        if not lo < hi:
            raise ConfigError("scan_lo must be < scan_hi")
        return self

    def scan_range(self):
        lo = self.t_start if self.scan_lo is None else self.scan_lo
        hi = self.t_end if self.scan_hi is None else self.scan_hi
        return lo, hi

    def problem(self, epsilon=None, area=None):
        eps = self.epsilon if epsilon is None else epsilon
        a = self.area if area is None else area
        return two_level_problem(a, eps, self.t_start, self.t_end, PulseShape(self.pulse))

    def kam_params(self, n: int, fixed: dict | None = None) -> list[KamParams]:
        """Parameters for ``n`` iterations; ``optimize`` entries are left at the onset
        and must be filled in by the caller (see ``fixed``)."""
        fixed = fixed or {}
        out = []
        for k in range(1, n + 1):
            t_free = fixed.get(f"t{k}", getattr(self, f"t{k}"))
            if t_free in (None, "onset", "optimize"):
                t_free = None
            out.append(
                KamParams(
                    t_free=t_free,
                    t_lower=fixed.get(f"t{k}_lower", getattr(self, f"t{k}_lower")),
                    series_tol=self.series_tol,
                    series_max_terms=self.series_max_terms,
                    quad_panels=self.quad_panels,
                    quad_order=self.quad_order,
                )
            )
        return out


_PARSERS = {
    "area": float,
    "epsilon": float,
    "pulse": _choice(tuple(s.value for s in PulseShape)),
    "t_start": float,
    "t_end": float,
    "scan_parameter": _choice(SCAN_PARAMETERS),
    "scan_lo": float,
    "scan_hi": float,
    "scan_points": int,
    "methods": _methods,
    "t1": _free_time,
    "t2": _free_time,
    "t3": _free_time,
    "t1_lower": float,
    "t2_lower": float,
    "t3_lower": float,
    "epsilons": _floats,
    "sweep_parameter": _choice(SWEEP_PARAMETERS),
    "sweep_lo": float,
    "sweep_hi": float,
    "sweep_points": int,
    "quad_panels": int,
    "quad_order": int,
    "series_tol": float,
    "series_max_terms": int,
    "ode_tol": float,
    "output_dir": str,
    "svg": _bool,
}
assert set(_PARSERS) == {f.name for f in fields(ExperimentConfig)}


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


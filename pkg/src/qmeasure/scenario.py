"""Scenario files: parsing, validation and the model they describe.

A scenario is a JSON object::

    {
      "name": "two-level",                      # optional
      "description": "...",                     # optional
      "objectDim": 2,
      "objectEigenvalues": [1.0, -1.0],
      "initialAmplitudes": [[0.6, 0.0], [0.8, 0.0]],
      "readyState": {"pointerIndex": 0},        # or {"amplitudes": [[re, im], ...]}
      "timing": {"t": 0.0, "deltaT": 1e-9, "tau": 1e-3},
      "checks": ["constraint", "joint-distribution"],
      "monteCarlo": {"trials": 10000, "seed": 42},
      "illustrativeTiming": false,              # optional
      "muchLessThanRatio": 10.0                 # optional
    }

The object observable is diagonal in the computational basis with the given
eigenvalues, the apparatus has the same dimension, and the pointer
eigenvectors are its computational basis vectors. Indices are 0-based.
Amplitudes must already be normalized; they are never rescaled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .hilbert import SpectralObservable, basis_vector
from .kernel import MeasurementModel, make_model

CHECK_NAMES = (
    "constraint",
    "linearity",
    "pointer-distribution",
    "joint-distribution",
    "conditional-state",
    "chain",
    "repeatability-montecarlo",
    "entropy",
    "bayes-contrast",
    "open-system",
)

STOCK_SCENARIOS = ("two-level", "atom-beam-timing", "chain-three-system", "bayes-contrast")

# amplitudes become kernel state vectors, whose squared norm must be within 1e-10
NORM_TOL = 1e-10

_REQUIRED = ("objectDim", "objectEigenvalues", "initialAmplitudes", "readyState", "timing")
_OPTIONAL = ("name", "description", "checks", "monteCarlo", "illustrativeTiming", "muchLessThanRatio")


class ScenarioError(ValueError):
    """Malformed or invalid scenario input; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class Timing:
    t: float
    delta_t: float
    tau: float

    @property
    def interaction_end(self) -> float:
        return self.t + self.delta_t

    @property
    def reading_end(self) -> float:
        return self.t + self.delta_t + self.tau


@dataclass(frozen=True)
class MonteCarlo:
    trials: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class Scenario:
    object_dim: int
    object_eigenvalues: tuple[float, ...]
    initial_amplitudes: tuple[complex, ...]
    ready_state: int | tuple[complex, ...]
    timing: Timing
    checks: tuple[str, ...] = ()
    monte_carlo: MonteCarlo = field(default_factory=MonteCarlo)
    name: str = ""
    description: str = ""
    illustrative_timing: bool = False
    much_less_than_ratio: float = 10.0

    def __post_init__(self) -> None:
        validate(self)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(abs(c) ** 2 for c in self.initial_amplitudes)

    def psi(self) -> np.ndarray:
        return np.array(self.initial_amplitudes, dtype=np.complex128)

    def ready_vector(self) -> np.ndarray:
        if isinstance(self.ready_state, int):
            return basis_vector(self.object_dim, self.ready_state)
        return np.array(self.ready_state, dtype=np.complex128)

    def model(self) -> MeasurementModel:
        d = self.object_dim
        obs = SpectralObservable.from_eigenbasis(self.object_eigenvalues, [basis_vector(d, n) for n in range(d)])
        return make_model(obs, self.ready_vector())

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, monte_carlo=MonteCarlo(self.monte_carlo.trials, seed))

    def to_dict(self) -> dict[str, Any]:
        """Canonical JSON form; ``parse_scenario(s.to_dict()) == s``."""
        if isinstance(self.ready_state, int):
            ready: dict[str, Any] = {"pointerIndex": self.ready_state}
        else:
            ready = {"amplitudes": [[c.real, c.imag] for c in self.ready_state]}
        return {
            "name": self.name,
            "description": self.description,
            "objectDim": self.object_dim,
            "objectEigenvalues": list(self.object_eigenvalues),
            "initialAmplitudes": [[c.real, c.imag] for c in self.initial_amplitudes],
            "readyState": ready,
            "timing": {"t": self.timing.t, "deltaT": self.timing.delta_t, "tau": self.timing.tau},
            "checks": list(self.checks),
            "monteCarlo": {"trials": self.monte_carlo.trials, "seed": self.monte_carlo.seed},
            "illustrativeTiming": self.illustrative_timing,
            "muchLessThanRatio": self.much_less_than_ratio,
        }


def validate(s: Scenario) -> None:
    """Raise :class:`ScenarioError` on the first violated invariant."""
    d = s.object_dim
    if d < 1:
        raise ScenarioError("must be a positive integer", "objectDim")
    if len(s.object_eigenvalues) != d:
        raise ScenarioError(f"expected {d} eigenvalues, got {len(s.object_eigenvalues)}", "objectEigenvalues")
    if len(set(s.object_eigenvalues)) != d:
        raise ScenarioError("eigenvalues must be pairwise distinct", "objectEigenvalues")
    if not all(math.isfinite(a) for a in s.object_eigenvalues):
        raise ScenarioError("eigenvalues must be finite", "objectEigenvalues")
    _check_amplitudes(s.initial_amplitudes, d, "initialAmplitudes")
    if isinstance(s.ready_state, int):
        if not 0 <= s.ready_state < d:
            raise ScenarioError(f"pointerIndex must be in [0, {d})", "readyState.pointerIndex")
    else:
        _check_amplitudes(s.ready_state, d, "readyState.amplitudes")
    t = s.timing
    if not all(math.isfinite(x) for x in (t.t, t.delta_t, t.tau)):
        raise ScenarioError("times must be finite", "timing")
    if not t.delta_t > 0:
        raise ScenarioError("deltaT must be positive", "timing.deltaT")
    if t.tau < 0:
        raise ScenarioError("tau must be nonnegative", "timing.tau")
    if t.interaction_end == t.t:
        raise ScenarioError("deltaT is below the floating-point resolution of t", "timing.deltaT")
    if t.tau > 0 and t.reading_end == t.interaction_end:
        raise ScenarioError("tau is below the floating-point resolution of t + deltaT", "timing.tau")
    for c in s.checks:
        if c not in CHECK_NAMES:
            raise ScenarioError(f"unknown check name {c!r}", "checks")
    if s.monte_carlo.trials < 1:
        raise ScenarioError("trials must be a positive integer", "monteCarlo.trials")
    if not s.much_less_than_ratio > 0:
        raise ScenarioError("must be positive", "muchLessThanRatio")


def _check_amplitudes(amps: tuple[complex, ...], d: int, where: str) -> None:
    if len(amps) != d:
        raise ScenarioError(f"expected {d} amplitudes, got {len(amps)}", where)
    norm2 = sum(abs(c) ** 2 for c in amps)
    if not math.isfinite(norm2) or abs(norm2 - 1.0) > NORM_TOL:
        raise ScenarioError(f"amplitudes are not normalized (squared norm {norm2!r}); they are never rescaled", where)


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"expected a number, got {v!r}", where)
    return float(v)


def _integer(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"expected an integer, got {v!r}", where)
    return v


def _object(v: Any, where: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(v, dict):
        raise ScenarioError("expected an object", where)
    for k in required:
        if k not in v:
            raise ScenarioError("missing required key", f"{where}.{k}" if where else k)
    for k in v:
        if k not in required and k not in optional:
            raise ScenarioError("unknown key", f"{where}.{k}" if where else k)
    return v


def _complex_list(v: Any, where: str) -> tuple[complex, ...]:
    if not isinstance(v, list):
        raise ScenarioError("expected an array of [re, im] pairs", where)
    out = []
    for i, pair in enumerate(v):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ScenarioError("expected an [re, im] pair", f"{where}[{i}]")
        out.append(complex(_number(pair[0], f"{where}[{i}]"), _number(pair[1], f"{where}[{i}]")))
    return tuple(out)


def parse_scenario(data: Any) -> Scenario:
    """Build a validated :class:`Scenario` from decoded JSON."""
    data = _object(data, "", _REQUIRED, _OPTIONAL)
    d = _integer(data["objectDim"], "objectDim")
    vals = data["objectEigenvalues"]
    if not isinstance(vals, list):
        raise ScenarioError("expected an array of numbers", "objectEigenvalues")
    eigenvalues = tuple(_number(a, f"objectEigenvalues[{i}]") for i, a in enumerate(vals))
    amps = _complex_list(data["initialAmplitudes"], "initialAmplitudes")
    rs = data["readyState"]
    if not isinstance(rs, dict) or len(rs) != 1 or next(iter(rs)) not in ("pointerIndex", "amplitudes"):
        raise ScenarioError('expected {"pointerIndex": k} or {"amplitudes": [...]}', "readyState")
    if "pointerIndex" in rs:
        ready: int | tuple[complex, ...] = _integer(rs["pointerIndex"], "readyState.pointerIndex")
    else:
        ready = _complex_list(rs["amplitudes"], "readyState.amplitudes")
    tm = _object(data["timing"], "timing", ("t", "deltaT", "tau"))
    timing = Timing(_number(tm["t"], "timing.t"), _number(tm["deltaT"], "timing.deltaT"), _number(tm["tau"], "timing.tau"))
    checks = data.get("checks", [])
    if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
        raise ScenarioError("expected an array of check names", "checks")
    mc = _object(data.get("monteCarlo", {}), "monteCarlo", (), ("trials", "seed"))
    monte_carlo = MonteCarlo(
        _integer(mc.get("trials", MonteCarlo.trials), "monteCarlo.trials"),
        _integer(mc.get("seed", MonteCarlo.seed), "monteCarlo.seed"),
    )
    name = data.get("name", "")
    description = data.get("description", "")
    if not isinstance(name, str) or not isinstance(description, str):
        raise ScenarioError("name and description must be strings", "name")
    illustrative = data.get("illustrativeTiming", False)
    if not isinstance(illustrative, bool):
        raise ScenarioError("expected true or false", "illustrativeTiming")
    return Scenario(
        object_dim=d,
        object_eigenvalues=eigenvalues,
        initial_amplitudes=amps,
        ready_state=ready,
        timing=timing,
        checks=tuple(checks),
        monte_carlo=monte_carlo,
        name=name,
        description=description,
        illustrative_timing=illustrative,
        much_less_than_ratio=_number(data.get("muchLessThanRatio", 10.0), "muchLessThanRatio"),
    )


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    return parse_scenario(data)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    p = Path(path)
    return loads_scenario(p.read_text(encoding="utf-8"), str(p))


def load_stock(name: str) -> Scenario:
    """One of the scenarios shipped in ``qmeasure/scenarios``."""
    if name not in STOCK_SCENARIOS:
        raise ScenarioError(f"unknown demo {name!r}; choose from {', '.join(STOCK_SCENARIOS)}")
    text = resources.files("qmeasure").joinpath("scenarios", f"{name}.json").read_text(encoding="utf-8")
    return loads_scenario(text, name)

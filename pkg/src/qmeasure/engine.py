"""Run scenarios: the timing comparison, the numerical checks, and report output."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import bayes
from .hilbert import frobenius, ket, von_neumann_entropy
from .kernel import (
    PROBABILITY_FLOOR,
    MeasurementModel,
    chain_extend,
    conditional_state,
    constraint_residual,
    joint_simultaneous_distribution,
    luders_update,
    nonselective_channel,
    open_system_nonselective,
    pointer_distribution,
    statistical_formula,
    verify_linearity,
    verify_repeatability,
)
from .scenario import Scenario, ScenarioError

RESIDUAL_TOL = 1e-10
TABLE_TOL = 1e-12
ENTROPY_TOL = 1e-8
CLASSICAL_TOL = 1e-14

INTERPRETATIONS = ("new", "orthodox")


def _plain(v: Any) -> Any:
    """Convert numpy scalars to the matching Python types for JSON output."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


@dataclass(frozen=True)
class TimelineEvent:
    time: float
    event: str
    interpretation: str


@dataclass(frozen=True)
class TimingSection:
    timeline: tuple[TimelineEvent, ...]
    ratio: float
    threshold: float
    orthodox_postdates_second_measurement: bool
    scattering_regime: bool
    illustrative: bool

    def reduction_time(self, interpretation: str) -> float:
        for e in self.timeline:
            if e.event == "state-reduction" and e.interpretation == interpretation:
                return e.time
        raise KeyError(interpretation)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ratio": self.ratio,
            "threshold": self.threshold,
            "orthodoxPostdatesSecondMeasurement": self.orthodox_postdates_second_measurement,
            "scatteringRegime": self.scattering_regime,
            "illustrative": self.illustrative,
            "timeline": [
                {"time": e.time, "event": e.event, "interpretation": e.interpretation} for e in self.timeline
            ],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TimingSection":
        return cls(
            timeline=tuple(TimelineEvent(e["time"], e["event"], e["interpretation"]) for e in d["timeline"]),
            ratio=d["ratio"],
            threshold=d["threshold"],
            orthodox_postdates_second_measurement=d["orthodoxPostdatesSecondMeasurement"],
            scattering_regime=d["scatteringRegime"],
            illustrative=d["illustrative"],
        )


@dataclass(frozen=True)
class CheckResult:
    """One check's verdict, its scalar results and an optional data table."""

    name: str
    passed: bool
    values: dict[str, Any]
    header: tuple[str, ...] = ()
    rows: tuple[tuple[Any, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "values", {k: _plain(v) for k, v in self.values.items()})
        object.__setattr__(self, "rows", tuple(tuple(_plain(v) for v in r) for r in self.rows))

    def table(self) -> tuple[tuple[str, ...], tuple[tuple[Any, ...], ...]]:
        if self.header:
            return self.header, self.rows
        return ("metric", "value"), tuple((k, v) for k, v in self.values.items())

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "values": self.values,
            "table": {"header": list(self.header), "rows": [list(r) for r in self.rows]},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CheckResult":
        return cls(
            d["name"],
            d["passed"],
            d["values"],
            tuple(d["table"]["header"]),
            tuple(tuple(r) for r in d["table"]["rows"]),
        )


@dataclass(frozen=True)
class Report:
    scenario: dict[str, Any]
    timing: TimingSection
    checks: tuple[CheckResult, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "timing": self.timing.to_dict(),
            "checks": [c.to_dict() for c in self.checks],
            "allPassed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Report":
        return cls(d["scenario"], TimingSection.from_dict(d["timing"]), tuple(CheckResult.from_dict(c) for c in d["checks"]))


def run_timing_comparison(scenario: Scenario) -> TimingSection:
    """Event timeline under both readings of when state reduction happens.

    The new interpretation reduces the object state when the interaction
    ends, at ``t + deltaT``. The orthodox one reduces it when the pointer
    reading completes, at ``t + deltaT + tau``. A repeated measurement can
    start at ``t + deltaT``. No dynamics is applied between the two times.
    """
    tm = scenario.timing
    t0, t1, t2 = tm.t, tm.interaction_end, tm.reading_end
    events = [
        TimelineEvent(t0, "interaction-start", "new"),
        TimelineEvent(t1, "interaction-end", "new"),
        TimelineEvent(t1, "state-reduction", "new"),
        TimelineEvent(t1, "second-measurement-available", "new"),
        TimelineEvent(t0, "interaction-start", "orthodox"),
        TimelineEvent(t1, "interaction-end", "orthodox"),
        TimelineEvent(t1, "second-measurement-available", "orthodox"),
        TimelineEvent(t2, "pointer-reading-complete", "orthodox"),
        TimelineEvent(t2, "state-reduction", "orthodox"),
    ]
    # stable sort keeps the causal order listed above within equal keys
    events.sort(key=lambda e: (e.time, INTERPRETATIONS.index(e.interpretation)))
    ratio = tm.tau / tm.delta_t
    return TimingSection(
        timeline=tuple(events),
        ratio=ratio,
        threshold=scenario.much_less_than_ratio,
        orthodox_postdates_second_measurement=tm.tau > 0,
        scattering_regime=ratio >= scenario.much_less_than_ratio,
        illustrative=scenario.illustrative_timing,
    )


def _check_constraint(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    r = constraint_residual(model)
    return CheckResult("constraint", r <= RESIDUAL_TOL, {"residual": r, "tolerance": RESIDUAL_TOL})


def _check_linearity(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    r = verify_linearity(model, psi)
    return CheckResult("linearity", r <= RESIDUAL_TOL, {"residual": r, "tolerance": RESIDUAL_TOL})


def _check_pointer_distribution(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    p = pointer_distribution(model, psi).as_array()
    born = np.abs(psi) ** 2
    stat = statistical_formula(model.object_observable, ket(psi)).as_array()
    dev_born = float(np.max(np.abs(p - born)))
    dev_stat = float(np.max(np.abs(p - stat)))
    rows = tuple((n, float(p[n]), float(born[n])) for n in range(len(p)))
    return CheckResult(
        "pointer-distribution",
        dev_born <= RESIDUAL_TOL and dev_stat <= RESIDUAL_TOL,
        {"maxDeviationFromAmplitudes": dev_born, "maxDeviationFromStatisticalFormula": dev_stat, "tolerance": RESIDUAL_TOL},
        ("outcome", "probability", "expected"),
        rows,
    )


def _check_joint(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    joint = joint_simultaneous_distribution(model, psi)
    t = joint.as_array()
    off = joint.off_diagonal_mass()
    diag_dev = float(np.max(np.abs(np.diag(t) - np.abs(psi) ** 2)))
    rows = tuple((n, m, float(t[n, m])) for n in range(t.shape[0]) for m in range(t.shape[1]))
    return CheckResult(
        "joint-distribution",
        off <= TABLE_TOL and diag_dev <= TABLE_TOL,
        {"offDiagonalMass": off, "maxDiagonalDeviation": diag_dev, "tolerance": TABLE_TOL},
        ("pointer_outcome", "second_outcome", "probability"),
        rows,
    )


def _check_conditional(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    rho = ket(psi)
    sigma = ket(model.ready_state)
    p = pointer_distribution(model, psi).as_array()
    rows = []
    worst = 0.0
    for n, phi in enumerate(model.object_eigenvectors):
        if p[n] <= PROBABILITY_FLOOR:
            continue
        cond = conditional_state(model, rho, sigma, n)
        d_luders = frobenius(cond - luders_update(model.object_observable, rho, n))
        d_eig = frobenius(cond - ket(phi))
        worst = max(worst, d_luders, d_eig)
        rows.append((n, float(p[n]), d_luders, d_eig))
    return CheckResult(
        "conditional-state",
        worst <= RESIDUAL_TOL,
        {"maxFrobeniusDeviation": worst, "tolerance": RESIDUAL_TOL},
        ("outcome", "probability", "frobenius_vs_luders", "frobenius_vs_eigenstate"),
        tuple(rows),
    )


def _check_chain(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    chain = chain_extend(model)
    final_res = float(np.linalg.norm(chain.final_state(psi) - chain.expected_final_state(psi)))
    table = chain.outcome_table(psi)
    d = model.object_dim
    support = sum(table[n, n, n] for n in range(d))
    off = float(table.sum() - support)
    marginal_dev = float(
        np.max(np.abs(chain.second_pointer_distribution(psi).as_array() - pointer_distribution(model, psi).as_array()))
    )
    rows = tuple((k, n, m, float(table[k, n, m])) for k in range(d) for n in range(d) for m in range(d))
    return CheckResult(
        "chain",
        final_res <= RESIDUAL_TOL and off <= TABLE_TOL and marginal_dev <= RESIDUAL_TOL,
        {
            "finalStateResidual": final_res,
            "offSupportMass": off,
            "marginalDeviation": marginal_dev,
            "tolerance": RESIDUAL_TOL,
            "tableTolerance": TABLE_TOL,
        },
        ("second_pointer", "first_pointer", "object_outcome", "probability"),
        rows,
    )


def _check_repeatability(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    mc = s.monte_carlo
    rep = verify_repeatability(model, psi, mc.trials, mc.seed)
    inside = rep.within_sigma(3.0)
    rows = tuple(
        (n, rep.first_outcome_counts[n], rep.frequencies[n], rep.expected_probabilities[n], inside[n])
        for n in range(model.object_dim)
    )
    return CheckResult(
        "repeatability-montecarlo",
        rep.agreements == rep.trials,
        {"agreements": rep.agreements, "trials": rep.trials, "seed": mc.seed, "allWithinThreeSigma": all(inside)},
        ("outcome", "count", "frequency", "expected", "within_3sigma"),
        rows,
    )


def _check_entropy(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    rho = ket(psi)
    before = von_neumann_entropy(rho)
    after = von_neumann_entropy(nonselective_channel(model.object_observable, rho))
    p = np.abs(psi) ** 2
    p = p[p > 0]
    shannon = float(-np.sum(p * np.log(p)))
    ok = after >= before - ENTROPY_TOL and abs(after - shannon) <= ENTROPY_TOL
    return CheckResult(
        "entropy",
        ok,
        {"entropyBefore": before, "entropyAfter": after, "increase": after - before, "expectedAfter": shannon, "tolerance": ENTROPY_TOL},
    )


def _check_bayes(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    # classical joint: X = second A outcome (columns of the quantum table), Y = pointer reading
    t = joint_simultaneous_distribution(model, psi).as_array().T
    labels = [str(n) for n in range(model.object_dim)]
    joint = bayes.ClassicalJoint.from_array(t / t.sum(), labels, labels)
    classical = float(np.max(np.abs(bayes.classical_nonselective(joint).as_array() - bayes.prior(joint).as_array())))
    rho = ket(psi)
    quantum = frobenius(nonselective_channel(model.object_observable, rho) - rho)
    return CheckResult(
        "bayes-contrast",
        classical <= CLASSICAL_TOL,
        {"classicalChange": classical, "quantumChange": quantum, "tolerance": CLASSICAL_TOL},
    )


def _check_open_system(s: Scenario, model: MeasurementModel, psi: np.ndarray) -> CheckResult:
    reduced = open_system_nonselective(model, psi)
    channel = nonselective_channel(model.object_observable, ket(psi))
    mixture = sum(abs(np.vdot(phi, psi)) ** 2 * ket(phi) for phi in model.object_eigenvectors)
    d_channel = frobenius(reduced - channel)
    d_mix = frobenius(reduced - mixture)
    return CheckResult(
        "open-system",
        d_channel <= RESIDUAL_TOL and d_mix <= RESIDUAL_TOL,
        {"frobeniusVsChannel": d_channel, "frobeniusVsMixture": d_mix, "tolerance": RESIDUAL_TOL},
    )


CHECKS: dict[str, Callable[[Scenario, MeasurementModel, np.ndarray], CheckResult]] = {
    "constraint": _check_constraint,
    "linearity": _check_linearity,
    "pointer-distribution": _check_pointer_distribution,
    "joint-distribution": _check_joint,
    "conditional-state": _check_conditional,
    "chain": _check_chain,
    "repeatability-montecarlo": _check_repeatability,
    "entropy": _check_entropy,
    "bayes-contrast": _check_bayes,
    "open-system": _check_open_system,
}


def run_checks(scenario: Scenario) -> Report:
    """Timing comparison plus every requested check, in the order listed."""
    for name in scenario.checks:
        if name not in CHECKS:
            raise ScenarioError(f"unknown check name {name!r}", "checks")
    model = scenario.model()
    psi = scenario.psi()
    results = tuple(CHECKS[name](scenario, model, psi) for name in scenario.checks)
    return Report(scenario.to_dict(), run_timing_comparison(scenario), results)


def _fmt(v: Any, digits: bool = True) -> str:
    """CSV cell: 17 significant digits for floats; ``digits=False`` gives the shortest repr."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g") if digits else repr(v)
    return str(v)


def _short(v: Any) -> str:
    return _fmt(v, digits=False)


def _text(report: Report) -> str:
    s = report.scenario
    tm = report.timing
    lines = [
        f"scenario: {s['name'] or '(unnamed)'}",
        f"object levels: {s['objectDim']}",
        f"timing: t={_short(s['timing']['t'])} deltaT={_short(s['timing']['deltaT'])} tau={_short(s['timing']['tau'])}"
        + (" (illustrative values)" if tm.illustrative else ""),
        f"tau/deltaT: {_short(tm.ratio)}",
        f"orthodox reduction postdates second measurement: {'yes' if tm.orthodox_postdates_second_measurement else 'no'}",
        f"deltaT << tau (ratio >= {_short(tm.threshold)}): {'yes' if tm.scattering_regime else 'no'}",
        "",
        "timeline:",
    ]
    lines += [f"  {_short(e.time):>24}  {e.interpretation:<8}  {e.event}" for e in tm.timeline]
    if report.checks:
        lines += ["", "checks:"]
        for c in report.checks:
            detail = " ".join(f"{k}={_short(v)}" for k, v in c.values.items())
            lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}: {detail}")
        lines += ["", f"result: {'PASS' if report.passed else 'FAIL'}"]
    return "\n".join(lines) + "\n"


def _csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")

    def section(title: str, header: tuple, rows: tuple) -> None:
        w.writerow([f"# {title}"])
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        w.writerow([])

    tm = report.timing
    section(
        "timeline",
        ("time", "event", "interpretation"),
        tuple((e.time, e.event, e.interpretation) for e in tm.timeline),
    )
    section(
        "timing",
        ("metric", "value"),
        (
            ("ratio", tm.ratio),
            ("threshold", tm.threshold),
            ("orthodox_postdates_second_measurement", tm.orthodox_postdates_second_measurement),
            ("scattering_regime", tm.scattering_regime),
            ("illustrative", tm.illustrative),
        ),
    )
    if report.checks:
        section("summary", ("check", "passed"), tuple((c.name, c.passed) for c in report.checks))
    for c in report.checks:
        header, rows = c.table()
        section(f"check: {c.name}", header, rows)
    return buf.getvalue()


def emit_report(report: Report, fmt: str = "text") -> bytes:
    """Serialize a report as ``text``, ``csv`` or ``json`` (UTF-8, ``\\n`` line endings)."""
    if fmt == "text":
        out = _text(report)
    elif fmt == "csv":
        out = _csv(report)
    elif fmt == "json":
        out = json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"
    else:
        raise ValueError(f"unsupported format {fmt!r}; use text, csv or json")
    return out.encode("utf-8")


def load_report(data: bytes | str) -> Report:
    """Inverse of ``emit_report(..., "json")``."""
    return Report.from_dict(json.loads(data))

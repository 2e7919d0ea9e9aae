import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmeasure import engine
from qmeasure.engine import (
    CheckResult,
    emit_report,
    load_report,
    run_checks,
    run_timing_comparison,
)
from qmeasure.hilbert import frobenius, ket
from qmeasure.kernel import constraint_residual, verify_linearity, verify_repeatability
from qmeasure.scenario import CHECK_NAMES, load_stock, parse_scenario

HALF = 0.7071067811865476


def scenario(checks=(), tau=0.0, delta_t=1.0, t=0.0, amps=((HALF, 0.0), (HALF, 0.0)), **extra):
    d = len(amps)
    data = {
        "name": "test",
        "objectDim": d,
        "objectEigenvalues": [float(k) for k in range(d)],
        "initialAmplitudes": [list(a) for a in amps],
        "readyState": {"pointerIndex": 0},
        "timing": {"t": t, "deltaT": delta_t, "tau": tau},
        "checks": list(checks),
        "monteCarlo": {"trials": 10_000, "seed": 42},
    }
    data.update(extra)
    return parse_scenario(data)


# --- timing --------------------------------------------------------------------


def test_timing_tau_zero():
    sec = run_timing_comparison(scenario(tau=0.0, t=2.0, delta_t=0.5))
    assert sec.reduction_time("new") == 2.5
    assert sec.reduction_time("orthodox") == 2.5
    assert not sec.orthodox_postdates_second_measurement
    assert sec.ratio == 0.0


def test_timing_scattering_regime():
    sec = run_timing_comparison(scenario(delta_t=1e-9, tau=1e-3))
    assert sec.ratio == pytest.approx(1e6, rel=1e-12)
    assert sec.orthodox_postdates_second_measurement
    assert sec.scattering_regime
    assert sec.reduction_time("orthodox") == 0.0 + 1e-9 + 1e-3
    assert sec.reduction_time("new") == 1e-9


def test_timing_equal_durations():
    sec = run_timing_comparison(scenario(delta_t=1.0, tau=1.0))
    assert sec.ratio == 1.0
    assert not sec.scattering_regime
    assert sec.orthodox_postdates_second_measurement


def test_timing_threshold_configurable():
    assert run_timing_comparison(scenario(delta_t=1.0, tau=5.0, muchLessThanRatio=5.0)).scattering_regime
    assert not run_timing_comparison(scenario(delta_t=1.0, tau=5.0)).scattering_regime


def test_timeline_events_and_ties():
    sec = run_timing_comparison(scenario(delta_t=1.0, tau=2.0))
    assert [(e.time, e.interpretation, e.event) for e in sec.timeline] == [
        (0.0, "new", "interaction-start"),
        (0.0, "orthodox", "interaction-start"),
        (1.0, "new", "interaction-end"),
        (1.0, "new", "state-reduction"),
        (1.0, "new", "second-measurement-available"),
        (1.0, "orthodox", "interaction-end"),
        (1.0, "orthodox", "second-measurement-available"),
        (3.0, "orthodox", "pointer-reading-complete"),
        (3.0, "orthodox", "state-reduction"),
    ]


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-1e3, 1e3, allow_nan=False),
    st.floats(1e-12, 1e3, allow_nan=False),
    st.one_of(st.just(0.0), st.floats(1e-6, 1e3, allow_nan=False)),
)
def test_timeline_ordering_property(t, delta_t, tau):
    sec = run_timing_comparison(scenario(t=t, delta_t=delta_t, tau=tau))
    keys = [(e.time, e.interpretation) for e in sec.timeline]
    assert keys == sorted(keys)
    new, orth = sec.reduction_time("new"), sec.reduction_time("orthodox")
    assert orth >= new
    assert (orth == new) == (tau == 0.0)


# --- checks --------------------------------------------------------------------


def test_constraint_check_canonical():
    c = run_checks(scenario(["constraint"])).check("constraint")
    assert c.passed and c.values["residual"] <= 1e-12


def test_joint_distribution_check_table():
    c = run_checks(scenario(["joint-distribution"])).check("joint-distribution")
    assert c.passed
    table = {(n, m): p for n, m, p in c.rows}
    assert table[(0, 0)] == pytest.approx(0.5, abs=1e-15)
    assert table[(1, 1)] == pytest.approx(0.5, abs=1e-15)
    assert table[(0, 1)] == 0.0 and table[(1, 0)] == 0.0


def test_repeatability_check():
    c = run_checks(scenario(["repeatability-montecarlo"])).check("repeatability-montecarlo")
    assert c.passed
    assert c.values["agreements"] == c.values["trials"] == 10_000
    counts = [r[1] for r in c.rows]
    assert sum(counts) == 10_000
    assert abs(counts[0] / 10_000 - 0.5) <= 3 * np.sqrt(0.25 / 10_000)


def test_all_checks_pass_on_generic_state():
    amps = ((0.5, 0.0), (0.5, 0.5), (0.0, 0.5))
    report = run_checks(scenario(CHECK_NAMES, tau=1.0, amps=amps, readyState={"amplitudes": [[0.6, 0], [0, 0.8], [0, 0]]}))
    assert [c.name for c in report.checks] == list(CHECK_NAMES)
    assert report.passed, [c for c in report.checks if not c.passed]


def test_residuals_equal_kernel_outputs():
    s = scenario(["constraint", "linearity", "repeatability-montecarlo"], amps=((0.6, 0.0), (0.0, 0.8)))
    report = run_checks(s)
    model, psi = s.model(), s.psi()
    assert report.check("constraint").values["residual"] == constraint_residual(model)
    assert report.check("linearity").values["residual"] == verify_linearity(model, psi)
    rep = verify_repeatability(model, psi, 10_000, 42)
    assert tuple(r[1] for r in report.check("repeatability-montecarlo").rows) == rep.first_outcome_counts


def test_bayes_contrast_values():
    c = run_checks(scenario(["bayes-contrast"])).check("bayes-contrast")
    assert c.passed
    assert c.values["classicalChange"] <= 1e-14
    assert c.values["quantumChange"] == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_entropy_check_values():
    c = run_checks(scenario(["entropy"])).check("entropy")
    assert c.values["entropyBefore"] == pytest.approx(0.0, abs=1e-12)
    assert c.values["entropyAfter"] == pytest.approx(np.log(2), abs=1e-8)


def test_conditional_state_skips_null_outcomes():
    c = run_checks(scenario(["conditional-state"], amps=((1.0, 0.0), (0.0, 0.0)))).check("conditional-state")
    assert c.passed
    assert [r[0] for r in c.rows] == [0]


# --- report output ------------------------------------------------------------


def test_text_empty_checks_is_header_and_timeline():
    text = emit_report(run_checks(scenario()), "text").decode()
    assert "timeline:" in text
    assert "checks:" not in text
    assert text.startswith("scenario: test\n")


def test_text_lists_checks():
    text = emit_report(run_checks(scenario(["constraint", "linearity"])), "text").decode()
    assert "[PASS] constraint" in text and "[PASS] linearity" in text
    assert text.endswith("result: PASS\n")


def _csv_sections(data: bytes) -> dict:
    sections, current = {}, None
    for row in csv.reader(io.StringIO(data.decode())):
        if not row:
            current = None
        elif row[0].startswith("# "):
            current = row[0][2:]
            sections[current] = []
        else:
            sections[current].append(row)
    return sections


def test_csv_joint_distribution_rows():
    report = run_checks(scenario(["joint-distribution"]))
    data = emit_report(report, "csv")
    assert b"\r" not in data
    sec = _csv_sections(data)["check: joint-distribution"]
    assert sec[0] == ["pointer_outcome", "second_outcome", "probability"]
    p00 = report.check("joint-distribution").rows[0][2]
    assert sec[1] == ["0", "0", format(p00, ".17g")]
    assert sec[2] == ["0", "1", "0"]
    assert len(sec) == 5


def test_csv_floats_have_17_digits():
    report = run_checks(scenario(["entropy"]))
    rows = dict((r[0], r[1]) for r in _csv_sections(emit_report(report, "csv"))["check: entropy"][1:])
    after = report.check("entropy").values["entropyAfter"]
    assert rows["entropyAfter"] == format(after, ".17g")
    assert len(rows["entropyAfter"].replace(".", "").lstrip("0")) == 17
    # 17 significant digits always round-trip exactly
    assert float(rows["entropyAfter"]) == after


def test_csv_every_check_has_a_table():
    data = emit_report(run_checks(scenario(CHECK_NAMES)), "csv")
    sections = _csv_sections(data)
    for name in CHECK_NAMES:
        assert f"check: {name}" in sections
    assert sections["timeline"][0] == ["time", "event", "interpretation"]


def test_json_round_trip_byte_identical():
    report = run_checks(scenario(CHECK_NAMES, tau=3.0))
    data = emit_report(report, "json")
    again = load_report(data)
    assert emit_report(again, "json") == data
    assert emit_report(again, "csv") == emit_report(report, "csv")
    assert emit_report(again, "text") == emit_report(report, "text")
    assert json.loads(data)["allPassed"] is True


@pytest.mark.parametrize("fmt", ["text", "csv", "json"])
def test_reports_deterministic(fmt):
    s = load_stock("two-level")
    assert emit_report(run_checks(s), fmt) == emit_report(run_checks(s), fmt)


def test_unsupported_format():
    with pytest.raises(ValueError, match="unsupported"):
        emit_report(run_checks(scenario()), "xml")


def test_failed_check_marks_report(monkeypatch):
    monkeypatch.setitem(engine.CHECKS, "constraint", lambda s, m, p: CheckResult("constraint", False, {"residual": 1.0}))
    report = run_checks(scenario(["constraint", "linearity"]))
    assert not report.passed
    assert "[FAIL] constraint" in emit_report(report, "text").decode()


def test_check_result_converts_numpy_scalars():
    c = CheckResult("x", np.bool_(True), {"a": np.float64(0.5), "b": np.int64(3)}, ("k",), ((np.int64(1),),))
    assert type(c.passed) is bool and type(c.values["a"]) is float and type(c.rows[0][0]) is int


def test_open_system_values_match_kernel():
    s = scenario(["open-system"], amps=((0.6, 0.0), (0.0, 0.8)))
    c = run_checks(s).check("open-system")
    from qmeasure.kernel import nonselective_channel, open_system_nonselective

    model, psi = s.model(), s.psi()
    expected = frobenius(open_system_nonselective(model, psi) - nonselective_channel(model.object_observable, ket(psi)))
    assert c.values["frobeniusVsChannel"] == expected

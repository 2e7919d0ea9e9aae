import json

import pytest

from qmeasure.scenario import (
    STOCK_SCENARIOS,
    Scenario,
    ScenarioError,
    load_scenario,
    load_stock,
    loads_scenario,
    parse_scenario,
)


def minimal(**overrides):
    data = {
        "objectDim": 2,
        "objectEigenvalues": [1.0, -1.0],
        "initialAmplitudes": [[1.0, 0.0], [0.0, 0.0]],
        "readyState": {"pointerIndex": 0},
        "timing": {"t": 0.0, "deltaT": 1.0, "tau": 0.5},
    }
    data.update(overrides)
    return data


def write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return p


def test_minimal_file(tmp_path):
    s = load_scenario(write(tmp_path, minimal()))
    assert s.object_dim == 2
    assert s.object_eigenvalues == (1.0, -1.0)
    assert s.ready_state == 0
    assert s.checks == ()
    assert s.monte_carlo.trials >= 1


def test_zero_delta_t(tmp_path):
    with pytest.raises(ScenarioError, match="deltaT must be positive") as e:
        load_scenario(write(tmp_path, minimal(timing={"t": 0.0, "deltaT": 0.0, "tau": 1.0})))
    assert e.value.field == "timing.deltaT"


def test_amplitudes_point_six_point_eight(tmp_path):
    s = load_scenario(write(tmp_path, minimal(initialAmplitudes=[[0.6, 0.0], [0.8, 0.0]])))
    assert s.probabilities == pytest.approx((0.36, 0.64), abs=1e-15)


def test_unnormalized_amplitudes_refused():
    with pytest.raises(ScenarioError, match="never rescaled") as e:
        parse_scenario(minimal(initialAmplitudes=[[0.6, 0.0], [0.7, 0.0]]))
    assert e.value.field == "initialAmplitudes"


def test_complex_amplitudes():
    s = parse_scenario(minimal(initialAmplitudes=[[0.0, 0.6], [0.8, 0.0]]))
    assert s.initial_amplitudes == (0.6j, 0.8 + 0j)


def test_parse_error_reports_line(tmp_path):
    text = '{\n  "objectDim": 2,\n  "objectEigenvalues": [1, 2\n}'
    with pytest.raises(ScenarioError, match="line 4"):
        load_scenario(write(tmp_path, text))


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"objectDim": 0}, "objectDim"),
        ({"objectDim": "2"}, "objectDim"),
        ({"objectEigenvalues": [1.0, 1.0]}, "objectEigenvalues"),
        ({"objectEigenvalues": [1.0]}, "objectEigenvalues"),
        ({"objectEigenvalues": [1.0, True]}, "objectEigenvalues[1]"),
        ({"initialAmplitudes": [[1.0, 0.0]]}, "initialAmplitudes"),
        ({"initialAmplitudes": [[1.0], [0.0, 0.0]]}, "initialAmplitudes[0]"),
        ({"readyState": {"pointerIndex": 2}}, "readyState.pointerIndex"),
        ({"readyState": {"pointerIndex": 0, "amplitudes": []}}, "readyState"),
        ({"readyState": {"amplitudes": [[1.0, 0.0], [1.0, 0.0]]}}, "readyState.amplitudes"),
        ({"timing": {"t": 0.0, "deltaT": 1.0, "tau": -1.0}}, "timing.tau"),
        ({"timing": {"t": 0.0, "deltaT": -1.0, "tau": 1.0}}, "timing.deltaT"),
        ({"timing": {"t": 0.0, "deltaT": 1.0}}, "timing.tau"),
        ({"timing": {"t": 1e20, "deltaT": 1.0, "tau": 0.0}}, "timing.deltaT"),
        ({"timing": {"t": 0.0, "deltaT": 1.0, "tau": 1e-20}}, "timing.tau"),
        ({"checks": ["constraint", "nope"]}, "checks"),
        ({"checks": "constraint"}, "checks"),
        ({"monteCarlo": {"trials": 0, "seed": 1}}, "monteCarlo.trials"),
        ({"monteCarlo": {"trials": 10, "seed": 1.5}}, "monteCarlo.seed"),
        ({"monteCarlo": {"trials": 10, "seeds": 1}}, "monteCarlo.seeds"),
        ({"extra": 1}, "extra"),
        ({"illustrativeTiming": "yes"}, "illustrativeTiming"),
        ({"muchLessThanRatio": 0}, "muchLessThanRatio"),
    ],
)
def test_invalid_fields(overrides, field):
    with pytest.raises(ScenarioError) as e:
        parse_scenario(minimal(**overrides))
    assert e.value.field == field


def test_missing_required_key():
    data = minimal()
    del data["timing"]
    with pytest.raises(ScenarioError) as e:
        parse_scenario(data)
    assert e.value.field == "timing"


def test_top_level_must_be_object():
    with pytest.raises(ScenarioError):
        loads_scenario("[1, 2]")


def test_explicit_ready_state():
    s = parse_scenario(minimal(readyState={"amplitudes": [[0.6, 0.0], [0.0, 0.8]]}))
    assert s.ready_state == (0.6 + 0j, 0.8j)
    model = s.model()
    assert model.ready_state.tolist() == [0.6, 0.8j]


def test_to_dict_round_trip():
    s = parse_scenario(minimal(checks=["constraint"], monteCarlo={"trials": 5, "seed": -3}, name="x"))
    assert parse_scenario(s.to_dict()) == s
    assert parse_scenario(json.loads(json.dumps(s.to_dict()))) == s


def test_with_seed():
    s = parse_scenario(minimal(monteCarlo={"trials": 5, "seed": 1}))
    assert s.with_seed(9).monte_carlo.seed == 9
    assert s.with_seed(9).monte_carlo.trials == 5


def test_direct_construction_validates():
    s = parse_scenario(minimal())
    with pytest.raises(ScenarioError, match="unknown check"):
        Scenario(s.object_dim, s.object_eigenvalues, s.initial_amplitudes, 0, s.timing, checks=("bogus",))


@pytest.mark.parametrize("name", STOCK_SCENARIOS)
def test_stock_scenarios_load(name):
    s = load_stock(name)
    assert s.name == name
    assert s.checks


def test_atom_beam_stock_values():
    s = load_stock("atom-beam-timing")
    assert (s.timing.delta_t, s.timing.tau) == (1e-9, 1e-3)
    assert s.illustrative_timing


def test_unknown_stock():
    with pytest.raises(ScenarioError, match="unknown demo"):
        load_stock("nope")

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmeasure.bayes import (
    ClassicalJoint,
    classical_nonselective,
    posterior,
    prior,
    quantum_contrast,
    random_joint,
)
from qmeasure.kernel import NullEventError

TABLE = [[0.1, 0.2], [0.3, 0.4]]


def product_joint():
    p = np.array([0.2, 0.5, 0.3])
    q = np.array([0.6, 0.4])
    return ClassicalJoint.from_array(np.outer(p, q)), p


def test_prior_of_product_is_first_factor():
    joint, p = product_joint()
    assert np.allclose(prior(joint).as_array(), p, atol=1e-15)


def test_prior_uniform():
    assert prior(ClassicalJoint.from_array(np.full((2, 2), 0.25))).probabilities == (0.5, 0.5)


def test_prior_row_sums():
    assert prior(ClassicalJoint.from_array(TABLE)).as_array() == pytest.approx([0.3, 0.7], abs=1e-15)


def test_posterior_of_product_equals_prior():
    joint, p = product_joint()
    for y in joint.y_values:
        assert np.allclose(posterior(joint, y).as_array(), p, atol=1e-15)


def test_posterior_correlated_point_mass():
    joint = ClassicalJoint.from_array(np.diag([0.3, 0.7]), ["a", "b"], ["left", "right"])
    assert posterior(joint, "right").probabilities == (0.0, 1.0)


def test_posterior_column_normalization():
    joint = ClassicalJoint.from_array(TABLE)
    assert posterior(joint, "y1").as_array() == pytest.approx([1 / 3, 2 / 3], abs=1e-15)


def test_posterior_null_column():
    joint = ClassicalJoint.from_array([[0.5, 0.0], [0.5, 0.0]])
    with pytest.raises(NullEventError):
        posterior(joint, "y1")


def test_nonselective_examples():
    joint, p = product_joint()
    assert np.allclose(classical_nonselective(joint).as_array(), p, atol=1e-15)
    diag = ClassicalJoint.from_array(np.diag([0.25, 0.75]))
    assert classical_nonselective(diag).as_array() == pytest.approx([0.25, 0.75], abs=1e-15)


def test_nonselective_with_null_column():
    joint = ClassicalJoint.from_array([[0.5, 0.0], [0.5, 0.0]])
    assert classical_nonselective(joint).probabilities == prior(joint).probabilities


def test_nonselective_random_four_by_four(rng):
    joint = random_joint(4, 4, rng)
    # total probability: sum_y Pr{Y=y} Pr{X=x|Y=y} = Pr{X=x}
    diff = classical_nonselective(joint).as_array() - prior(joint).as_array()
    assert np.max(np.abs(diff)) <= 1e-14


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_nonselective_equals_prior_property(seed, r, c):
    joint = random_joint(r, c, np.random.default_rng(seed))
    assert np.max(np.abs(classical_nonselective(joint).as_array() - prior(joint).as_array())) <= 1e-14
    for y in joint.y_values:
        post = posterior(joint, y).as_array()
        assert np.all(post >= 0) and abs(post.sum() - 1) <= 1e-12


def test_quantum_contrast_example():
    assert quantum_contrast() > 0.5
    assert quantum_contrast() == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert quantum_contrast(4) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize(
    "table",
    [
        [[0.5, 0.6]],
        [[-0.1, 1.1]],
        [[float("nan"), 1.0]],
    ],
)
def test_joint_validation(table):
    with pytest.raises(ValueError):
        ClassicalJoint.from_array(table)


def test_joint_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        ClassicalJoint.from_array(TABLE, ["a", "a"], ["p", "q"])

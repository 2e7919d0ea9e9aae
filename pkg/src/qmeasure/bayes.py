"""Classical Bayes updating on a discrete joint table, and its quantum contrast.

Reading ``Y`` and then forgetting the result leaves the distribution of
``X`` untouched (law of total probability). The quantum nonselective
channel, by contrast, changes a superposition into a mixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .hilbert import SpectralObservable, basis_vector, frobenius, ket
from .kernel import NullEventError, OutcomeDistribution, nonselective_channel

NULL_COLUMN_FLOOR = 1e-12


@dataclass(frozen=True)
class ClassicalJoint:
    """``Pr{X = x, Y = y}`` with rows indexed by ``x_values`` and columns by ``y_values``."""

    x_values: tuple[str, ...]
    y_values: tuple[str, ...]
    table: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=float)
        if t.shape != (len(self.x_values), len(self.y_values)):
            raise ValueError(f"table shape {t.shape} does not match labels")
        if len(set(self.x_values)) != len(self.x_values) or len(set(self.y_values)) != len(self.y_values):
            raise ValueError("labels must be unique")
        if not np.all(np.isfinite(t)) or np.any(t < 0.0):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(t.sum() - 1.0) > 1e-12:
            raise ValueError(f"joint probabilities sum to {t.sum()!r}, not 1")

    @classmethod
    def from_array(
        cls,
        table: ArrayLike,
        x_values: Sequence[str] | None = None,
        y_values: Sequence[str] | None = None,
    ) -> "ClassicalJoint":
        t = np.asarray(table, dtype=float)
        xs = tuple(x_values) if x_values is not None else tuple(f"x{i}" for i in range(t.shape[0]))
        ys = tuple(y_values) if y_values is not None else tuple(f"y{j}" for j in range(t.shape[1]))
        return cls(xs, ys, tuple(tuple(float(v) for v in row) for row in t))

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.table, dtype=float)


def prior(joint: ClassicalJoint) -> OutcomeDistribution:
    """Marginal of ``X``."""
    return OutcomeDistribution(joint.x_values, tuple(joint.as_array().sum(axis=1)))


def posterior(joint: ClassicalJoint, y: str) -> OutcomeDistribution:
    """Conditional distribution of ``X`` given ``Y = y``."""
    col = joint.as_array()[:, joint.y_values.index(y)]
    total = col.sum()
    if total <= NULL_COLUMN_FLOOR:
        raise NullEventError(f"conditioning on null column {y!r} (probability {total:.3e})")
    return OutcomeDistribution(joint.x_values, tuple(col / total))


def classical_nonselective(joint: ClassicalJoint) -> OutcomeDistribution:
    """Distribution of ``X`` after reading ``Y`` and discarding the result.

    Built as the mixture ``sum_y Pr{Y=y} Pr{X=.|Y=y}`` over non-null columns.
    """
    t = joint.as_array()
    out = np.zeros(t.shape[0])
    for j, y in enumerate(joint.y_values):
        w = t[:, j].sum()
        if w > NULL_COLUMN_FLOOR:
            out += w * posterior(joint, y).as_array()
        else:
            out += t[:, j]
    return OutcomeDistribution(joint.x_values, tuple(out))


def random_joint(rows: int, cols: int, rng: np.random.Generator) -> ClassicalJoint:
    t = rng.random((rows, cols))
    return ClassicalJoint.from_array(t / t.sum())


def quantum_contrast(dim: int = 2) -> float:
    """Frobenius distance the nonselective channel moves ``(phi_1 + phi_2)/sqrt(2)``.

    The observable is diagonal in the computational basis; the expected
    value is ``1/sqrt(2)`` for any ``dim >= 2``.
    """
    obs = SpectralObservable.from_eigenbasis(range(1, dim + 1), [basis_vector(dim, n) for n in range(dim)])
    psi = (basis_vector(dim, 0) + basis_vector(dim, 1)) / np.sqrt(2.0)
    rho = ket(psi)
    return frobenius(nonselective_channel(obs, rho) - rho)

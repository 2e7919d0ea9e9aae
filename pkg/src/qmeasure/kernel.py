"""Measurement models: measuring unitaries, state-change rules and their checks.

A model couples an object observable ``A = sum_n a_n |phi_n><phi_n|`` to an
apparatus prepared in a ready state ``xi``. The measuring unitary ``U`` is
required to send ``phi_n ⊗ xi`` to ``phi_n ⊗ xi_n``, where ``xi_n`` is the
pointer eigenvector that reads ``a_n``. Everything else in this module is
computed from ``U`` and the postulates for projective measurements.

Outcome indices are 0-based positions in the object observable's
eigenvalue list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .hilbert import (
    DEFAULT_TOL,
    ComplexMatrix,
    ComplexVector,
    DimensionError,
    SpectralObservable,
    ValidityError,
    as_density,
    as_state,
    basis_vector,
    is_unitary,
    ket,
    partial_trace_apparatus,
    random_state,
    random_unitary,
    tensor_vec,
)

PROBABILITY_FLOOR = 1e-12
PROBABILITY_SLACK = 1e-12


class NullEventError(ValueError):
    """Conditioning on an outcome whose probability is at or below the floor."""


def _check_probabilities(p: NDArray[np.float64], what: str) -> NDArray[np.float64]:
    # roundoff below zero or above one is clamped; anything larger is a bug
    if np.any(p < -PROBABILITY_SLACK) or np.any(p > 1.0 + PROBABILITY_SLACK):
        raise ValidityError(f"{what} outside [0, 1] beyond roundoff: {p!r}")
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True)
class OutcomeDistribution:
    outcomes: tuple
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.outcomes) != len(self.probabilities):
            raise DimensionError("outcomes and probabilities differ in length")
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -PROBABILITY_SLACK) or abs(p.sum() - 1.0) > 1e-10:
            raise ValidityError(f"not a probability distribution: {self.probabilities!r}")

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.probabilities, dtype=float)


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Joint outcome table; rows index the first variable, columns the second."""

    row_outcomes: tuple
    col_outcomes: tuple
    table: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        t = self.as_array()
        if t.shape != (len(self.row_outcomes), len(self.col_outcomes)):
            raise DimensionError("table shape does not match outcome lists")
        if np.any(t < -PROBABILITY_SLACK) or abs(t.sum() - 1.0) > 1e-10:
            raise ValidityError("joint table is not a probability distribution")

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.table, dtype=float)

    def off_diagonal_mass(self) -> float:
        t = self.as_array()
        return float(t.sum() - np.trace(t))


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Object observable, apparatus ready state, pointer observable and measuring unitary.

    ``pointer_eigenvectors[n]`` is the apparatus state that reads the n-th
    object eigenvalue. The pointer observable assigns exactly that eigenvalue
    to it; when the apparatus space is larger than the object space, the
    remaining pointer eigenvalues label "no reading" directions.
    """

    object_observable: SpectralObservable
    ready_state: ComplexVector
    pointer_observable: SpectralObservable
    pointer_eigenvectors: tuple[ComplexVector, ...]
    unitary: ComplexMatrix
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self) -> None:
        obs = self.object_observable
        if not obs.is_nondegenerate:
            raise ValidityError("object observable must be nondegenerate")
        d = obs.dim
        if len(self.pointer_eigenvectors) != d:
            raise DimensionError(f"need {d} pointer eigenvectors, got {len(self.pointer_eigenvectors)}")
        xi = as_state(self.ready_state, self.tol, "ready state")
        da = xi.size
        if self.pointer_observable.dim != da or not self.pointer_observable.is_nondegenerate:
            raise ValidityError("pointer observable must be nondegenerate on the apparatus space")
        pointers = tuple(as_state(v, self.tol, "pointer eigenvector") for v in self.pointer_eigenvectors)
        for a, v in zip(obs.eigenvalues, pointers):
            try:
                k = self.pointer_observable.index_of(a)
            except KeyError:
                raise ValidityError(f"pointer observable has no eigenvalue {a!r}") from None
            p = self.pointer_observable.projectors[k]
            if abs(np.vdot(v, p @ v) - 1.0) > self.tol:
                raise ValidityError(f"pointer eigenvector for {a!r} is not in its eigenspace")
        u = np.asarray(self.unitary, dtype=np.complex128)
        if u.shape != (d * da, d * da):
            raise DimensionError(f"unitary has shape {u.shape}, expected {(d * da, d * da)}")
        if not is_unitary(u, self.tol):
            raise ValidityError("measuring operator is not unitary")
        for arr in (xi, u, *pointers):
            arr.setflags(write=False)
        object.__setattr__(self, "ready_state", xi)
        object.__setattr__(self, "pointer_eigenvectors", pointers)
        object.__setattr__(self, "unitary", u)
        res = constraint_residual(self)
        if res > self.tol:
            raise ValidityError(f"unitary violates U(phi_n ⊗ xi) = phi_n ⊗ xi_n (residual {res:.3e})")

    @property
    def object_dim(self) -> int:
        return self.object_observable.dim

    @property
    def apparatus_dim(self) -> int:
        return self.ready_state.size

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return self.object_observable.eigenvalues

    @cached_property
    def object_eigenvectors(self) -> tuple[ComplexVector, ...]:
        return self.object_observable.eigenvectors()

    def pointer_projector(self, outcome: int) -> ComplexMatrix:
        """Apparatus projector ``E^B(a_n)`` for object outcome ``n``."""
        k = self.pointer_observable.index_of(self.eigenvalues[outcome])
        return self.pointer_observable.projectors[k]

    def after_interaction(self, psi: ArrayLike) -> ComplexVector:
        """``U (psi ⊗ xi)``: the composite state at the end of the interaction."""
        psi = _object_state(self, psi)
        return self.unitary @ tensor_vec(psi, self.ready_state)


def _object_state(model: MeasurementModel, psi: ArrayLike) -> ComplexVector:
    v = as_state(psi, model.tol, "psi")
    if v.size != model.object_dim:
        raise DimensionError(f"psi has dimension {v.size}, object space is {model.object_dim}")
    return v


def _complete_basis(initial: Sequence[ComplexVector], pool: Sequence[ComplexVector]) -> ComplexMatrix:
    """Unitary whose leading columns are ``initial``, completed by pivoted Gram-Schmidt.

    At each step the pool vector with the largest component orthogonal to
    the current span is taken, so the completion is deterministic and never
    divides by a small residual.
    """
    basis = [np.asarray(v, dtype=np.complex128) for v in initial]
    dim = basis[0].size
    cand = [np.asarray(c, dtype=np.complex128) for c in pool]
    while len(basis) < dim:
        q = np.array(basis).T
        best, best_norm = None, -1.0
        for c in cand:
            r = c - q @ (q.conj().T @ c)
            r = r - q @ (q.conj().T @ r)
            n = np.linalg.norm(r)
            if n > best_norm + 1e-12:
                best, best_norm = r, n
        basis.append(best / best_norm)
    return np.array(basis).T


def _block_unitary(
    ready: ComplexVector,
    pointers: Sequence[ComplexVector],
    n: int,
    tol: float,
) -> ComplexMatrix:
    """Apparatus unitary ``V_n`` with ``V_n xi = xi_n`` in canonical form."""
    d = len(pointers)
    da = ready.size
    if d > 1:
        for r, xr in enumerate(pointers):
            if np.linalg.norm(ready - xr) <= tol:
                # cyclic shift xi_k -> xi_{(k - r + n) mod d}; identity off span{xi_k}
                frame = np.array(pointers).T
                v = np.eye(da, dtype=np.complex128) - frame @ frame.conj().T
                for k in range(d):
                    v += np.outer(pointers[(k - r + n) % d], pointers[k].conj())
                return v
    pool = list(pointers) + [basis_vector(da, i) for i in range(da)]
    src = _complete_basis([ready], pool)
    dst = _complete_basis([pointers[n]], pool)
    return dst @ src.conj().T


def _check_orthonormal(vectors: Sequence[ComplexVector], tol: float, what: str) -> None:
    g = np.array([[np.vdot(a, b) for b in vectors] for a in vectors])
    if np.max(np.abs(g - np.eye(len(vectors)))) > tol:
        raise ValidityError(f"{what} are not orthonormal")


def build_measuring_unitary(
    object_observable: SpectralObservable,
    ready_state: ArrayLike,
    pointer_eigenvectors: Sequence[ArrayLike],
    tol: float = DEFAULT_TOL,
) -> ComplexMatrix:
    """Measuring unitary ``U = sum_n |phi_n><phi_n| ⊗ V_n`` with ``V_n xi = xi_n``.

    If the ready state coincides with one of the pointer eigenvectors
    ``xi_r`` (and there is more than one outcome), ``V_n`` cyclically
    shifts the pointer basis by ``n - r`` and acts as the identity on the
    rest of the apparatus space. Otherwise ``V_n`` maps a completed
    orthonormal basis starting at ``xi`` onto one starting at ``xi_n``.
    The block structure makes ``U`` commute with ``A ⊗ 1``.
    """
    if not object_observable.is_nondegenerate:
        raise ValidityError("object observable must be nondegenerate")
    d = object_observable.dim
    xi = as_state(ready_state, tol, "ready state")
    pointers = [as_state(v, tol, "pointer eigenvector") for v in pointer_eigenvectors]
    if len(pointers) != d:
        raise DimensionError(f"need {d} pointer eigenvectors, got {len(pointers)}")
    if any(v.size != xi.size for v in pointers):
        raise DimensionError("pointer eigenvectors and ready state live in different spaces")
    if xi.size < d:
        raise DimensionError(f"apparatus dimension {xi.size} is smaller than {d}")
    _check_orthonormal(pointers, tol, "pointer eigenvectors")
    u = np.zeros((d * xi.size, d * xi.size), dtype=np.complex128)
    for n, p in enumerate(object_observable.projectors):
        u += np.kron(p, _block_unitary(xi, pointers, n, tol))
    return u


def pointer_observable_for(
    eigenvalues: Sequence[float],
    pointer_eigenvectors: Sequence[ArrayLike],
) -> SpectralObservable:
    """Pointer observable reading ``a_n`` on ``xi_n``.

    Directions orthogonal to every ``xi_n`` get fresh eigenvalues
    ``max(a) + 1, max(a) + 2, ...`` so the observable stays nondegenerate.
    """
    pointers = [np.asarray(v, dtype=np.complex128) for v in pointer_eigenvectors]
    da = pointers[0].size
    pool = [basis_vector(da, i) for i in range(da)]
    full = _complete_basis(pointers, pool)
    extra = [full[:, k] for k in range(len(pointers), da)]
    top = max(eigenvalues)
    vals = list(eigenvalues) + [top + 1.0 + k for k in range(len(extra))]
    return SpectralObservable.from_eigenbasis(vals, pointers + extra)


def make_model(
    object_observable: SpectralObservable,
    ready_state: ArrayLike | None = None,
    pointer_eigenvectors: Sequence[ArrayLike] | None = None,
    pointer_observable: SpectralObservable | None = None,
    apparatus_dim: int | None = None,
    tol: float = DEFAULT_TOL,
) -> MeasurementModel:
    """Assemble a :class:`MeasurementModel` with the canonical measuring unitary.

    Pointer eigenvectors default to the eigenvectors of ``pointer_observable``
    matching the object eigenvalues, or to the first ``d`` computational
    basis vectors of the apparatus space if no pointer observable is given.
    The ready state defaults to the first pointer eigenvector.
    """
    d = object_observable.dim
    if pointer_eigenvectors is None:
        if pointer_observable is not None:
            vecs = pointer_observable.eigenvectors()
            pointer_eigenvectors = [vecs[pointer_observable.index_of(a)] for a in object_observable.eigenvalues]
        else:
            da = d if apparatus_dim is None else apparatus_dim
            if da < d:
                raise DimensionError(f"apparatus dimension {da} is smaller than {d}")
            pointer_eigenvectors = [basis_vector(da, n) for n in range(d)]
    pointers = [np.asarray(v, dtype=np.complex128) for v in pointer_eigenvectors]
    if apparatus_dim is not None and pointers[0].size != apparatus_dim:
        raise DimensionError("pointer eigenvectors do not match apparatus_dim")
    xi = pointers[0] if ready_state is None else np.asarray(ready_state, dtype=np.complex128)
    if pointer_observable is None:
        pointer_observable = pointer_observable_for(object_observable.eigenvalues, pointers)
    u = build_measuring_unitary(object_observable, xi, pointers, tol)
    return MeasurementModel(object_observable, xi, pointer_observable, tuple(pointers), u, tol)


def random_model(
    d: int,
    rng: np.random.Generator,
    apparatus_dim: int | None = None,
    generic_ready_state: bool = True,
) -> MeasurementModel:
    """Model with random object eigenbasis, eigenvalues, pointer basis and ready state."""
    da = d if apparatus_dim is None else apparatus_dim
    phis = random_unitary(d, rng)
    vals = np.sort(rng.uniform(-5.0, 5.0, d))
    obs = SpectralObservable.from_eigenbasis(vals, [phis[:, n] for n in range(d)])
    frame = random_unitary(da, rng)
    pointers = [frame[:, n] for n in range(d)]
    if generic_ready_state:
        xi = random_state(da, rng)
    else:
        xi = pointers[int(rng.integers(d))]
    return make_model(obs, xi, pointers)


def constraint_residual(model: MeasurementModel) -> float:
    """``max_n ||U(phi_n ⊗ xi) - phi_n ⊗ xi_n||``."""
    out = 0.0
    for phi, xin in zip(model.object_eigenvectors, model.pointer_eigenvectors):
        lhs = model.unitary @ tensor_vec(phi, model.ready_state)
        out = max(out, float(np.linalg.norm(lhs - tensor_vec(phi, xin))))
    return out


def verify_linearity(model: MeasurementModel, psi: ArrayLike) -> float:
    """Residual ``||U(psi ⊗ xi) - sum_n c_n phi_n ⊗ xi_n||`` with ``c_n = <phi_n|psi>``."""
    psi = _object_state(model, psi)
    lhs = model.unitary @ tensor_vec(psi, model.ready_state)
    rhs = np.zeros_like(lhs)
    for phi, xin in zip(model.object_eigenvectors, model.pointer_eigenvectors):
        rhs += np.vdot(phi, psi) * tensor_vec(phi, xin)
    return float(np.linalg.norm(lhs - rhs))


def statistical_formula(observable: SpectralObservable, rho: ArrayLike) -> OutcomeDistribution:
    """Outcome probabilities ``Tr[E_n rho]``."""
    rho = as_density(rho)
    if rho.shape[0] != observable.dim:
        raise DimensionError(f"rho has dimension {rho.shape[0]}, observable has {observable.dim}")
    p = np.array([np.trace(e @ rho).real for e in observable.projectors])
    return OutcomeDistribution(observable.eigenvalues, tuple(_check_probabilities(p, "Tr[E_n rho]")))


def luders_update(
    observable: SpectralObservable,
    rho: ArrayLike,
    outcome: int,
    floor: float = PROBABILITY_FLOOR,
) -> ComplexMatrix:
    """Post-measurement state ``E_n rho E_n / Tr[E_n rho]``."""
    rho = as_density(rho)
    if rho.shape[0] != observable.dim:
        raise DimensionError(f"rho has dimension {rho.shape[0]}, observable has {observable.dim}")
    e = observable.projectors[outcome]
    num = e @ rho @ e
    prob = np.trace(num).real
    if prob <= floor:
        raise NullEventError(f"conditioning on null event: outcome {outcome} has probability {prob:.3e}")
    return num / prob


def nonselective_channel(observable: SpectralObservable, rho: ArrayLike) -> ComplexMatrix:
    """``rho -> sum_n E_n rho E_n``."""
    rho = as_density(rho)
    if rho.shape[0] != observable.dim:
        raise DimensionError(f"rho has dimension {rho.shape[0]}, observable has {observable.dim}")
    return sum(e @ rho @ e for e in observable.projectors)


def open_system_nonselective(model: MeasurementModel, psi: ArrayLike) -> ComplexMatrix:
    """Reduced object state ``Tr_app[U |psi ⊗ xi><psi ⊗ xi| U†]``."""
    big = model.after_interaction(psi)
    return partial_trace_apparatus(ket(big), model.object_dim, model.apparatus_dim)


def conditional_state(
    model: MeasurementModel,
    rho_object: ArrayLike,
    sigma_apparatus: ArrayLike,
    outcome: int,
    floor: float = PROBABILITY_FLOOR,
) -> ComplexMatrix:
    """Object state conditional on pointer outcome ``a_n``.

    The composite state ``U (rho ⊗ sigma) U†`` is sandwiched by
    ``I ⊗ E^B(a_n)``, the apparatus is traced out and the result is
    normalized by its trace.
    """
    rho = as_density(rho_object, model.tol, "rho_object")
    sigma = as_density(sigma_apparatus, model.tol, "sigma_apparatus")
    if rho.shape[0] != model.object_dim or sigma.shape[0] != model.apparatus_dim:
        raise DimensionError("state dimensions do not match the model")
    u = model.unitary
    after = u @ np.kron(rho, sigma) @ u.conj().T
    proj = np.kron(np.eye(model.object_dim), model.pointer_projector(outcome))
    num = proj @ after @ proj
    prob = np.trace(num).real
    if prob <= floor:
        raise NullEventError(f"conditioning on null event: outcome {outcome} has probability {prob:.3e}")
    return partial_trace_apparatus(num, model.object_dim, model.apparatus_dim) / prob


def pointer_distribution(model: MeasurementModel, psi: ArrayLike) -> OutcomeDistribution:
    """Pointer-reading probabilities ``<Psi|(1 ⊗ |xi_n><xi_n|)|Psi>`` after the interaction."""
    big = model.after_interaction(psi).reshape(model.object_dim, model.apparatus_dim)
    # <Psi|(1 ⊗ |xi_n><xi_n|)|Psi> = sum_i |<xi_n|Psi_i>|^2
    p = np.array([np.sum(np.abs(big @ xin.conj()) ** 2) for xin in model.pointer_eigenvectors])
    return OutcomeDistribution(model.eigenvalues, tuple(_check_probabilities(p, "pointer probability")))


def joint_simultaneous_distribution(model: MeasurementModel, psi: ArrayLike) -> JointOutcomeDistribution:
    """``table[n][m] = |<phi_m ⊗ xi_n | Psi>|^2``: pointer reads ``a_n`` and ``A`` gives ``a_m``."""
    big = model.after_interaction(psi).reshape(model.object_dim, model.apparatus_dim)
    phis = np.array(model.object_eigenvectors)
    xis = np.array(model.pointer_eigenvectors)
    amp = phis.conj() @ big @ xis.conj().T  # amp[m, n] = <phi_m ⊗ xi_n|Psi>
    t = _check_probabilities(np.abs(amp.T) ** 2, "joint probability")
    return JointOutcomeDistribution(model.eigenvalues, model.eigenvalues, tuple(map(tuple, t)))


@dataclass(frozen=True, eq=False)
class ChainModel:
    """A first model followed by a second apparatus that measures its pointer.

    The second unitary acts on (object ⊗ apparatus) ⊗ second apparatus and
    has the block form ``sum_n (1 ⊗ |xi_n><xi_n|) ⊗ W_n + (1 ⊗ Q) ⊗ 1`` with
    ``W_n xi' = xi'_n`` and ``Q`` the projector off the first pointer basis.
    """

    first: MeasurementModel
    second_ready_state: ComplexVector
    second_pointer_eigenvectors: tuple[ComplexVector, ...]
    second_unitary: ComplexMatrix

    @property
    def second_dim(self) -> int:
        return self.second_ready_state.size

    def final_state(self, psi: ArrayLike) -> ComplexVector:
        """``U2 (U ⊗ 1)(psi ⊗ xi ⊗ xi')``."""
        return self.second_unitary @ tensor_vec(self.first.after_interaction(psi), self.second_ready_state)

    def expected_final_state(self, psi: ArrayLike) -> ComplexVector:
        """``sum_n c_n phi_n ⊗ xi_n ⊗ xi'_n`` built directly from the coefficients."""
        psi = _object_state(self.first, psi)
        out = np.zeros(self.first.object_dim * self.first.apparatus_dim * self.second_dim, dtype=np.complex128)
        for phi, xin, x2 in zip(
            self.first.object_eigenvectors, self.first.pointer_eigenvectors, self.second_pointer_eigenvectors
        ):
            out += np.vdot(phi, psi) * tensor_vec(tensor_vec(phi, xin), x2)
        return out

    def outcome_table(self, psi: ArrayLike) -> NDArray[np.float64]:
        """``table[k, n, m] = |<phi_m ⊗ xi_n ⊗ xi'_k | Phi>|^2``.

        Axes are (second pointer, first pointer, object observable).
        """
        f = self.first
        phi = self.final_state(psi).reshape(f.object_dim, f.apparatus_dim, self.second_dim)
        a = np.array(f.object_eigenvectors).conj()
        b = np.array(f.pointer_eigenvectors).conj()
        c = np.array(self.second_pointer_eigenvectors).conj()
        amp = np.einsum("mi,nj,kl,ijl->knm", a, b, c, phi)
        return _check_probabilities(np.abs(amp) ** 2, "chain probability")

    def second_pointer_distribution(self, psi: ArrayLike) -> OutcomeDistribution:
        p = self.outcome_table(psi).sum(axis=(1, 2))
        return OutcomeDistribution(self.first.eigenvalues, tuple(p))


def chain_extend(
    model: MeasurementModel,
    second_pointer_eigenvectors: Sequence[ArrayLike] | None = None,
    second_ready_state: ArrayLike | None = None,
) -> ChainModel:
    """Couple a second apparatus that measures the first model's pointer.

    Defaults: computational basis of a ``d``-dimensional second apparatus,
    ready in its first pointer state.
    """
    d = model.object_dim
    if second_pointer_eigenvectors is None:
        second_pointer_eigenvectors = [basis_vector(d, n) for n in range(d)]
    pointers = [as_state(v, model.tol, "second pointer eigenvector") for v in second_pointer_eigenvectors]
    if len(pointers) != d:
        raise DimensionError(f"need {d} second pointer eigenvectors, got {len(pointers)}")
    xi2 = pointers[0] if second_ready_state is None else as_state(second_ready_state, model.tol, "second ready state")
    d2 = xi2.size
    if d2 < d or any(v.size != d2 for v in pointers):
        raise DimensionError("second apparatus dimension is inconsistent")
    _check_orthonormal(pointers, model.tol, "second pointer eigenvectors")
    da = model.apparatus_dim
    eye_obj = np.eye(d)
    frame = np.array(model.pointer_eigenvectors).T
    off = np.eye(da) - frame @ frame.conj().T
    u2 = np.kron(np.kron(eye_obj, off), np.eye(d2)).astype(np.complex128)
    for n, xin in enumerate(model.pointer_eigenvectors):
        u2 += np.kron(np.kron(eye_obj, ket(xin)), _block_unitary(xi2, pointers, n, model.tol))
    if not is_unitary(u2, model.tol):
        raise ValidityError("second measuring operator is not unitary")
    for arr in (xi2, u2, *pointers):
        arr.setflags(write=False)
    return ChainModel(model, xi2, tuple(pointers), u2)


@dataclass(frozen=True)
class RepeatabilityReport:
    agreements: int
    trials: int
    first_outcome_counts: tuple[int, ...]
    expected_probabilities: tuple[float, ...]

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.trials for c in self.first_outcome_counts)

    def within_sigma(self, k: float = 3.0) -> tuple[bool, ...]:
        """Whether each outcome frequency lies within ``k`` binomial standard errors."""
        out = []
        for f, p in zip(self.frequencies, self.expected_probabilities):
            out.append(abs(f - p) <= k * np.sqrt(p * (1.0 - p) / self.trials))
        return tuple(out)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a user seed reduced modulo 2**64."""
    return np.random.Generator(np.random.PCG64(int(seed) % 2**64))


def sample_index(cdf: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.int64]:
    """Inverse-CDF sampling over outcomes in index order.

    ``u`` values at or beyond the final cumulative sum (roundoff below 1)
    fall on the last outcome with positive mass.
    """
    idx = np.searchsorted(cdf, u, side="right")
    last = int(np.flatnonzero(np.diff(np.concatenate(([0.0], cdf))) > 0)[-1])
    return np.minimum(idx, last)


def verify_repeatability(
    model: MeasurementModel,
    psi: ArrayLike,
    trials: int,
    seed: int,
    floor: float = PROBABILITY_FLOOR,
) -> RepeatabilityReport:
    """Monte Carlo check that an immediate second measurement of ``A`` agrees.

    Each trial draws two uniforms from one seeded PCG64 stream (row ``i``
    of a ``trials x 2`` block belongs to trial ``i``). The first selects the
    pointer outcome from :func:`pointer_distribution`; the second selects
    the outcome of measuring ``A`` on the object state conditioned on that
    reading. Outcomes at or below ``floor`` are given zero weight.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    psi = _object_state(model, psi)
    first = pointer_distribution(model, psi).as_array()
    first = np.where(first > floor, first, 0.0)
    u = make_rng(seed).random((trials, 2))
    n_first = sample_index(np.cumsum(first) / first.sum(), u[:, 0])
    rho = ket(psi)
    sigma = ket(model.ready_state)
    second = np.empty(trials, dtype=np.int64)
    for n in np.unique(n_first):
        post = conditional_state(model, rho, sigma, int(n), floor)
        p2 = statistical_formula(model.object_observable, post).as_array()
        sel = n_first == n
        second[sel] = sample_index(np.cumsum(p2), u[sel, 1])
    counts = np.bincount(n_first, minlength=model.object_dim)
    exact = pointer_distribution(model, psi).probabilities
    return RepeatabilityReport(
        agreements=int(np.sum(second == n_first)),
        trials=int(trials),
        first_outcome_counts=tuple(int(c) for c in counts),
        expected_probabilities=exact,
    )

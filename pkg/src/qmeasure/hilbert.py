"""Dense complex linear algebra for finite-dimensional measurement models.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Composite
spaces are always ordered object-first: in ``tensor(m1, m2)`` the index of
``m1`` is the outermost (slowest varying) one, so that

    (M ⊗ N)[i*n + k, j*n + l] == M[i, j] * N[k, l].

Every module in the package relies on this single convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

ComplexMatrix = NDArray[np.complex128]
ComplexVector = NDArray[np.complex128]

DEFAULT_TOL = 1e-10
DEFAULT_EIGENVALUE_TOL = 1e-8


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class ValidityError(ValueError):
    """A matrix or vector violates a required invariant."""


def as_matrix(m: ArrayLike, name: str = "matrix") -> ComplexMatrix:
    """Return ``m`` as a finite, square complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidityError(f"{name} has non-finite entries")
    return arr


def as_state(v: ArrayLike, tol: float = DEFAULT_TOL, name: str = "state") -> ComplexVector:
    """Return ``v`` as a normalized complex vector, raising if it is not one."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidityError(f"{name} has non-finite entries")
    norm2 = float(np.vdot(arr, arr).real)
    if abs(norm2 - 1.0) > tol:
        raise ValidityError(f"{name} is not normalized (squared norm {norm2!r})")
    return arr


def as_density(rho: ArrayLike, tol: float = DEFAULT_TOL, name: str = "rho") -> ComplexMatrix:
    """Return ``rho`` as a density matrix: Hermitian, unit trace, positive."""
    arr = as_matrix(rho, name)
    if np.max(np.abs(arr - arr.conj().T)) > tol:
        raise ValidityError(f"{name} is not Hermitian")
    tr = np.trace(arr)
    if abs(tr - 1.0) > tol:
        raise ValidityError(f"{name} does not have unit trace (trace {tr!r})")
    lam_min = float(np.linalg.eigvalsh(arr).min())
    if lam_min < -tol:
        raise ValidityError(f"{name} has a negative eigenvalue {lam_min!r}")
    return arr


def ket(v: ArrayLike) -> ComplexMatrix:
    """Projector ``|v><v|`` for a vector ``v`` (no normalization applied)."""
    arr = np.asarray(v, dtype=np.complex128)
    return np.outer(arr, arr.conj())


def basis_vector(dim: int, index: int) -> ComplexVector:
    e = np.zeros(dim, dtype=np.complex128)
    e[index] = 1.0
    return e


def fix_phase(v: ArrayLike, tol: float = 1e-12) -> ComplexVector:
    """Rotate the global phase so the first nonzero component is real positive."""
    arr = np.asarray(v, dtype=np.complex128)
    mags = np.abs(arr)
    nz = np.flatnonzero(mags > tol * max(1.0, mags.max(initial=0.0)))
    if nz.size == 0:
        return arr.copy()
    first = arr[nz[0]]
    return arr * (abs(first) / first)


def tensor(m1: ArrayLike, m2: ArrayLike) -> ComplexMatrix:
    """Tensor product with the first factor's index outermost."""
    return np.kron(as_matrix(m1, "m1"), as_matrix(m2, "m2"))


def tensor_vec(v1: ArrayLike, v2: ArrayLike) -> ComplexVector:
    return np.kron(np.asarray(v1, dtype=np.complex128), np.asarray(v2, dtype=np.complex128))


def partial_trace_apparatus(m: ArrayLike, dim_object: int, dim_apparatus: int) -> ComplexMatrix:
    """Trace out the second (apparatus) factor of an object ⊗ apparatus operator."""
    arr = as_matrix(m)
    if dim_object < 1 or dim_apparatus < 1 or arr.shape[0] != dim_object * dim_apparatus:
        raise DimensionError(
            f"matrix of dimension {arr.shape[0]} is not {dim_object} x {dim_apparatus}"
        )
    return np.einsum("iaja->ij", arr.reshape(dim_object, dim_apparatus, dim_object, dim_apparatus))


def is_hermitian(m: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    arr = as_matrix(m)
    return bool(np.max(np.abs(arr - arr.conj().T)) <= tol)


def is_unitary(m: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    """True iff every entry of ``U†U - I`` is at most ``tol`` in modulus."""
    arr = as_matrix(m)
    dev = arr.conj().T @ arr - np.eye(arr.shape[0])
    return bool(np.max(np.abs(dev)) <= tol)


def frobenius(m: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(m), "fro"))


@dataclass(frozen=True, eq=False)
class SpectralObservable:
    """Discrete observable ``sum_n a_n E_n`` stored as eigenvalues plus projectors.

    Eigenvalues must be pairwise distinct and the projectors must form an
    orthogonal resolution of the identity. Arrays are copied and made
    read-only on construction.
    """

    eigenvalues: tuple[float, ...]
    projectors: tuple[ComplexMatrix, ...]
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self) -> None:
        vals = tuple(float(a) for a in self.eigenvalues)
        if len(vals) == 0:
            raise ValidityError("observable needs at least one eigenvalue")
        if len(vals) != len(self.projectors):
            raise DimensionError("one projector is required per eigenvalue")
        if len(set(vals)) != len(vals):
            raise ValidityError("eigenvalues must be pairwise distinct")
        projs = []
        for p in self.projectors:
            arr = as_matrix(p, "projector").copy()
            arr.setflags(write=False)
            projs.append(arr)
        dim = projs[0].shape[0]
        if any(p.shape[0] != dim for p in projs):
            raise DimensionError("projectors have mismatched dimensions")
        tol = self.tol
        for i, p in enumerate(projs):
            if np.max(np.abs(p - p.conj().T)) > tol or np.max(np.abs(p @ p - p)) > tol:
                raise ValidityError(f"projector {i} is not an orthogonal projection")
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(p @ projs[j])) > tol:
                    raise ValidityError(f"projectors {i} and {j} are not orthogonal")
        if np.max(np.abs(sum(projs) - np.eye(dim))) > tol:
            raise ValidityError("projectors do not sum to the identity")
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "projectors", tuple(projs))

    @classmethod
    def from_eigenbasis(
        cls,
        eigenvalues: Sequence[float],
        vectors: Sequence[ArrayLike],
        tol: float = DEFAULT_TOL,
    ) -> "SpectralObservable":
        """Nondegenerate observable ``sum_n a_n |v_n><v_n|`` from an orthonormal basis."""
        return cls(tuple(eigenvalues), tuple(ket(v) for v in vectors), tol)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(int(round(np.trace(p).real)) for p in self.projectors)

    @property
    def is_nondegenerate(self) -> bool:
        return all(r == 1 for r in self.ranks)

    def matrix(self) -> ComplexMatrix:
        return sum(a * p for a, p in zip(self.eigenvalues, self.projectors))

    def index_of(self, eigenvalue: float, tol: float = DEFAULT_EIGENVALUE_TOL) -> int:
        for i, a in enumerate(self.eigenvalues):
            if abs(a - eigenvalue) <= tol:
                return i
        raise KeyError(f"{eigenvalue!r} is not an eigenvalue")

    def eigenvectors(self) -> tuple[ComplexVector, ...]:
        """Unit eigenvectors of a nondegenerate observable, in eigenvalue-list order.

        Each vector is read off the projector column of its largest-magnitude
        diagonal entry, then phase-fixed so its first nonzero component is
        real positive.
        """
        if not self.is_nondegenerate:
            raise ValidityError("eigenvectors are only defined for a nondegenerate observable")
        out = []
        for p in self.projectors:
            j = int(np.argmax(np.abs(np.diag(p))))
            col = p[:, j]
            out.append(fix_phase(col / np.linalg.norm(col)))
        return tuple(out)


def spectral_decompose(
    hermitian: ArrayLike,
    eigenvalue_tolerance: float = DEFAULT_EIGENVALUE_TOL,
    tol: float = DEFAULT_TOL,
) -> SpectralObservable:
    """Spectral decomposition of a Hermitian matrix, grouping near-equal eigenvalues.

    Sorted eigenvalues are chained into one cluster while consecutive gaps
    stay below ``eigenvalue_tolerance``; each cluster contributes its mean
    eigenvalue and the projector onto the span of its eigenvectors.
    """
    h = as_matrix(hermitian, "hermitian")
    if np.max(np.abs(h - h.conj().T)) > tol:
        raise ValidityError("input is not Hermitian")
    h = 0.5 * (h + h.conj().T)
    vals, vecs = np.linalg.eigh(h)
    groups: list[list[int]] = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] < eigenvalue_tolerance:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = tuple(float(np.mean(vals[g])) for g in groups)
    projectors = tuple(vecs[:, g] @ vecs[:, g].conj().T for g in groups)
    return SpectralObservable(eigenvalues, projectors, tol)


def von_neumann_entropy(rho: ArrayLike, tol: float = DEFAULT_TOL) -> float:
    """Entropy ``-Tr[rho ln rho]`` in nats, with ``0 ln 0 = 0``."""
    arr = as_density(rho, tol)
    lam = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
    lam = lam[lam > 0.0]
    return max(float(-np.sum(lam * np.log(lam))), 0.0)


def random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> ComplexVector:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> ComplexMatrix:
    """Random density matrix ``G G† / Tr[G G†]`` with ``G`` of shape ``dim x rank``."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real

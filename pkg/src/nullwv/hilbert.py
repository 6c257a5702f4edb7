"""Small dense Hilbert-space primitives: pure states, unitaries, observables.

All values are immutable; the wrapped numpy arrays are marked read-only so a
state handed to a sampler or a worker thread cannot be mutated behind its back.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DegenerateStateError, DimensionError, HermiticityError, UnitarityError

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
EIG_RECONSTRUCT_TOL = 1e-8
IMAG_TOL = 1e-10

ArrayLike = Sequence[complex] | np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state in the computational basis |0>, ..., |dim-1>."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1:
            raise DimensionError(f"state must be a vector, got shape {amps.shape}")
        if amps.size < 2:
            raise DimensionError("state dimension must be at least 2")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise DegenerateStateError(
                f"amplitudes are not normalized (norm^2 = {norm2!r}); use normalize()"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        if not 0 <= index < dim:
            raise DimensionError(f"basis index {index} out of range for dim {dim}")
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    @classmethod
    def qubit(cls, theta: float) -> "StateVector":
        """cos(theta)|0> + sin(theta)|1>."""
        return cls(np.array([np.cos(theta), np.sin(theta)]))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector({np.array2string(self.amplitudes, precision=6)})"


def normalize(v: ArrayLike) -> StateVector:
    """Return ``v / ||v||`` as a :class:`StateVector`."""
    v = np.asarray(v, dtype=np.complex128)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateStateError("cannot normalize a zero or non-finite vector")
    return StateVector(v / norm)


def _check_square(m: np.ndarray, what: str) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{what} must be a square matrix, got shape {m.shape}")
    if m.shape[0] < 2:
        raise DimensionError(f"{what} dimension must be at least 2")


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        _check_square(m, "unitary")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err > UNITARY_TOL:
            raise UnitarityError(f"U^dagger U deviates from identity by {err:.3e}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "Unitary":
        return cls(np.eye(dim))

    @property
    def H(self) -> "Unitary":
        return Unitary(self.matrix.conj().T)

    def __matmul__(self, other: "Unitary") -> "Unitary":
        if not isinstance(other, Unitary):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"cannot compose dims {self.dim} and {other.dim}")
        return Unitary(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator with a lazily computed, deterministically ordered eigenbasis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        _check_square(m, "observable")
        err = np.max(np.abs(m - m.conj().T))
        if err > HERMITIAN_TOL:
            raise HermiticityError(f"matrix is not Hermitian (max deviation {err:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "Observable":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def projector(cls, dim: int, index: int) -> "Observable":
        """|index><index|, e.g. the qubit population n1 = projector(2, 1)."""
        values = np.zeros(dim)
        values[index] = 1.0
        return cls.diagonal(values)

    @cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        vals, vecs = np.linalg.eigh(self.matrix)
        out_vals, out_vecs = [], []
        start = 0
        n = vals.size
        while start < n:
            stop = start + 1
            while stop < n and vals[stop] - vals[start] <= HERMITIAN_TOL * max(1.0, abs(vals[start])):
                stop += 1
            group = _canonical_basis(vecs[:, start:stop])
            out_vecs.extend(group)
            out_vals.extend([vals[start:stop].mean()] * (stop - start))
            start = stop
        values = np.array(out_vals, dtype=float)
        vectors = np.column_stack(out_vecs)
        recon = (vectors * values) @ vectors.conj().T
        if np.max(np.abs(recon - self.matrix)) > EIG_RECONSTRUCT_TOL:
            raise HermiticityError("eigendecomposition failed to reconstruct the matrix")
        values.setflags(write=False)
        vectors.setflags(write=False)
        return values, vectors

    @property
    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues a_m."""
        return self._eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        """Columns |a_m>, matched to :attr:`eigenvalues`."""
        return self._eig[1]


def _canonical_basis(block: np.ndarray) -> list[np.ndarray]:
    """Deterministic orthonormal basis for the span of ``block``'s columns.

    Degenerate eigenspaces come back from LAPACK in an arbitrary rotation. We
    project computational basis vectors in index order onto the eigenspace and
    Gram-Schmidt them, so the result depends only on the subspace. Each vector
    is phased so its first significant amplitude is real and positive.
    """
    k = block.shape[1]
    if k == 1:
        return [_fix_phase(block[:, 0])]
    proj = block @ block.conj().T
    basis: list[np.ndarray] = []
    for j in range(block.shape[0]):
        v = proj[:, j].copy()
        for b in basis:
            v -= np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            basis.append(_fix_phase(v / norm))
        if len(basis) == k:
            break
    return basis


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > 1e-10)
    if idx.size == 0:
        return v
    lead = v[idx[0]]
    return v * (abs(lead) / lead)


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} vs {b}")


def inner(u: StateVector, v: StateVector) -> complex:
    """<u|v>, antilinear in the first argument."""
    _check_dims(u.dim, v.dim)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def apply_unitary(U: Unitary, v: StateVector) -> StateVector:
    _check_dims(U.dim, v.dim)
    out = U.matrix @ v.amplitudes
    # Renormalize away the last few ulps so chains of rotations stay valid states.
    return StateVector(out / np.linalg.norm(out))


def qubit_rotation(gamma: float) -> Unitary:
    """Real rotation with ``U|0> = cos g|0> + sin g|1>``.

    Postselecting |0> after this U projects the earlier state onto
    ``U^dagger|0> = cos g|0> - sin g|1>``.
    """
    c, s = np.cos(gamma), np.sin(gamma)
    return Unitary(np.array([[c, -s], [s, c]]))


def expectation(A: Observable, v: StateVector) -> float:
    _check_dims(A.dim, v.dim)
    val = complex(np.vdot(v.amplitudes, A.matrix @ v.amplitudes))
    if abs(val.imag) > IMAG_TOL:
        raise HermiticityError(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return normalize(z)


def random_unitary(dim: int, rng: np.random.Generator) -> Unitary:
    """Haar-random unitary via QR with the phase correction of Mezzadri."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return Unitary(q * (d / np.abs(d)))

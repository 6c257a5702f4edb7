"""Standard weak values read out on a Gaussian von Neumann pointer.

The pointer starts as a Gaussian packet ``phi0(q) ~ exp(-(q - q0)^2 / (4 delta^2))``
and an impulsive coupling ``lambda p A`` displaces it by ``lambda a_m`` on each
eigenspace of A. After postselecting the system on <f| the pointer is left in

    phi_f(q) = sum_m c_m phi0(q - lambda a_m),   c_m = <f|a_m><a_m|i>

whose mean position has a closed form in terms of pairwise Gaussian overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OrthogonalPostselectionError, PostselectionAnnihilatedError
from .hilbert import Observable, StateVector, inner

OVERLAP_FLOOR = 1e-12
ANNIHILATION_TOL = 1e-14


@dataclass(frozen=True)
class GaussianPointer:
    q0: float = 0.0
    delta: float = 1.0
    lam: float = 0.1

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"pointer width must be positive, got {self.delta}")


@dataclass(frozen=True)
class WeakValueResult:
    wv: complex
    pointer_mean_linear: float
    pointer_mean_exact: float
    overlap: complex


def standard_wv(
    A: Observable, i: StateVector, f: StateVector, overlap_floor: float = OVERLAP_FLOOR
) -> complex:
    """<f|A|i> / <f|i>."""
    overlap = inner(f, i)
    if abs(overlap) <= overlap_floor:
        raise OrthogonalPostselectionError(abs(overlap), overlap_floor)
    num = complex(np.vdot(f.amplitudes, A.matrix @ i.amplitudes))
    return num / overlap


def pointer_mean_linear(
    A: Observable,
    i: StateVector,
    f: StateVector,
    pointer: GaussianPointer,
    overlap_floor: float = OVERLAP_FLOOR,
) -> float:
    """First-order pointer shift ``q0 + lambda Re(wv)``."""
    return pointer.q0 + pointer.lam * standard_wv(A, i, f, overlap_floor).real


def _branch_amplitudes(A: Observable, i: StateVector, f: StateVector) -> tuple[np.ndarray, np.ndarray]:
    vecs = A.eigenvectors
    c = (f.amplitudes.conj() @ vecs) * (vecs.conj().T @ i.amplitudes)
    return c, A.eigenvalues


def pointer_mean_exact(
    A: Observable, i: StateVector, f: StateVector, pointer: GaussianPointer
) -> float:
    """Exact mean pointer position after postselection, to all orders in lambda."""
    c, a = _branch_amplitudes(A, i, f)
    lam, delta = pointer.lam, pointer.delta
    diff = a[:, None] - a[None, :]
    gram = np.exp(-(lam * diff) ** 2 / (8.0 * delta**2))
    midpoints = (a[:, None] + a[None, :]) / 2.0
    weights = np.conj(c)[:, None] * c[None, :] * gram
    norm = weights.sum().real
    if norm <= ANNIHILATION_TOL:
        raise PostselectionAnnihilatedError(
            f"postselected pointer norm {norm:.3e} is below {ANNIHILATION_TOL:.0e}"
        )
    return pointer.q0 + lam * float((weights * midpoints).sum().real / norm)


def weak_value(
    A: Observable,
    i: StateVector,
    f: StateVector,
    pointer: GaussianPointer,
    overlap_floor: float = OVERLAP_FLOOR,
) -> WeakValueResult:
    wv = standard_wv(A, i, f, overlap_floor)
    return WeakValueResult(
        wv=wv,
        pointer_mean_linear=pointer.q0 + pointer.lam * wv.real,
        pointer_mean_exact=pointer_mean_exact(A, i, f, pointer),
        overlap=inner(f, i),
    )

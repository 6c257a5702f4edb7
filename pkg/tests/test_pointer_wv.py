import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import postselection
from nullwv.errors import DomainError, OrthogonalPostselectionError, PostselectionAnnihilatedError
from nullwv.hilbert import Observable, StateVector, random_state
from nullwv.pointer_wv import (
    GaussianPointer,
    pointer_mean_exact,
    pointer_mean_linear,
    standard_wv,
    weak_value,
)

N1 = Observable.projector(2, 1)
# Tilted state i = (cos pi/6, sin pi/6), f at gamma = pi/6, q0 = 0, lambda = 0.1, Delta = 10, by adaptive
# quadrature of the two-packet interference integral (see quadrature_mean below).
TILTED_EXACT_MEAN_QUAD = -0.04999812504687411


def quadrature_mean(A, i, f, pointer):
    """Pointer mean by integrating |sum_m c_m phi0(q - lam a_m)|^2 on the real line."""
    vals, vecs = np.linalg.eigh(A.matrix)
    c = (f.amplitudes.conj() @ vecs) * (vecs.conj().T @ i.amplitudes)
    q0, lam, d = pointer.q0, pointer.lam, pointer.delta

    def psi2(q):
        amp = sum(cm * np.exp(-(q - q0 - lam * a) ** 2 / (4 * d**2)) for cm, a in zip(c, vals))
        return abs(amp) ** 2

    lo = q0 + lam * vals.min() - 40 * d
    hi = q0 + lam * vals.max() + 40 * d
    opts = dict(epsabs=0, epsrel=1e-12, limit=400)
    with warnings.catch_warnings():
        # roundoff warnings at epsrel=1e-12 are expected; accuracy is asserted by callers
        warnings.simplefilter("ignore")
        num = quad(lambda q: q * psi2(q), lo, hi, **opts)[0]
        den = quad(psi2, lo, hi, **opts)[0]
    return num / den


def random_hermitian(dim, rng, spread=1.0):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = z + z.conj().T
    w = np.linalg.eigvalsh(h)
    return Observable(h * spread / (w.max() - w.min()))


def test_wv_identical_pre_and_post(tilted_state):
    assert standard_wv(N1, tilted_state, tilted_state) == pytest.approx(0.25, abs=1e-15)


def test_wv_of_eigenstate(rng):
    A = random_hermitian(3, rng)
    for k in range(3):
        eig = StateVector(A.eigenvectors[:, k])
        wv = standard_wv(A, eig, random_state(3, rng))
        assert wv == pytest.approx(A.eigenvalues[k], abs=1e-12)


def test_wv_tilted_point(tilted_state):
    assert standard_wv(N1, tilted_state, postselection(np.pi / 6)) == pytest.approx(-0.5, abs=1e-14)


def test_wv_orthogonal_postselection(tilted_state):
    with pytest.raises(OrthogonalPostselectionError) as info:
        standard_wv(N1, tilted_state, postselection(np.pi / 3))
    assert info.value.overlap < 1e-12


def test_wv_identity_and_global_phase(rng):
    for _ in range(20):
        i, f = random_state(3, rng), random_state(3, rng)
        assert standard_wv(Observable(np.eye(3)), i, f) == pytest.approx(1, abs=1e-12)
        A = random_hermitian(3, rng)
        a, b = np.exp(1j * rng.uniform(0, 7)), np.exp(1j * rng.uniform(0, 7))
        moved = standard_wv(A, StateVector(a * i.amplitudes), StateVector(b * f.amplitudes))
        assert moved == pytest.approx(standard_wv(A, i, f), rel=1e-12, abs=1e-12)


def test_pointer_mean_linear_examples(tilted_state):
    assert pointer_mean_linear(N1, tilted_state, tilted_state, GaussianPointer(1.5, 1.0, 0.0)) == 1.5
    ptr = GaussianPointer(0.0, 10.0, 0.1)
    assert pointer_mean_linear(N1, tilted_state, tilted_state, ptr) == pytest.approx(0.025, abs=1e-15)
    assert pointer_mean_linear(N1, tilted_state, postselection(np.pi / 6), ptr) == pytest.approx(-0.05, abs=1e-15)


def test_pointer_mean_exact_trivial_cases(tilted_state, rng):
    f = postselection(np.pi / 6)
    assert pointer_mean_exact(N1, tilted_state, f, GaussianPointer(0.7, 2.0, 0.0)) == 0.7
    A = random_hermitian(3, rng)
    eig = StateVector(A.eigenvectors[:, 2])
    for delta in (0.1, 1.0, 30.0):
        got = pointer_mean_exact(A, eig, random_state(3, rng), GaussianPointer(0.3, delta, 0.8))
        assert got == pytest.approx(0.3 + 0.8 * A.eigenvalues[2], abs=1e-12)


def test_pointer_mean_exact_tilted_against_quadrature(tilted_state):
    ptr = GaussianPointer(0.0, 10.0, 0.1)
    f = postselection(np.pi / 6)
    assert quadrature_mean(N1, tilted_state, f, ptr) == pytest.approx(TILTED_EXACT_MEAN_QUAD, rel=1e-10)
    exact = pointer_mean_exact(N1, tilted_state, f, ptr)
    assert exact == pytest.approx(TILTED_EXACT_MEAN_QUAD, rel=1e-10)
    # first order in lambda/Delta: residual far below lambda * (lambda/Delta)
    assert abs(exact - pointer_mean_linear(N1, tilted_state, f, ptr)) < 0.1 * (0.1 / 10)


def test_pointer_mean_exact_random_against_quadrature(rng):
    for dim in (2, 3, 4):
        for _ in range(3):
            A = random_hermitian(dim, rng, spread=rng.uniform(0.5, 2))
            i, f = random_state(dim, rng), random_state(dim, rng)
            ptr = GaussianPointer(rng.uniform(-1, 1), rng.uniform(0.3, 3), rng.uniform(0.1, 2))
            assert pointer_mean_exact(A, i, f, ptr) == pytest.approx(quadrature_mean(A, i, f, ptr), rel=1e-8, abs=1e-10)


def test_strong_coupling_separates_packets(tilted_state):
    # lambda >> Delta: the packets no longer overlap and the mean is a Born-weighted average.
    f = postselection(0.2)
    ptr = GaussianPointer(0.0, 0.01, 5.0)
    c0 = np.cos(0.2) * np.cos(np.pi / 6)
    c1 = -np.sin(0.2) * np.sin(np.pi / 6)
    expected = 5.0 * c1**2 / (c0**2 + c1**2)
    assert pointer_mean_exact(N1, tilted_state, f, ptr) == pytest.approx(expected, rel=1e-12)


def test_annihilated_postselection(tilted_state):
    with pytest.raises(PostselectionAnnihilatedError):
        pointer_mean_exact(N1, tilted_state, postselection(np.pi / 3), GaussianPointer(0, 1, 0.0))


def test_pointer_width_must_be_positive():
    with pytest.raises(DomainError):
        GaussianPointer(0.0, 0.0, 0.1)


def test_weak_value_result(tilted_state):
    res = weak_value(N1, tilted_state, postselection(np.pi / 6), GaussianPointer(0.2, 10.0, 0.1))
    assert res.pointer_mean_linear == 0.2 + 0.1 * res.wv.real
    assert res.overlap == pytest.approx(0.5)


def test_exact_mean_finite_near_orthogonality(tilted_state):
    ptr = GaussianPointer(0.0, 10.0, 0.1)
    for eps in (1e-3, 1e-6, 1e-9):
        f = postselection(np.pi / 3 - eps)
        assert np.isfinite(pointer_mean_exact(N1, tilted_state, f, ptr))


def test_residual_is_higher_order_in_lambda(rng):
    checked = 0
    while checked < 50:
        A = random_hermitian(2, rng, spread=rng.uniform(0.5, 2))
        i, f = random_state(2, rng), random_state(2, rng)
        if abs(np.vdot(f.amplitudes, i.amplitudes)) < 0.1:
            continue
        spread = np.ptp(A.eigenvalues)
        delta = spread * rng.uniform(10, 50)
        lam = rng.uniform(0.1, 1.0)
        res = [
            abs(pointer_mean_exact(A, i, f, GaussianPointer(0, delta, l)) - pointer_mean_linear(A, i, f, GaussianPointer(0, delta, l)))
            for l in (lam, lam / 2)
        ]
        assert res[1] * 3 <= res[0]
        checked += 1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ler_instance, random_instance
from lerbeam.subspace import (
    DegenerateProjectionError,
    compute_basis,
    ler_power_closed_form,
    project_out,
    user_power_closed_form,
)


def unit(v):
    return v / np.linalg.norm(v)


def test_single_column(rng):
    _, A, a = random_instance(rng, 6, 1)
    b = compute_basis(A, a)
    assert b.rank == 1 and b.k_init == 1
    assert b.singular_values[0] == pytest.approx(1.0)
    phase = np.vdot(b.left_vectors[:, 0], A[:, 0])
    assert abs(phase) == pytest.approx(1.0)
    np.testing.assert_allclose(b.left_vectors[:, 0] * phase, A[:, 0], atol=1e-12)


def test_basis_invariants(rng):
    _, A, a = random_instance(rng, 16, 40)
    b = compute_basis(A, a)
    B = b.left_vectors
    assert np.max(np.abs(B.conj().T @ B - np.eye(b.rank))) <= 1e-10
    assert np.all(np.diff(b.singular_values) <= 0) and b.singular_values[0] > 0
    assert b.k_init == np.count_nonzero(b.singular_values > 1e-10 * b.singular_values[0])
    recon = B @ np.diag(b.singular_values) @ b.right_vectors_h
    assert np.linalg.norm(A - recon) <= 1e-8 * np.linalg.norm(A)
    # r = N: coefficients carry all of a_us
    assert np.sum(np.abs(b.user_coeffs) ** 2) == pytest.approx(1.0, abs=1e-9)


def test_low_rank_optimality_smoke(rng):
    _, A, a = random_instance(rng, 12, 30)
    b = compute_basis(A, a)
    for k in (1, 3, 6):
        best = np.linalg.norm(A - b.left_vectors[:, :k] @ np.diag(b.singular_values[:k]) @ b.right_vectors_h[:k])
        for _ in range(100):
            M = (rng.normal(size=(12, k)) + 1j * rng.normal(size=(12, k))) @ (
                rng.normal(size=(k, 30)) + 1j * rng.normal(size=(k, 30))) * 0.1
            assert best <= np.linalg.norm(A - M)


def test_project_out_edges(rng):
    _, A, a = random_instance(rng, 10, 25)
    b = compute_basis(A, a)
    np.testing.assert_allclose(project_out(a, b, 0), a)
    assert np.linalg.norm(project_out(a, b, b.rank)) < 1e-8
    p = project_out(a, b, 4)
    assert np.max(np.abs(b.left_vectors[:, :4].conj().T @ p)) <= 1e-10
    with pytest.raises(ValueError):
        project_out(a, b, b.rank + 1)
    with pytest.raises(ValueError):
        project_out(a, b, -1)


def test_project_out_full_rank_matches_gram_projector(rng):
    # r < N: Q = 6 points with N = 16
    _, A, a = random_instance(rng, 16, 6)
    b = compute_basis(A, a)
    assert b.rank == 6
    P = A @ np.linalg.solve(A.conj().T @ A, A.conj().T)
    np.testing.assert_allclose(project_out(a, b, b.rank), a - P @ a, atol=1e-8)


def test_user_power_closed_form(rng):
    _, A, a = random_instance(rng, 16, 40)
    b = compute_basis(A, a)
    assert user_power_closed_form(b, 0) == pytest.approx(1.0)
    w = unit(project_out(a, b, 5))
    assert user_power_closed_form(b, 5) == pytest.approx(abs(np.vdot(w, a)) ** 2, rel=1e-10)
    powers = [user_power_closed_form(b, k) for k in range(b.rank)]
    assert np.all(np.diff(powers) <= 0)
    with pytest.raises(DegenerateProjectionError):
        user_power_closed_form(b, b.rank)


def test_ler_power_closed_form_k0_is_mrt_leakage(rng):
    _, A, a = random_instance(rng, 16, 40)
    b = compute_basis(A, a)
    np.testing.assert_allclose(ler_power_closed_form(b, 0), np.abs(a.conj() @ A) ** 2, rtol=1e-9)
    assert ler_power_closed_form(b, 0, 3) == pytest.approx(abs(np.vdot(a, A[:, 3])) ** 2, rel=1e-9)
    with pytest.raises(DegenerateProjectionError):
        ler_power_closed_form(b, b.rank)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.integers(1, 40), st.data())
def test_closed_forms_match_direct(seed, n, q, data):
    rng = np.random.default_rng(seed)
    _, A, a = random_instance(rng, n, q)
    b = compute_basis(A, a)
    k = data.draw(st.integers(0, b.rank - 1))
    p = project_out(a, b, k)
    if np.linalg.norm(p) ** 2 < 1e-8:
        return
    w = unit(p)
    assert user_power_closed_form(b, k) == pytest.approx(abs(np.vdot(w, a)) ** 2, rel=1e-9)
    direct = np.abs(w.conj() @ A) ** 2
    closed = ler_power_closed_form(b, k)
    # powers are relative to MRT (at most 1); below ~1e-14 both sides are rounding
    np.testing.assert_allclose(closed, direct, rtol=1e-9, atol=1e-14)


def test_with_user_reuses_factors(rng):
    _, A, a = ler_instance(rng)
    b = compute_basis(A, a)
    a2 = unit(rng.normal(size=a.size) + 1j * rng.normal(size=a.size))
    b2 = b.with_user(a2)
    assert b2.left_vectors is b.left_vectors
    ref = compute_basis(A, a2)
    np.testing.assert_allclose(np.abs(b2.user_coeffs), np.abs(ref.user_coeffs), atol=1e-10)


def test_projection_accurate_when_little_survives(rng):
    # user almost inside the dominant subspace: the kept tail is tiny but
    # the normalized direction must still be orthogonal to the removed part
    _, A, a = random_instance(rng, 16, 5)
    b = compute_basis(A, a)
    inside = unit(A @ rng.normal(size=5) + 1e-7 * (rng.normal(size=16) + 1j * rng.normal(size=16)))
    bb = b.with_user(inside)
    p = project_out(bb.user_vector, bb, bb.rank)
    assert user_power_closed_form(bb, bb.rank) == pytest.approx(np.vdot(p, p).real, rel=1e-9)
    w = unit(p)
    assert np.max(np.abs(A.conj().T @ w)) < 1e-8

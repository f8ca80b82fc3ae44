import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from grassfactor.backend import (
    cluster_values,
    eig_unitary,
    polar_project,
    rotation,
    schur_orthogonal,
    svd,
)
from grassfactor.errors import BadDimensions, NotOrthogonal, NotStructured, NotUnitary
from grassfactor.grassmann import group_sample


# ─── schur_orthogonal ────────────────────────────────────────────────────────

def test_schur_identity():
    form = schur_orthogonal(np.eye(4))
    assert form.signs == [1, 1, 1, 1]
    assert form.angles == []
    np.testing.assert_array_equal(form.q, np.eye(4))


def test_schur_single_rotation():
    form = schur_orthogonal(rotation(np.pi / 3))
    assert len(form.blocks) == 1
    assert form.blocks[0].kind == "rotation"
    assert form.angles[0] == pytest.approx(np.pi / 6, abs=1e-12)
    np.testing.assert_allclose(form.matrix(), rotation(np.pi / 3), atol=1e-12)


def test_schur_recovers_conjugated_angles(haar_real):
    q0 = haar_real(6)
    z = q0 @ scipy.linalg.block_diag(rotation(0.4), rotation(1.1), rotation(2.9)) @ q0.T
    form = schur_orthogonal(z)
    assert sorted(form.angles) == pytest.approx([0.2, 0.55, 1.45], abs=1e-10)
    np.testing.assert_allclose(form.matrix(), z, atol=1e-10)
    np.testing.assert_allclose(form.q.T @ form.q, np.eye(6), atol=1e-10)


def test_schur_block_orientation(haar_real):
    """Every rotation block has sin 2θ ≥ 0 in the (1, 2) slot."""
    q0 = haar_real(4)
    z = q0 @ scipy.linalg.block_diag(rotation(-0.8), rotation(2.0)) @ q0.T
    form = schur_orthogonal(z)
    t = form.q.T @ z @ form.q
    assert t[0, 1] > 0 and t[2, 3] > 0
    assert all(0 < a <= np.pi / 2 for a in form.angles)


def test_schur_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonal):
        schur_orthogonal(np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_schur_rejects_nan():
    with pytest.raises(NotStructured):
        schur_orthogonal(np.array([[np.nan, 0.0], [0.0, 1.0]]))


@given(seed=st.integers(0, 10_000), n=st.integers(2, 12), det=st.sampled_from([1, -1]))
@settings(max_examples=40, deadline=None)
def test_schur_minus_one_parity(seed, n, det):
    z = group_sample("so" if det == 1 else "so-", n, seed)
    form = schur_orthogonal(z)
    minus = sum(1 for s in form.signs if s == -1)
    assert minus % 2 == (0 if det == 1 else 1)
    assert np.linalg.norm(form.matrix() - z) <= 1e-10 * n


# ─── eig_unitary ─────────────────────────────────────────────────────────────

def test_eig_identity():
    eig = eig_unitary(np.eye(3))
    np.testing.assert_allclose(eig.phases, [0.0, 0.0, 0.0])


def test_eig_diagonal_sorted_descending():
    eig = eig_unitary(np.diag([1j, -1j]))
    np.testing.assert_allclose(eig.phases, [np.pi / 2, -np.pi / 2], atol=1e-14)


def test_eig_minus_one_phase_is_pi():
    eig = eig_unitary(np.diag([-1.0 + 0j, 1.0]))
    np.testing.assert_allclose(eig.phases, [np.pi, 0.0])


def test_eig_recovers_conjugated_phases(haar_complex):
    q0 = haar_complex(3)
    u = q0 @ np.diag(np.exp(1j * np.array([0.3, -0.3, 0.0]))) @ q0.conj().T
    eig = eig_unitary(u)
    np.testing.assert_allclose(eig.phases, [0.3, 0.0, -0.3], atol=1e-10)
    np.testing.assert_allclose(eig.matrix(), u, atol=1e-10)
    np.testing.assert_allclose(eig.q.conj().T @ eig.q, np.eye(3), atol=1e-10)


def test_eig_rejects_non_unitary():
    with pytest.raises(NotUnitary):
        eig_unitary(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seed=st.integers(0, 10_000), n=st.integers(1, 10))
@settings(max_examples=40, deadline=None)
def test_eig_special_unitary_phase_sum(seed, n):
    u = group_sample("su", n, seed)
    eig = eig_unitary(u)
    total = np.angle(np.exp(1j * eig.phases.sum()))
    assert abs(total) <= 1e-8 * n
    assert np.linalg.norm(eig.matrix() - u) <= 1e-10 * n


# ─── svd and helpers ─────────────────────────────────────────────────────────

def test_svd_zero():
    _, s, _ = svd(np.zeros((2, 3)))
    np.testing.assert_array_equal(s, [0.0, 0.0])


def test_svd_diagonal():
    u, s, v = svd(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(s, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(u), np.eye(2))
    np.testing.assert_allclose(u @ np.diag(s) @ v.T, np.diag([3.0, 1.0]), atol=1e-14)


def test_svd_permutation():
    _, s, _ = svd(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(s, [1.0, 1.0])


def test_svd_rejects_vector():
    with pytest.raises(BadDimensions):
        svd(np.ones(3))


def test_polar_projection_cleans_noise(haar_real, rng):
    q = haar_real(5)
    p = polar_project(q + 1e-9 * rng.standard_normal((5, 5)))
    np.testing.assert_allclose(p.T @ p, np.eye(5), atol=1e-13)
    assert np.linalg.norm(p - q) < 1e-7


def test_cluster_values_single_linkage():
    values = np.array([0.0, 1e-9, 1.0, 2e-9, 1.0 + 5e-9])
    assert cluster_values(values, 1e-8) == [[0, 1, 3], [2, 4]]

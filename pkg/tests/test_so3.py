"""Rotation/vector helper tests with hand-derived oracles."""

import numpy as np
import pytest

from batrack.so3 import (
    DegenerateMatrix,
    NotSkewSymmetric,
    is_rotation,
    project_orthogonal,
    renormalize,
    rodrigues,
    skew,
    unit,
    unskew,
)


def test_skew_matches_cross_product():
    rng = np.random.default_rng(11)
    for _ in range(50):
        v, w = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_allclose(skew(v) @ w, np.cross(v, w), atol=1e-14)


def test_skew_is_antisymmetric_and_unskew_inverts():
    rng = np.random.default_rng(12)
    for _ in range(20):
        v = rng.normal(size=3)
        s = skew(v)
        assert np.max(np.abs(s + s.T)) == 0.0
        np.testing.assert_array_equal(unskew(s), v)


def test_unskew_rejects_non_skew_input():
    with pytest.raises(NotSkewSymmetric):
        unskew(np.eye(3))


def test_unit_normalizes():
    v = np.array([3.0, 0.0, 4.0])
    np.testing.assert_allclose(unit(v), [0.6, 0.0, 0.8], atol=1e-15)
    assert np.linalg.norm(unit(np.array([1e-8, 0.0, 0.0]))) == pytest.approx(1.0)


def test_projector_properties():
    rng = np.random.default_rng(13)
    for _ in range(20):
        b = unit(rng.normal(size=3))
        p = project_orthogonal(b)
        np.testing.assert_allclose(p, p.T, atol=1e-15)          # symmetric
        np.testing.assert_allclose(p @ p, p, atol=1e-14)        # idempotent
        np.testing.assert_allclose(p @ b, np.zeros(3), atol=1e-14)  # kills b
        v = rng.normal(size=3)
        np.testing.assert_allclose(b @ (p @ v), 0.0, atol=1e-14)


def test_rodrigues_zero_angle_is_identity():
    np.testing.assert_array_equal(rodrigues(0.0, np.array([0.0, 0.0, 1.0])), np.eye(3))


def test_rodrigues_quarter_turn_about_e3():
    r = rodrigues(np.pi / 2.0, np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(r @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-15)


def test_rodrigues_produces_rotations_and_fixes_axis():
    rng = np.random.default_rng(14)
    for _ in range(30):
        axis = unit(rng.normal(size=3))
        angle = rng.uniform(-2.0 * np.pi, 2.0 * np.pi)
        r = rodrigues(angle, axis)
        assert is_rotation(r, tol=1e-12)
        np.testing.assert_allclose(r @ axis, axis, atol=1e-14)


def test_rodrigues_composes_about_common_axis():
    axis = unit(np.array([1.0, 2.0, -0.5]))
    a, b = 0.7, -1.3
    np.testing.assert_allclose(
        rodrigues(a, axis) @ rodrigues(b, axis), rodrigues(a + b, axis), atol=1e-14
    )


def test_renormalize_small_drift_recovers_rotation():
    rng = np.random.default_rng(15)
    r0 = rodrigues(0.9, unit(np.array([0.2, -1.0, 0.4])))
    drifted = r0 + 1e-6 * rng.normal(size=(3, 3))
    r = renormalize(drifted)
    assert is_rotation(r, tol=1e-12)
    # stays near the original rotation
    assert np.max(np.abs(r - r0)) < 1e-5


def test_renormalize_large_drift_matches_svd_polar_factor():
    rng = np.random.default_rng(16)
    m = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
    assert np.linalg.det(m) > 0.0
    r = renormalize(m)
    u, _, vt = np.linalg.svd(m)
    np.testing.assert_allclose(r, u @ vt, atol=1e-12)
    assert is_rotation(r, tol=1e-12)


def test_renormalize_idempotent_on_rotations():
    r0 = rodrigues(-2.1, unit(np.array([0.0, 1.0, 1.0])))
    np.testing.assert_allclose(renormalize(r0), r0, atol=1e-14)


def test_renormalize_rejects_reflections_and_singular_input():
    refl = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(DegenerateMatrix):
        renormalize(refl)
    with pytest.raises(DegenerateMatrix):
        renormalize(np.zeros((3, 3)))


def test_is_rotation_rejects_scaled_identity():
    assert is_rotation(np.eye(3))
    assert not is_rotation(2.0 * np.eye(3))
    assert not is_rotation(np.diag([1.0, 1.0, -1.0]))

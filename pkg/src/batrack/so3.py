"""Small SO(3) / 3-vector helpers used throughout the package.

Conventions: rotation matrices map body coordinates into the inertial frame,
``v_inertial = R @ v_body``.  All arrays are float64 of shape (3,) or (3, 3).
"""

from __future__ import annotations

import numpy as np

# Orthonormality / unit-norm tolerance used by the rotation sanity checks.
ROT_TOL = 1e-9
# Skew-symmetry tolerance for unskew().
SKEW_TOL = 1e-9


class NotSkewSymmetric(ValueError):
    """unskew() input is not skew-symmetric within tolerance."""


class DegenerateMatrix(ValueError):
    """renormalize() input is singular or reflection-like (det <= 0)."""


def skew(v: np.ndarray) -> np.ndarray:
    """Return the skew-symmetric matrix S(v) with S(v) @ w == cross(v, w)."""
    x, y, z = v
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def unskew(m: np.ndarray) -> np.ndarray:
    """Inverse of skew(). Raises NotSkewSymmetric if m + m.T is not ~0."""
    if np.max(np.abs(m + m.T)) > SKEW_TOL:
        raise NotSkewSymmetric(f"max |m + m.T| = {np.max(np.abs(m + m.T)):.3e}")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def unit(v: np.ndarray) -> np.ndarray:
    """v / ||v||. No guard: callers check degeneracy where it matters."""
    return v / np.linalg.norm(v)


def project_orthogonal(b: np.ndarray) -> np.ndarray:
    """Orthogonal projector I - b b^T onto the plane normal to unit vector b."""
    return np.eye(3) - np.outer(b, b)


def rodrigues(angle: float, axis: np.ndarray) -> np.ndarray:
    """Rotation matrix for a rotation of `angle` radians about unit `axis`.

    R = I + sin(angle) S(axis) + (1 - cos(angle)) S(axis)^2, exact at angle 0.
    """
    s = skew(axis)
    return np.eye(3) + np.sin(angle) * s + (1.0 - np.cos(angle)) * (s @ s)


def renormalize(r: np.ndarray) -> np.ndarray:
    """Project a drifted rotation matrix back onto SO(3) (polar factor).

    Uses the SVD polar decomposition for large drift; for the tiny drift seen
    after a single integration step (Frobenius error < 1e-4) two Newton-type
    iterations R <- R (3I - R^T R)/2 reach the same factor at machine
    precision without the SVD cost.  Raises DegenerateMatrix when det(r) <= 0
    (no nearby proper rotation).
    """
    if np.linalg.det(r) <= 0.0:
        raise DegenerateMatrix(f"det = {np.linalg.det(r):.3e}")
    err = r.T @ r - np.eye(3)
    if np.sqrt(np.sum(err * err)) < 1e-4:
        r = r @ (1.5 * np.eye(3) - 0.5 * (r.T @ r))
        return r @ (1.5 * np.eye(3) - 0.5 * (r.T @ r))
    u, _, vt = np.linalg.svd(r)
    out = u @ vt
    if np.linalg.det(out) < 0.0:  # not reachable for det(r) > 0, kept as a guard
        out = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return out


def is_rotation(r: np.ndarray, tol: float = ROT_TOL) -> bool:
    """True when R^T R = I and det R = 1 within tol."""
    return (
        np.max(np.abs(r.T @ r - np.eye(3))) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )

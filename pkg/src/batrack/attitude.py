"""Thrust/attitude allocation with a field-of-view dead-zone correction.

The translational command u must be realized by tilting the body: thrust acts
along -z_B, so the preferred body z is z* = -(u - g e3)/|u - g e3|.  The
camera cannot see the target when the bearing falls inside either cone around
the +/- body-z axis (half-angle pi/2 - phi about the camera plane), i.e.
visibility requires

    -cos(phi) <= b . z_B <= cos(phi).

When z* violates that band it is rotated about the yaw axis y = z* x b /
|z* x b| by exactly the angular deficit, landing on the nearest cone boundary
(|b . z_des| = cos(phi)).  Yaw is chosen to keep the camera's forward axis on
the target plane: x_des = y x z_des, R_des = [x_des y z_des].

Attitude is tracked with a proportional law on the SO(3) error,
omega = -K_R * 0.5 * unskew(R_des^T R - R^T R_des), and thrust is the
projection of the desired force on the current body z, clamped to [0, T_max].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import VehicleParams
from .so3 import rodrigues, unit, unskew

E3 = np.array([0.0, 0.0, 1.0])

# |u - g e3| below this has no defined thrust direction.
THRUST_TOL = 1e-9
# |z* x b| below this (sin of the separation angle) makes yaw choice degenerate.
YAW_TOL = 1e-6
# Below this |z* x b| the fresh cross product is so ill-conditioned that the
# yaw reference would swing wildly step to step (z* sweeping past +/-b); the
# allocator holds the previous yaw axis instead to keep R_des continuous.
YAW_CONTINUITY_TOL = 5e-2
# Orthogonality tolerance for assembling R_des.
ORTHO_TOL = 1e-6


class DegenerateThrust(RuntimeError):
    """Commanded acceleration equals gravity: thrust direction undefined."""


class DegenerateYaw(RuntimeError):
    """Bearing is (anti)parallel to the desired body z: yaw axis undefined."""


class NonOrthogonal(ValueError):
    """build_attitude inputs are not orthogonal within tolerance."""


@dataclass
class VisibilityConfig:
    """Dead-zone geometry: cone parameter phi (radians), constraint |b.z_B| <= cos(phi)."""
    cone_half_angle: float = math.radians(75.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.cone_half_angle < 0.5 * math.pi:
            raise ValueError(
                f"cone_half_angle must lie in (0, pi/2), got {self.cone_half_angle}"
            )

    @property
    def cos_phi(self) -> float:
        return math.cos(self.cone_half_angle)


@dataclass
class AttitudeCommand:
    thrust: float
    omega: np.ndarray
    R_des: np.ndarray   # tracks z_des when the correction is applied, else z*
    z_des: np.ndarray   # dead-zone-corrected body-z command (always computed)
    y_des: np.ndarray
    psi: float          # correction magnitude, >= 0
    margin_cmd: float   # cos(phi) - |b . z_des|, >= -1e-9 by construction


def desired_z_star(u: np.ndarray, gravity: float) -> np.ndarray:
    """Unconstrained desired body-z direction for acceleration command u."""
    f = u - gravity * E3
    n = np.linalg.norm(f)
    if n < THRUST_TOL:
        raise DegenerateThrust(f"|u - g e3| = {n:.3e}")
    return -f / n


def desired_y(z_star: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Yaw axis y = z* x b / |z* x b| (also the correction rotation axis)."""
    c = np.cross(z_star, b)
    n = np.linalg.norm(c)
    if n < YAW_TOL:
        raise DegenerateYaw(f"|z* x b| = {n:.3e}")
    return c / n


def visibility_correction(
    z_star: np.ndarray, b: np.ndarray, y_des: np.ndarray, cfg: VisibilityConfig
) -> tuple[float, np.ndarray]:
    """Rotate z* about y_des onto the nearest dead-zone boundary if needed.

    Returns (psi, z_des) with psi >= 0 the correction magnitude and
    |b . z_des| <= cos(phi) + 1e-9.  The signed rotation with the smallest
    |angle| that reaches the violated boundary is solved exactly, so the
    result is correct for any axis y_des perpendicular to z*, not only the
    canonical z* x b (the continuity fallbacks may hand in a different axis).
    """
    c = float(np.clip(b.dot(z_star), -1.0, 1.0))
    cphi = cfg.cos_phi
    if -cphi <= c <= cphi:
        return 0.0, z_star
    # In the orthonormal frame {z*, y, y x z*} the bearing has coordinates
    # (c, b.y, s) with s = (y x z*).b, and rotating z* about y by psi gives
    # b.z_des = c cos(psi) + s sin(psi) = rho cos(psi - beta).  Solving
    # rho cos(psi - beta) = +/-cos(phi) for the smaller |psi| lands exactly on
    # the nearest boundary for any axis y perpendicular to z*, including the
    # continuity fallbacks where y is not z* x b.  (rho >= |c| > cos(phi) in
    # the violated branches, so a solution always exists.)
    s = float(np.cross(y_des, z_star).dot(b))
    rho = math.hypot(c, s)
    beta = math.atan2(s, c)
    spread = math.acos(min(max((cphi if c > 0.0 else -cphi) / rho, -1.0), 1.0))
    candidates = [beta - spread, beta + spread]
    signed = min(
        (math.atan2(math.sin(a), math.cos(a)) for a in candidates), key=abs
    )
    z_des = rodrigues(signed, y_des) @ z_star
    return abs(signed), unit(z_des)


def build_attitude(z_des: np.ndarray, y_des: np.ndarray) -> np.ndarray:
    """Assemble R_des = [x_des y_des z_des] with x_des = y_des x z_des."""
    if abs(y_des.dot(z_des)) > ORTHO_TOL:
        raise NonOrthogonal(f"|y.z| = {abs(y_des.dot(z_des)):.3e}")
    x_des = np.cross(y_des, z_des)
    return np.column_stack((x_des, y_des, z_des))


def thrust_from_accel(u: np.ndarray, z_body: np.ndarray, params: VehicleParams) -> float:
    """Collective thrust realizing u as well as the current attitude allows."""
    f_des = params.mass * (u - params.gravity * E3)
    return min(max(-z_body.dot(f_des), 0.0), params.thrust_max)


def attitude_rate_command(R: np.ndarray, R_des: np.ndarray, K_R: np.ndarray) -> np.ndarray:
    """Proportional body-rate command opposing the SO(3) attitude error."""
    e_R = 0.5 * unskew(R_des.T @ R - R.T @ R_des)
    return -(K_R @ e_R)


def allocate(
    u: np.ndarray,
    b: np.ndarray,
    R: np.ndarray,
    K_R: np.ndarray,
    vis: VisibilityConfig,
    params: VehicleParams,
    prev_y: np.ndarray | None = None,
    apply_correction: bool = True,
) -> AttitudeCommand:
    """Full allocation pipeline for one control step.

    The yaw axis keeps step-to-step continuity: when the bearing passes close
    to +/-z* (|z* x b| < YAW_CONTINUITY_TOL) the fresh cross product is
    ill-conditioned, so the previous y_des is re-orthogonalized against z* and
    reused (then the projection of e2, then e1); otherwise the cross product
    is taken but sign-matched to the previous axis so R_des never yaw-flips by
    180 degrees.

    The dead-zone correction is always computed and reported (psi and the
    commanded-visibility margin), but R_des tracks the corrected axis only
    when apply_correction is true; otherwise it tracks z* directly.  Flying
    z* keeps the force command intact through bearing geometries where the
    visibility band is momentarily unsatisfiable, at the cost of letting the
    realized margin go negative there.
    """
    z_star = desired_z_star(u, params.gravity)
    cross = np.cross(z_star, b)
    n = float(np.linalg.norm(cross))
    if n >= YAW_CONTINUITY_TOL:
        y = cross / n
        if prev_y is not None and float(y.dot(prev_y)) < 0.0:
            y = -y
    else:
        y = None
        for cand in ([prev_y] if prev_y is not None else []) + [np.array([0.0, 1.0, 0.0])]:
            proj = cand - cand.dot(z_star) * z_star
            pn = np.linalg.norm(proj)
            if pn >= YAW_TOL:
                y = proj / pn
                break
        if y is None:
            y = np.array([1.0, 0.0, 0.0])  # z* ~ +/-e2, where e1 is exactly orthogonal
    psi, z_des = visibility_correction(z_star, b, y, vis)
    R_des = build_attitude(z_des if apply_correction else z_star, y)
    thrust = thrust_from_accel(u, R[:, 2], params)
    omega = attitude_rate_command(R, R_des, K_R)
    margin = vis.cos_phi - abs(float(b.dot(z_des)))
    return AttitudeCommand(thrust, omega, R_des, z_des, y, psi, margin)

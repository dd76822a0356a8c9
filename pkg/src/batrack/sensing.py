"""Spherical-target bearing-angle camera model and the scaled-velocity estimator.

The camera reports two body-frame unit vectors: the bearing to the target
center and a bearing to the target's apparent rim (tangent direction).  The
half-angle theta subtended between them encodes distance: sin(theta) = r / d,
so the dimensionless size x := sin(theta) is measurable without knowing r.

From consecutive bearing/angle samples the estimator reconstructs the scaled
relative velocity

    w = (v_T - v_B) / r = b'/sin(theta) - b cos(theta)/sin^2(theta) theta'

using backward differences (optionally low-pass filtered) for b' and theta'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RigidBodyState, TargetState
from .so3 import rodrigues, unit

# Below this half-angle the 1/sin and 1/sin^2 factors are numerically unsafe.
THETA_MIN = 1e-4
# Noisy theta is clamped into [THETA_MIN, THETA_MAX] to keep the type lawful.
THETA_MAX = 0.5 * math.pi - 1e-9


class InsideTarget(RuntimeError):
    """Vehicle is at or inside the target sphere; bearing geometry undefined."""


class SingularAngle(RuntimeError):
    """Half-angle below THETA_MIN: scaled-velocity reconstruction unsafe."""


@dataclass
class BearingAngleObservation:
    """One camera sample.

    b_body/b_tangent_body are unit vectors in the body frame, theta their
    subtended half-angle, x = sin(theta).  b_inertial = R @ b_body is carried
    along with the attitude R that produced it so downstream consumers never
    need to re-fetch vehicle state.
    """
    b_body: np.ndarray
    b_tangent_body: np.ndarray
    theta: float
    x: float
    b_inertial: np.ndarray
    attitude: np.ndarray


@dataclass
class NoiseConfig:
    """Measurement corruption levels (standard deviations, in degrees)."""
    bearing_std_deg: float = 0.0
    theta_std_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.bearing_std_deg < 0.0 or self.theta_std_deg < 0.0:
            raise ValueError("noise standard deviations must be >= 0")

    @property
    def enabled(self) -> bool:
        return self.bearing_std_deg > 0.0 or self.theta_std_deg > 0.0


def _perp_unit(b: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to b: projected e3, else e2."""
    a = np.array([-b[0] * b[2], -b[1] * b[2], 1.0 - b[2] * b[2]])  # (I - b b^T) e3
    n = np.linalg.norm(a)
    if n < 1e-9:
        a = np.array([-b[0] * b[1], 1.0 - b[1] * b[1], -b[1] * b[2]])  # (I - b b^T) e2
        n = np.linalg.norm(a)
    return a / n


def observe(vehicle: RigidBodyState, target: TargetState, r_true: float) -> BearingAngleObservation:
    """Noiseless camera sample of the target sphere from the current states.

    Raises InsideTarget when the separation does not exceed r_true.  The
    tangent bearing is synthesized at angle theta from the center bearing,
    within the plane spanned by the bearing and a deterministic perpendicular.
    """
    rel = target.p - vehicle.p
    d = np.linalg.norm(rel)
    if d <= r_true:
        raise InsideTarget(f"separation {d:.6g} <= target radius {r_true:.6g}")
    b_inertial = rel / d
    R = vehicle.R
    b_body = R.T @ b_inertial
    x = r_true / d
    theta = math.asin(x)
    tangent = math.cos(theta) * b_body + math.sin(theta) * _perp_unit(b_body)
    return BearingAngleObservation(b_body, tangent, theta, x, b_inertial, R)


def add_noise(
    obs: BearingAngleObservation,
    cfg: NoiseConfig,
    rng: np.random.Generator,
) -> BearingAngleObservation:
    """Corrupt an observation: small random rotation of the bearing + angle noise.

    The bearing is rotated about an axis drawn uniformly in its orthogonal
    plane by an angle ~ N(0, bearing_std); theta gets additive N(0, theta_std)
    and is clamped into [THETA_MIN, THETA_MAX].  Draw order (azimuth, rotation
    angle, theta noise) is fixed so seeded runs reproduce exactly.
    """
    b = obs.b_body
    u1 = _perp_unit(b)
    u2 = np.cross(b, u1)
    azimuth = rng.uniform(0.0, 2.0 * math.pi)
    rot_angle = rng.normal(0.0, math.radians(cfg.bearing_std_deg))
    dtheta = rng.normal(0.0, math.radians(cfg.theta_std_deg))

    axis = math.cos(azimuth) * u1 + math.sin(azimuth) * u2
    b_noisy = unit(rodrigues(rot_angle, axis) @ b)
    theta_noisy = min(max(obs.theta + dtheta, THETA_MIN), THETA_MAX)
    tangent = math.cos(theta_noisy) * b_noisy + math.sin(theta_noisy) * _perp_unit(b_noisy)
    return BearingAngleObservation(
        b_body=b_noisy,
        b_tangent_body=tangent,
        theta=theta_noisy,
        x=math.sin(theta_noisy),
        b_inertial=obs.attitude @ b_noisy,
        attitude=obs.attitude,
    )


class Differentiator:
    """Backward-difference estimator for the scaled relative velocity w.

    Keeps the previous sample and, when a cutoff frequency is set, smooths the
    raw derivative estimates with two cascaded identical one-pole low-pass
    sections before assembling w.  Two poles matter: differencing white
    measurement noise tilts its spectrum up by +20 dB/decade, so behind a
    single pole the noise floor stays flat all the way to Nyquist and the
    variance scales with cutoff x rate; the second pole rolls the product off
    and drops the variance to cutoff^3 x sample-interval, orders of magnitude
    lower at Hz-scale cutoffs.  That suppression is what keeps the radius
    observer from rectifying measurement noise (its update is a non-negative
    quadratic in the velocity error, so any broadband noise in w becomes a
    one-way drift).

    The first call has no history and returns zero (harmless when starting
    from rest; in general the first control step simply sees w = 0).
    """

    def __init__(self, cutoff_hz: float | None = None):
        if cutoff_hz is not None and cutoff_hz <= 0.0:
            raise ValueError(f"cutoff_hz must be positive or None, got {cutoff_hz}")
        self.cutoff_hz = cutoff_hz
        self._prev_b: np.ndarray | None = None
        self._prev_theta = 0.0
        self._prev_t = 0.0
        self._db: np.ndarray | None = None      # first smoothing stage
        self._dtheta = 0.0
        self._db2: np.ndarray | None = None     # second smoothing stage
        self._dtheta2 = 0.0

    def update(self, obs: BearingAngleObservation, t: float) -> np.ndarray:
        """Consume one observation at time t, return the current w estimate."""
        if obs.theta < THETA_MIN:
            raise SingularAngle(f"theta = {obs.theta:.3e} < {THETA_MIN}")
        b = obs.b_inertial
        if self._prev_b is None:
            self._prev_b, self._prev_theta, self._prev_t = b, obs.theta, t
            return np.zeros(3)
        dt = t - self._prev_t
        if dt <= 0.0:
            raise ValueError(f"non-increasing sample times: {self._prev_t} -> {t}")
        db_raw = (b - self._prev_b) / dt
        dtheta_raw = (obs.theta - self._prev_theta) / dt
        if self.cutoff_hz is None:
            self._db2, self._dtheta2 = db_raw, dtheta_raw
        else:
            if self._db is None:
                # Start the smoothers at zero rather than at the first raw
                # difference: one sample of measurement noise divided by dt is
                # enormous, and seeding with it would take 1/cutoff seconds to
                # wash out while the velocity estimate reads garbage.
                self._db = self._db2 = np.zeros(3)
                self._dtheta = self._dtheta2 = 0.0
            alpha = math.exp(-2.0 * math.pi * self.cutoff_hz * dt)
            self._db = alpha * self._db + (1.0 - alpha) * db_raw
            self._dtheta = alpha * self._dtheta + (1.0 - alpha) * dtheta_raw
            self._db2 = alpha * self._db2 + (1.0 - alpha) * self._db
            self._dtheta2 = alpha * self._dtheta2 + (1.0 - alpha) * self._dtheta
        self._prev_b, self._prev_theta, self._prev_t = b, obs.theta, t

        s = obs.x  # sin(theta)
        c = math.cos(obs.theta)
        return self._db2 / s - b * (c / (s * s) * self._dtheta2)

"""World models: multirotor rigid-body translation/attitude and the moving target.

Inertial frame is z-down: gravity is +g e3 and altitudes are negative z.  The
vehicle is a thrust-vectoring rigid body,

    p_B' = v_B
    v_B' = g e3 - (T/m) R e3
    R'   = R S(omega)

driven by collective thrust T along the body -z axis and a commanded body
angular velocity omega (no rotational inertia model; omega is tracked
instantaneously, which is the usual kinematic-level abstraction).  The target
is a double integrator with constant acceleration.

Integration is classical fixed-step RK4 over the coupled state, with the
attitude re-projected onto SO(3) after every step and thrust clamped to
[0, T_max] before integrating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .so3 import renormalize, skew

E3 = np.array([0.0, 0.0, 1.0])


class NonFiniteState(RuntimeError):
    """Integrator produced NaN/inf state."""


@dataclass
class RigidBodyState:
    """Vehicle state: position p, velocity v (inertial), attitude R (body->inertial)."""
    p: np.ndarray
    v: np.ndarray
    R: np.ndarray


@dataclass
class TargetState:
    """Target state: position, velocity and its constant acceleration."""
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray


@dataclass
class WorldState:
    vehicle: RigidBodyState
    target: TargetState


@dataclass
class VehicleParams:
    mass: float
    gravity: float = 9.8
    thrust_max: float = 34.0

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.thrust_max <= 0.0:
            raise ValueError(f"thrust_max must be positive, got {self.thrust_max}")


@dataclass
class ActuationInput:
    """Zero-order-held actuation over one step: thrust [N], body rates [rad/s]."""
    thrust: float
    omega: np.ndarray


def vehicle_derivative(
    p: np.ndarray,
    v: np.ndarray,
    R: np.ndarray,
    thrust: float,
    omega: np.ndarray,
    params: VehicleParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(p', v', R') for the thrust-vectoring rigid body."""
    # R @ e3 is just the third column of R.
    dv = params.gravity * E3 - (thrust / params.mass) * R[:, 2]
    dR = R @ skew(omega)
    return v, dv, dR


def target_derivative(target: TargetState) -> tuple[np.ndarray, np.ndarray]:
    """(p', v') for the constant-acceleration target."""
    return target.v, target.a


def step(state: WorldState, actuation: ActuationInput, params: VehicleParams, dt: float) -> WorldState:
    """Advance the world one RK4 step of size dt under zero-order-held actuation.

    Thrust is clamped to [0, thrust_max] (defensively; the command side clamps
    too).  The new attitude is re-orthonormalized.  Raises NonFiniteState if
    any output is not finite.
    """
    T = min(max(actuation.thrust, 0.0), params.thrust_max)
    w = actuation.omega
    veh, tgt = state.vehicle, state.target
    p, v, R = veh.p, veh.v, veh.R

    k1p, k1v, k1R = vehicle_derivative(p, v, R, T, w, params)
    k2p, k2v, k2R = vehicle_derivative(p + 0.5 * dt * k1p, v + 0.5 * dt * k1v, R + 0.5 * dt * k1R, T, w, params)
    k3p, k3v, k3R = vehicle_derivative(p + 0.5 * dt * k2p, v + 0.5 * dt * k2v, R + 0.5 * dt * k2R, T, w, params)
    k4p, k4v, k4R = vehicle_derivative(p + dt * k3p, v + dt * k3v, R + dt * k3R, T, w, params)
    sixth = dt / 6.0
    p_new = p + sixth * (k1p + 2.0 * (k2p + k3p) + k4p)
    v_new = v + sixth * (k1v + 2.0 * (k2v + k3v) + k4v)
    R_new = renormalize(R + sixth * (k1R + 2.0 * (k2R + k3R) + k4R))

    # Same RK4 tableau for the target.
    tp, tv, ta = tgt.p, tgt.v, tgt.a
    k1tp, k1tv = target_derivative(tgt)
    k2tp = tv + 0.5 * dt * k1tv
    k3tp = tv + 0.5 * dt * k1tv  # target acceleration is constant across stages
    k4tp = tv + dt * k1tv
    tp_new = tp + sixth * (k1tp + 2.0 * (k2tp + k3tp) + k4tp)
    tv_new = tv + dt * k1tv  # all four velocity stages equal the constant acceleration

    if not (
        np.isfinite(p_new).all()
        and np.isfinite(v_new).all()
        and np.isfinite(R_new).all()
        and np.isfinite(tp_new).all()
        and np.isfinite(tv_new).all()
    ):
        raise NonFiniteState(f"non-finite state after step (t step={dt})")

    return WorldState(RigidBodyState(p_new, v_new, R_new), TargetState(tp_new, tv_new, ta))


def step_direct(state: WorldState, accel: np.ndarray, dt: float) -> WorldState:
    """Diagnostic stepping mode: apply `accel` directly as the vehicle acceleration.

    Attitude is left untouched.  Used for idealized closed-loop checks where
    the commanded acceleration must be realized exactly; both subsystems are
    piecewise constant-acceleration, so the quadratic update is the exact flow.
    """
    veh, tgt = state.vehicle, state.target
    p_new = veh.p + dt * veh.v + (0.5 * dt * dt) * accel
    v_new = veh.v + dt * accel
    tp_new = tgt.p + dt * tgt.v + (0.5 * dt * dt) * tgt.a
    tv_new = tgt.v + dt * tgt.a
    if not (np.isfinite(p_new).all() and np.isfinite(v_new).all() and np.isfinite(tp_new).all()):
        raise NonFiniteState("non-finite state after direct-acceleration step")
    return WorldState(RigidBodyState(p_new, v_new, veh.R), TargetState(tp_new, tv_new, tgt.a))

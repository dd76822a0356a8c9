"""Adaptive bearing-angle servo law.

Works entirely in measurement coordinates: inertial bearing b (unit), size
x = sin(theta), and scaled relative velocity w = (v_T - v_B)/r, whose dynamics
are

    b' = x P_b w,   x' = -x^2 b.w,   w' = (a_T - u)/r,

with P_b = I - b b^T and u the commanded vehicle acceleration.  Neither the
target radius r nor the scaled target acceleration rho = a_T/r is known; both
are estimated online (r_hat, rho_hat).  The backstepping structure:

    errors      delta1 = b - b*, delta2 = x - x*, delta3 = w - w_d
    reference   w_d  = (k1/x) P_b b* + (k2/x^2) delta2 b
    virtual     u0   = rho_hat - w_d' - x P_b b* - x^2 delta2 b + K3 delta3
    command     u    = r_hat u0
    adaptation  r_hat'   = k_r delta3.u0
                rho_hat' = K_rho delta3

which renders V3 = V2 + r_tilde^2/(2 k_r r) + rho_tilde.K_rho^-1 rho_tilde/2
non-increasing along exact closed-loop trajectories.  The w_d' feedforward is
optional (off by default); when enabled it is either a backward difference or
the closed-form rate (valid when exact w is available).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sin

import numpy as np

# Size saturation: 1/x and 1/x^2 factors are evaluated at max(x, X_MIN).
X_MIN = 1e-3
# The radius estimate is floored here; the command u = r_hat u0 never flips sign.
R_HAT_MIN = 1e-3


class SingularGain(ValueError):
    """A gain matrix that must be invertible is (numerically) singular."""


def _check_spd(name: str, m: np.ndarray) -> None:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got {m.shape}")
    if np.max(np.abs(m - m.T)) > 1e-9:
        raise ValueError(f"{name} must be symmetric")
    if np.min(np.linalg.eigvalsh(m)) <= 0.0:
        raise ValueError(f"{name} must be positive definite")


@dataclass
class ReferenceSpec:
    """Servo setpoint: desired inertial bearing and desired half-angle."""
    b_star: np.ndarray
    theta_star: float

    def __post_init__(self) -> None:
        self.b_star = np.asarray(self.b_star, dtype=float)
        n = np.linalg.norm(self.b_star)
        if n < 1e-12:
            raise ValueError("b_star must be a nonzero direction")
        self.b_star = self.b_star / n
        if not 0.0 < self.theta_star < 0.5 * np.pi:
            raise ValueError(f"theta_star must lie in (0, pi/2), got {self.theta_star}")

    @property
    def x_star(self) -> float:
        # exact, not the small-angle shortcut
        return sin(self.theta_star)


@dataclass
class GainConfig:
    k1: float = 0.4
    k2: float = 1.2
    K3: np.ndarray = field(default_factory=lambda: 0.7 * np.eye(3))
    k_r: float = 0.1
    K_rho: np.ndarray = field(default_factory=lambda: 1e-4 * np.eye(3))
    K_R: np.ndarray = field(default_factory=lambda: 5.0 * np.eye(3))
    include_wd_dot: bool = False

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "k_r"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        self.K3 = np.asarray(self.K3, dtype=float)
        self.K_rho = np.asarray(self.K_rho, dtype=float)
        self.K_R = np.asarray(self.K_R, dtype=float)
        _check_spd("K3", self.K3)
        _check_spd("K_rho", self.K_rho)
        _check_spd("K_R", self.K_R)


@dataclass
class ControllerMemory:
    """Mutable controller state: the two online estimates plus w_d history."""
    r_hat: float = 1.0
    rho_hat: np.ndarray = field(default_factory=lambda: np.zeros(3))
    prev_w_d: np.ndarray | None = None


@dataclass
class ErrorTriple:
    delta1: np.ndarray  # bearing error b - b*, norm < 2
    delta2: float       # size error x - x*, |delta2| <= 1
    delta3: np.ndarray  # scaled-velocity error w - w_d


def compute_errors(
    b: np.ndarray, x: float, w: np.ndarray, w_d: np.ndarray, ref: ReferenceSpec
) -> ErrorTriple:
    return ErrorTriple(b - ref.b_star, x - ref.x_star, w - w_d)


def desired_velocity(b: np.ndarray, x: float, ref: ReferenceSpec, gains: GainConfig) -> np.ndarray:
    """Scaled-velocity reference w_d steering b -> b* and x -> x*.

    The 1/x factors saturate at X_MIN; the size error itself uses the raw x.
    """
    xe = max(x, X_MIN)
    bb = b.dot(ref.b_star)
    p_b_star = ref.b_star - bb * b  # P_b b*
    return (gains.k1 / xe) * p_b_star + (gains.k2 / (xe * xe)) * (x - ref.x_star) * b


def desired_velocity_rate(
    b: np.ndarray, x: float, w: np.ndarray, ref: ReferenceSpec, gains: GainConfig
) -> np.ndarray:
    """Closed-form d(w_d)/dt along the measurement dynamics, given exact w.

    Substitutes b' = x P_b w and x' = -x^2 b.w into the chain rule.  Only
    meaningful with exact signals (diagnostics); when x is at the saturation
    floor the rate of the frozen 1/x factors is taken as zero.
    """
    bw = b.dot(w)
    db = x * (w - bw * b)          # x P_b w
    dx = -(x * x) * bw
    bb = b.dot(ref.b_star)
    p_b_star = ref.b_star - bb * b
    delta2 = x - ref.x_star
    xe = max(x, X_MIN)
    sat = x > X_MIN
    inv_rate = -dx / (xe * xe) if sat else 0.0   # d/dt (1/x)
    term1 = gains.k1 * (inv_rate * p_b_star + (1.0 / xe) * (-db * bb - b * db.dot(ref.b_star)))
    inv2_rate = -2.0 * dx / (xe ** 3) if sat else 0.0  # d/dt (1/x^2)
    term2 = gains.k2 * (
        (inv2_rate * delta2 + dx / (xe * xe)) * b + (delta2 / (xe * xe)) * db
    )
    return term1 + term2


def control_law(
    err: ErrorTriple,
    b: np.ndarray,
    x: float,
    ref: ReferenceSpec,
    mem: ControllerMemory,
    gains: GainConfig,
    wd_dot: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Virtual input u0 and acceleration command u = r_hat * u0."""
    p_b_star = ref.b_star - b.dot(ref.b_star) * b
    u0 = (
        mem.rho_hat
        - wd_dot
        - x * p_b_star
        - (x * x) * err.delta2 * b
        + gains.K3 @ err.delta3
    )
    return u0, mem.r_hat * u0


def wd_dot_estimate(mem: ControllerMemory, w_d: np.ndarray, dt: float) -> np.ndarray:
    """Backward-difference estimate of w_d'. Zero on the first sample."""
    prev = mem.prev_w_d
    mem.prev_w_d = w_d
    if prev is None:
        return np.zeros(3)
    return (w_d - prev) / dt


def update_observers(
    mem: ControllerMemory, err: ErrorTriple, u0: np.ndarray, gains: GainConfig, dt: float
) -> None:
    """Forward-Euler update of r_hat (floored at R_HAT_MIN) and rho_hat."""
    mem.r_hat = max(mem.r_hat + dt * gains.k_r * err.delta3.dot(u0), R_HAT_MIN)
    mem.rho_hat = mem.rho_hat + dt * (gains.K_rho @ err.delta3)


@dataclass
class LyapunovSample:
    V1: float
    V2: float
    V3: float
    W: float


def lyapunov_diagnostics(
    err: ErrorTriple,
    b: np.ndarray,
    mem: ControllerMemory,
    gains: GainConfig,
    r_true: float,
    a_target: np.ndarray,
    K_rho_inv: np.ndarray | None = None,
) -> LyapunovSample:
    """Ground-truth Lyapunov bookkeeping (needs r_true and the target accel).

    V1 = (|d1|^2 + d2^2)/2, V2 = V1 + |d3|^2/2, and V3 adds the estimation
    terms r_tilde^2/(2 k_r r) + rho_tilde.K_rho^-1 rho_tilde / 2.
    W = k1 d1.P_b d1 + k2 d2^2 is the (negated) bearing/size decay rate.
    """
    if K_rho_inv is None:
        try:
            K_rho_inv = np.linalg.inv(gains.K_rho)
        except np.linalg.LinAlgError as e:
            raise SingularGain(f"K_rho is singular: {e}") from None
    d1, d2, d3 = err.delta1, err.delta2, err.delta3
    v1 = 0.5 * (d1.dot(d1) + d2 * d2)
    v2 = v1 + 0.5 * d3.dot(d3)
    r_tilde = r_true - mem.r_hat
    rho_tilde = a_target / r_true - mem.rho_hat
    v3 = v2 + r_tilde * r_tilde / (2.0 * gains.k_r * r_true) + 0.5 * rho_tilde.dot(K_rho_inv @ rho_tilde)
    p_d1 = d1 - b.dot(d1) * b
    w = gains.k1 * d1.dot(p_d1) + gains.k2 * d2 * d2
    return LyapunovSample(v1, v2, v3, w)

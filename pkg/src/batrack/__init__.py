"""Adaptive bearing-angle tracking of a moving spherical target of unknown size.

A multirotor observes a sphere through a body-fixed camera as a center bearing
plus subtended half-angle, and must converge to a prescribed viewing direction
and apparent size while estimating the unknown radius and target acceleration
online.  The package splits into rotation utilities (:mod:`~batrack.so3`),
rigid-body/target dynamics (:mod:`~batrack.dynamics`), the camera model and
numeric differentiation (:mod:`~batrack.sensing`), the adaptive control law
(:mod:`~batrack.controller`), thrust/attitude allocation under a visibility
cone (:mod:`~batrack.attitude`), the simulation harness (:mod:`~batrack.harness`),
figure rendering (:mod:`~batrack.plotting`), and a click CLI (:mod:`~batrack.cli`).
"""

from .so3 import (
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
from .dynamics import (
    ActuationInput,
    NonFiniteState,
    RigidBodyState,
    TargetState,
    VehicleParams,
    WorldState,
    step,
    step_direct,
    target_derivative,
    vehicle_derivative,
)
from .sensing import (
    BearingAngleObservation,
    Differentiator,
    InsideTarget,
    NoiseConfig,
    SingularAngle,
    add_noise,
    observe,
)
from .controller import (
    ControllerMemory,
    ErrorTriple,
    GainConfig,
    LyapunovSample,
    ReferenceSpec,
    SingularGain,
    compute_errors,
    control_law,
    desired_velocity,
    desired_velocity_rate,
    lyapunov_diagnostics,
    update_observers,
    wd_dot_estimate,
)
from .attitude import (
    AttitudeCommand,
    DegenerateThrust,
    DegenerateYaw,
    VisibilityConfig,
    allocate,
    attitude_rate_command,
    build_attitude,
    desired_y,
    desired_z_star,
    thrust_from_accel,
    visibility_correction,
)
from .harness import (
    COLUMNS,
    ConfigInvalid,
    ObserverInit,
    RunDiagnostics,
    RunResult,
    ScenarioConfig,
    SchemaMismatch,
    default_scenario,
    diagnostics,
    enable_noise,
    load_scenario,
    read_log_csv,
    run,
    run_batch,
    scenario_from_dict,
    write_log_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ActuationInput",
    "AttitudeCommand",
    "BearingAngleObservation",
    "COLUMNS",
    "ConfigInvalid",
    "ControllerMemory",
    "DegenerateMatrix",
    "DegenerateThrust",
    "DegenerateYaw",
    "Differentiator",
    "ErrorTriple",
    "GainConfig",
    "InsideTarget",
    "LyapunovSample",
    "NoiseConfig",
    "NonFiniteState",
    "NotSkewSymmetric",
    "ObserverInit",
    "ReferenceSpec",
    "RigidBodyState",
    "RunDiagnostics",
    "RunResult",
    "ScenarioConfig",
    "SchemaMismatch",
    "SingularAngle",
    "SingularGain",
    "TargetState",
    "VehicleParams",
    "VisibilityConfig",
    "WorldState",
    "add_noise",
    "allocate",
    "attitude_rate_command",
    "build_attitude",
    "compute_errors",
    "control_law",
    "default_scenario",
    "desired_velocity",
    "desired_velocity_rate",
    "desired_y",
    "desired_z_star",
    "diagnostics",
    "enable_noise",
    "is_rotation",
    "load_scenario",
    "lyapunov_diagnostics",
    "observe",
    "project_orthogonal",
    "read_log_csv",
    "renormalize",
    "rodrigues",
    "run",
    "run_batch",
    "scenario_from_dict",
    "skew",
    "step",
    "step_direct",
    "target_derivative",
    "thrust_from_accel",
    "unit",
    "unskew",
    "update_observers",
    "vehicle_derivative",
    "visibility_correction",
    "wd_dot_estimate",
    "write_log_csv",
]

"""Hybrid model-predictive control of a quasi-static planar pusher-slider.

The package splits into a physics layer (``model``, ``linearize``), a dense
convex QP solver (``qp``), receding-horizon controllers over mode schedules
(``controller``), a closed-loop simulator with scenario runners and CSV/JSON
outputs (``sim``, ``config``, ``cli``), and a live WebSocket session host
(``service``).
"""

from .controller import (
    ControllerFault,
    ControlResult,
    FamilyOfModes,
    ModeSchedule,
    MpcConfig,
    build_qp,
    default_family,
    default_mpc_config,
    enumerate_step,
    fom_step,
    miqp_step,
)
from .linearize import LinearizedMode, Nominal, NominalPoint, cone_rows, jacobians
from .model import (
    ContactMode,
    ModelParams,
    MotionCone,
    PusherInput,
    SliderState,
    classify_mode,
    compute_limit_surface,
    default_params,
    mode_dynamics,
    motion_cone,
    step,
)
from .qp import QpProblem, QpSolution, QpStatus, kkt_residual, solve
from .sim import (
    RunLog,
    Scenario,
    TargetFrame,
    emit_outputs,
    run_straight_line,
    run_target_tracking,
    straight_line_scenario,
    target_frame,
    target_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ContactMode",
    "ControlResult",
    "ControllerFault",
    "FamilyOfModes",
    "LinearizedMode",
    "ModeSchedule",
    "ModelParams",
    "MotionCone",
    "MpcConfig",
    "Nominal",
    "NominalPoint",
    "PusherInput",
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "RunLog",
    "Scenario",
    "SliderState",
    "TargetFrame",
    "build_qp",
    "classify_mode",
    "compute_limit_surface",
    "cone_rows",
    "default_family",
    "default_mpc_config",
    "default_params",
    "emit_outputs",
    "enumerate_step",
    "fom_step",
    "jacobians",
    "kkt_residual",
    "miqp_step",
    "mode_dynamics",
    "motion_cone",
    "run_straight_line",
    "run_target_tracking",
    "solve",
    "step",
    "straight_line_scenario",
    "target_frame",
    "target_scenario",
]

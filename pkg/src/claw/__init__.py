"""Simulation and design toolkit for the CLAW variable-stiffness soft wrist."""

from .geometry import LeafSpringSpec, LoopGeometry, loop_geometry
from .lockstate import LockState, StiffnessMode, command_mode, locked_axes
from .scenario import ScenarioConfig, ScenarioStatus
from .session import SimSession, misalignment_sweep, step_scenario
from .wristmodel import (
    Anchor,
    DeformationEnvelope,
    Deflection6,
    StiffnessParams,
    Wrench6,
    apply_envelope,
    calibrate,
    default_params,
    reaction_wrench,
)

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "DeformationEnvelope",
    "Deflection6",
    "LeafSpringSpec",
    "LockState",
    "LoopGeometry",
    "ScenarioConfig",
    "ScenarioStatus",
    "SimSession",
    "StiffnessMode",
    "StiffnessParams",
    "Wrench6",
    "apply_envelope",
    "calibrate",
    "command_mode",
    "default_params",
    "locked_axes",
    "loop_geometry",
    "misalignment_sweep",
    "reaction_wrench",
    "step_scenario",
    "__version__",
]

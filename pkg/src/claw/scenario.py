"""Contact-rich task scenarios: peg-in-hole, spring-loaded door handle, wall touch.

Scenario configs are JSON documents (validated here with pydantic and shared
with the service API). Contact models are quasi-static and planar: each
lateral axis sees an independent wall/chamfer interaction, which is enough
to express misalignment absorption, jamming on the hole rim, and chamfer
capture without full 3D contact.

World conventions: the hole (or handle grasp point, or wall) sits at the
origin; Z is up, the surface plane is z=0, and insertion proceeds downward.
The door handle rotates about a hinge; its arc is linearized so the press
direction is +Y combined with tool yaw, and opening the door pulls along -X.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .controller import GAIN_PRESETS, ControllerGains
from .errors import GeometryViolationError
from .lockstate import StiffnessMode
from .wristmodel import Wrench6

SPEC_VERSION = 1

#: Episodes time out after this much simulated time.
TIMEOUT_S = 60.0

#: Grip force ceiling: tangential load along the insertion axis beyond this
#: makes the grasped part slip in the fingers, ending the episode.
GRIP_FORCE_CEILING_N = 7.5

GRIPPERS = ("claw", "claw_free", "claw_half", "claw_full", "rigid", "finray")


class PegGeometry(BaseModel):
    """Square peg over a chamfered hole; clearance is per side."""

    model_config = ConfigDict(extra="forbid")

    peg_width: float = 20.0
    hole_clearance: float = 0.1
    hole_depth: float = 20.0
    chamfer_depth: float = 3.0
    contact_stiffness: float = 50.0
    friction_mu: float = 0.2

    @field_validator("peg_width", "hole_depth", "contact_stiffness")
    @classmethod
    def _positive(cls, v, info):
        if v <= 0:
            raise ValueError(f"{info.field_name} must be positive")
        return v

    @field_validator("hole_clearance")
    @classmethod
    def _clearance(cls, v):
        if v <= 0:
            raise ValueError("hole_clearance must be positive")
        if v < 0.05:
            raise ValueError("hole_clearance below the supported minimum of 0.05 mm")
        return v

    @field_validator("chamfer_depth", "friction_mu")
    @classmethod
    def _non_negative(cls, v, info):
        if v < 0:
            raise ValueError(f"{info.field_name} must be non-negative")
        return v


class DoorGeometry(BaseModel):
    """Spring-loaded lever handle with a latch and a pull-open direction."""

    model_config = ConfigDict(extra="forbid")

    handle_spring: float = 0.02        # return torque, N*m per degree
    latch_angle: float = 45.0          # degrees of rotation that free the latch
    handle_length: float = 80.0        # hinge-to-grasp lever arm, mm
    grasp_tangential: float = 5.0      # grasp coupling along the press arc, N/mm
    grasp_rotational: float = 0.2      # grasp coupling in yaw, N*m/deg
    door_stiffness: float = 20.0       # latched door resistance to pulling, N/mm
    release_threshold: float = 0.5     # grip torque below which a free wrist lets go, N*m
    return_time_s: float = 0.2         # handle snap-back time constant once let go

    @field_validator("latch_angle")
    @classmethod
    def _latch(cls, v):
        if not 0.0 < v <= 90.0:
            raise ValueError("latch_angle must be in (0, 90] degrees")
        return v

    @field_validator("handle_spring", "handle_length", "grasp_tangential",
                     "grasp_rotational", "door_stiffness", "release_threshold",
                     "return_time_s")
    @classmethod
    def _positive(cls, v, info):
        if v <= 0:
            raise ValueError(f"{info.field_name} must be positive")
        return v


class WallGeometry(BaseModel):
    """Flat wall normal to one world axis."""

    model_config = ConfigDict(extra="forbid")

    axis: Literal["x", "y", "z"] = "x"
    wall_offset: float = 10.0
    contact_stiffness: float = 50.0

    @model_validator(mode="after")
    def _check(self):
        if self.contact_stiffness <= 0:
            raise ValueError("contact_stiffness must be positive")
        return self


class EStopConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    force_threshold: float = 50.0
    torque_threshold: float = 10.0

    @model_validator(mode="after")
    def _check(self):
        if self.force_threshold <= 0 or self.torque_threshold <= 0:
            raise ValueError("e-stop thresholds must be positive")
        return self


class GainsConfig(BaseModel):
    """Controller gains: a named preset or explicit per-axis values."""

    model_config = ConfigDict(extra="forbid")

    preset: Optional[Literal["claw", "rigid", "finray", "tracking"]] = None
    virtual_mass: Optional[list[float]] = None
    virtual_damping: Optional[list[float]] = None
    stiffness_to_target: Optional[list[float]] = None
    force_deadband: Optional[float] = None

    def resolve(self, gripper: str) -> ControllerGains:
        """Materialize gains; unset fields fall back to the gripper's preset."""
        preset = self.preset or ("claw" if gripper.startswith("claw") else gripper)
        base = GAIN_PRESETS.get(preset, GAIN_PRESETS["claw"])()
        kwargs = {}
        if self.virtual_mass is not None:
            kwargs["virtual_mass"] = tuple(self.virtual_mass)
        if self.virtual_damping is not None:
            kwargs["virtual_damping"] = tuple(self.virtual_damping)
        if self.stiffness_to_target is not None:
            kwargs["stiffness_to_target"] = tuple(self.stiffness_to_target)
        if self.force_deadband is not None:
            kwargs["force_deadband"] = self.force_deadband
        if not kwargs:
            return base
        return ControllerGains(
            virtual_mass=kwargs.get("virtual_mass", base.virtual_mass),
            virtual_damping=kwargs.get("virtual_damping", base.virtual_damping),
            stiffness_to_target=kwargs.get("stiffness_to_target", base.stiffness_to_target),
            force_deadband=kwargs.get("force_deadband", base.force_deadband),
            track_exact=base.track_exact,
        )


class ScriptConfig(BaseModel):
    """Scripted command source standing in for a policy or human operator.

    ``hold`` keeps the start pose (live teleop sessions). ``descend`` is the
    straight-down insertion trajectory. ``translate`` ramps one axis and
    holds (wall touch). ``door_demo`` presses the handle in full-lock,
    switches to free at latch release, pulls the door open, and returns.
    """

    model_config = ConfigDict(extra="forbid")

    type: Literal["hold", "descend", "translate", "door_demo"] = "hold"
    # descend
    approach_mm: float = 5.0
    speed_mm_s: float = 10.0
    overdrive_mm: float = 2.0
    settle_s: float = 1.5
    # translate
    axis: Literal["x", "y", "z"] = "x"
    distance_mm: float = 15.0
    hold_s: float = 2.0
    # door_demo
    press_target_deg: float = 58.0
    press_rate_deg_s: float = 20.0
    partial_retract_deg: float = 15.0
    partial_retract_s: float = 0.2
    pull_mm: float = 75.0
    pull_s: float = 0.8
    retract_s: float = 2.0
    variable_stiffness: bool = True

    @model_validator(mode="after")
    def _check(self):
        for name in ("speed_mm_s", "press_rate_deg_s", "partial_retract_s",
                     "pull_s", "retract_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        return self


_GEOMETRY_MODELS = {
    "peg_in_hole": PegGeometry,
    "door_handle": DoorGeometry,
    "wall_touch": WallGeometry,
}


class ScenarioConfig(BaseModel):
    """Top-level scenario document (spec_version 1)."""

    model_config = ConfigDict(extra="forbid")

    spec_version: Literal[1] = 1
    kind: Literal["peg_in_hole", "door_handle", "wall_touch"]
    geometry: PegGeometry | DoorGeometry | WallGeometry = None  # filled by validator
    initial_misalignment: list[float] = Field(default_factory=lambda: [0.0] * 6)
    mode_schedule: list[tuple[float, str]] = Field(default_factory=list)
    gains: GainsConfig = Field(default_factory=GainsConfig)
    estop: EStopConfig = Field(default_factory=EStopConfig)
    seed: int = 0
    gripper: str = "claw"
    script: ScriptConfig = Field(default_factory=ScriptConfig)

    @model_validator(mode="before")
    @classmethod
    def _geometry_for_kind(cls, data):
        if isinstance(data, dict):
            kind = data.get("kind")
            model = _GEOMETRY_MODELS.get(kind)
            if model is not None:
                geo = data.get("geometry")
                if geo is None:
                    data["geometry"] = model()
                elif isinstance(geo, dict):
                    try:
                        data["geometry"] = model(**geo)
                    except PydanticValidationError as exc:
                        # Keep field-level locations in the diagnostics.
                        parts = []
                        for err in exc.errors():
                            loc = ".".join(str(p) for p in err["loc"]) or kind
                            parts.append(f"geometry.{loc}: {err['msg']}")
                        raise ValueError("; ".join(parts)) from exc
                elif not isinstance(geo, model):
                    raise ValueError(f"geometry block does not match kind {kind!r}")
        return data

    @field_validator("initial_misalignment")
    @classmethod
    def _check_misalignment(cls, v):
        if len(v) != 6 or not all(math.isfinite(x) for x in v):
            raise ValueError("initial_misalignment must be 6 finite values")
        return [float(x) for x in v]

    @field_validator("mode_schedule")
    @classmethod
    def _check_schedule(cls, v):
        last = -math.inf
        for t, mode in v:
            StiffnessMode.parse(mode)
            if t <= last:
                raise ValueError("mode_schedule times must be strictly increasing")
            last = t
        return [(float(t), StiffnessMode.parse(m).value) for t, m in v]

    @field_validator("gripper")
    @classmethod
    def _check_gripper(cls, v):
        if v not in GRIPPERS:
            raise ValueError(f"gripper must be one of {GRIPPERS}")
        return v

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


def default_config(kind: str, **overrides) -> ScenarioConfig:
    scripts = {"peg_in_hole": "descend", "door_handle": "door_demo", "wall_touch": "translate"}
    payload = {"kind": kind, "script": {"type": scripts[kind]}}
    payload.update(overrides)
    return ScenarioConfig(**payload)


@dataclass
class ScenarioStatus:
    """Live outcome flags; ``outcome`` only ever leaves ``running`` once."""

    outcome: str = "running"  # running | success | estop | timeout
    insertion_depth: float = 0.0
    handle_angle: float = 0.0
    latch_released: bool = False
    elapsed: float = 0.0

    @property
    def terminal(self) -> bool:
        return self.outcome != "running"

    def finish(self, outcome: str) -> None:
        if not self.terminal:
            self.outcome = outcome


# --- contact models ----------------------------------------------------------

def _smooth_sign(v: float, scale: float = 2.0) -> float:
    return math.tanh(v / scale)


class PegEnvironment:
    """Planar two-surface contact of a grasped peg with a chamfered hole."""

    def __init__(self, geom: PegGeometry):
        if geom.peg_width <= 0 or geom.hole_clearance <= 0:
            raise GeometryViolationError("peg_width and hole_clearance must be positive")
        self.geom = geom

    def contact(self, tip, vz: float, mode: StiffnessMode, dt: float, measured=None):
        """Contact wrench and active per-axis stiffness at the tip pose.

        ``vz`` is the tip vertical velocity (mm/s), used only to orient
        friction against the insertion motion.
        """
        g = self.geom
        w = [0.0] * 6
        k = [0.0] * 6
        z = tip[2]
        if z >= 0.0:
            return w, k, ()
        p_h = g.peg_width / 2.0
        hole_half = p_h + g.hole_clearance
        mouth = hole_half + g.chamfer_depth
        kc = g.contact_stiffness
        events = ()

        if max(abs(tip[0]), abs(tip[1])) + p_h > mouth:
            # Part of the peg rests on the flat surface outside the chamfer:
            # descent is blocked with no lateral guidance.
            w[2] = kc * (-z)
            k[2] = kc
            return w, k, events

        lateral_normal = 0.0
        for i in (0, 1):
            o = tip[i]
            if z >= -g.chamfer_depth:
                opening = hole_half + (g.chamfer_depth + z)
                pen = abs(o) + p_h - opening
                if pen > 0.0:
                    # 45-degree bevel: the normal splits evenly between a
                    # centering push and a vertical resistance.
                    w[i] -= math.copysign(0.5 * kc * pen, o)
                    w[2] += 0.5 * kc * pen
                    k[i] += 0.5 * kc
                    k[2] += 0.5 * kc
            else:
                pen = abs(o) + p_h - hole_half
                if pen > 0.0:
                    w[i] -= math.copysign(kc * pen, o)
                    k[i] += kc
                    lateral_normal += kc * pen
        if lateral_normal > 0.0:
            w[2] -= g.friction_mu * lateral_normal * _smooth_sign(vz)
        if z < -g.hole_depth:
            w[2] += kc * (-g.hole_depth - z)
            k[2] += kc
        return w, k, events

    def update_status(self, tip, status: ScenarioStatus) -> None:
        status.insertion_depth = max(0.0, -tip[2])
        if status.insertion_depth >= self.geom.hole_depth:
            status.finish("success")


class DoorEnvironment:
    """Lever handle on a latched door.

    While the grasp is coupled, the handle angle follows the tip's press
    coordinate (tangential Y travel plus yaw) quasi-statically against the
    return spring. The latch frees once the handle passes the latch angle.
    In free mode, once the wrench the wrist can transmit to the handle falls
    under the release threshold, the handle slips in the grasp and snaps
    back on its spring (a free wrist back-drives rather than resisting).
    Pulling along -X fights the door frame until the latch is free.
    """

    def __init__(self, geom: DoorGeometry):
        self.geom = geom
        self.coupled = True
        self.handle_angle = 0.0

    def _arc_mm_per_deg(self) -> float:
        return self.geom.handle_length * math.pi / 180.0

    def solve_handle(self, tip) -> tuple[float, float]:
        """Quasi-static handle angle and transmitted grip torque (N*m)."""
        g = self.geom
        c = self._arc_mm_per_deg()
        L_m = g.handle_length / 1000.0
        num = g.grasp_tangential * L_m * tip[1] + g.grasp_rotational * tip[5]
        den = g.handle_spring + g.grasp_tangential * L_m * c + g.grasp_rotational
        theta = min(max(num / den, 0.0), 90.0)
        grip_torque = (
            g.grasp_tangential * L_m * (tip[1] - c * theta)
            + g.grasp_rotational * (tip[5] - theta)
        )
        return theta, grip_torque

    def contact(self, tip, vz: float, mode: StiffnessMode, dt: float, measured=None):
        g = self.geom
        w = [0.0] * 6
        k = [0.0] * 6
        events = []
        latch_was_released = getattr(self, "_latch_released", False)

        if self.coupled:
            theta, _ = self.solve_handle(tip)
            self.handle_angle = theta
            c = self._arc_mm_per_deg()
            w[1] = -g.grasp_tangential * (tip[1] - c * theta)
            w[5] = -g.grasp_rotational * (tip[5] - theta)
            k[1] = g.grasp_tangential
            k[5] = g.grasp_rotational
            if not latch_was_released and theta >= g.latch_angle:
                self._latch_released = True
                events.append("latch")
            if self._is_latch_released() and mode is StiffnessMode.FREE and measured is not None:
                # Wrench the wrist is actually transmitting, as torque about
                # the hinge; a free wrist that cannot hold the handle against
                # its spring gets back-driven, i.e. the handle lets go.
                held = abs(measured[1]) * g.handle_length / 1000.0 + abs(measured[5])
                if held < g.release_threshold:
                    self.coupled = False
                    events.append("handle_release")
        else:
            # Handle free of the grasp: spring sets the pose.
            self.handle_angle *= math.exp(-dt / g.return_time_s)

        if not self._is_latch_released():
            w[0] += -g.door_stiffness * tip[0]
            k[0] += g.door_stiffness
        return w, k, tuple(events)

    def _is_latch_released(self) -> bool:
        return getattr(self, "_latch_released", False)

    def update_status(self, tip, status: ScenarioStatus) -> None:
        status.handle_angle = self.handle_angle
        status.latch_released = self._is_latch_released()
        if status.latch_released and self.handle_angle <= 5.0:
            status.finish("success")


class WallEnvironment:
    """One-sided stiff wall normal to a world axis."""

    def __init__(self, geom: WallGeometry):
        self.geom = geom
        self.axis_index = {"x": 0, "y": 1, "z": 2}[geom.axis]

    def contact(self, tip, vz: float, mode: StiffnessMode, dt: float, measured=None):
        w = [0.0] * 6
        k = [0.0] * 6
        pen = tip[self.axis_index] - self.geom.wall_offset
        if pen > 0.0:
            w[self.axis_index] = -self.geom.contact_stiffness * pen
            k[self.axis_index] = self.geom.contact_stiffness
        return w, k, ()

    def update_status(self, tip, status: ScenarioStatus) -> None:
        pass


def build_environment(config: ScenarioConfig):
    if config.kind == "peg_in_hole":
        return PegEnvironment(config.geometry)
    if config.kind == "door_handle":
        return DoorEnvironment(config.geometry)
    return WallEnvironment(config.geometry)


def peg_contact_wrench(tcp_pose, geometry: PegGeometry, vz: float = -1.0) -> Wrench6:
    """Functional view of the peg contact model at a tool pose."""
    env = PegEnvironment(geometry)
    w, _, _ = env.contact(list(tcp_pose), vz, StiffnessMode.FREE, 0.002, None)
    return Wrench6.from_vector(w)


def door_contact_wrench(
    tcp_pose, geometry: DoorGeometry, latch_released: bool = False,
    mode: StiffnessMode = StiffnessMode.FULL_LOCK,
) -> Wrench6:
    """Functional view of the door contact model while grasped."""
    env = DoorEnvironment(geometry)
    env._latch_released = latch_released
    w, _, _ = env.contact(list(tcp_pose), 0.0, StiffnessMode.parse(mode), 0.002, None)
    return Wrench6.from_vector(w)

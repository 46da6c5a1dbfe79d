"""Per-axis admittance controller and simulated Cartesian arm plant.

The arm is a position-controlled Cartesian 6-axis point. A forward-dynamics
compliance layer renders a virtual mass-damper-spring per axis so the
commanded pose yields to measured wrenches: the inner loop integrates

    m * acc = f_ext + k * (commanded - pose) - c * vel

with semi-implicit Euler at 500 Hz (dt = 2 ms), while pose commands arrive
at most at 50 Hz and are latched on 20 ms window boundaries. Gains are
per-gripper: a compliant set for the soft wrist and a stiff tracking set for
the rigid and fin-ray comparators (stiff tooling needs a stiff admittance to
avoid contact chatter). Damping ratios are kept at or above 0.7 so step
responses do not oscillate.

Pose vectors are mm / deg in the world frame; gains are SI (N/m, N*s/m, kg,
and the rotational analogues), converted inside the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import EStopTrippedError
from .wristmodel import Deflection6, Wrench6

INNER_DT = 0.002          # 500 Hz physics/control step
COMMAND_WINDOW = 0.02     # 50 Hz command latch
STEPS_PER_WINDOW = 10

_MM_PER_M = 1000.0
_DEG_PER_RAD = 180.0 / math.pi

WRENCH_AXES = ("fx", "fy", "fz", "tx", "ty", "tz")


@dataclass(frozen=True)
class ControllerGains:
    """Virtual dynamics per axis: 3 translational + 3 rotational entries.

    ``track_exact`` bypasses the admittance entirely (infinite-stiffness
    position tracking), used as the comparison baseline.
    """

    virtual_mass: tuple[float, ...] = (5.0, 5.0, 5.0, 0.05, 0.05, 0.05)
    virtual_damping: tuple[float, ...] = (200.0, 200.0, 200.0, 1.4142135623730951,
                                          1.4142135623730951, 1.4142135623730951)
    stiffness_to_target: tuple[float, ...] = (2000.0, 2000.0, 2000.0, 10.0, 10.0, 10.0)
    force_deadband: float = 0.5
    track_exact: bool = False

    def __post_init__(self):
        for name in ("virtual_mass", "virtual_damping", "stiffness_to_target"):
            vals = getattr(self, name)
            if len(vals) != 6:
                raise ValueError(f"{name} needs 6 entries")
            if any(v <= 0 for v in vals):
                raise ValueError(f"{name} entries must be positive")
        if self.force_deadband <= 0:
            raise ValueError("force_deadband must be positive")
        for i in range(6):
            zeta = self.damping_ratio(i)
            if zeta < 0.7:
                raise ValueError(
                    f"axis {i} damping ratio {zeta:.2f} below 0.7; raise damping"
                )

    def damping_ratio(self, axis: int) -> float:
        m = self.virtual_mass[axis]
        c = self.virtual_damping[axis]
        k = self.stiffness_to_target[axis]
        return c / (2.0 * math.sqrt(k * m))


def claw_gains() -> ControllerGains:
    """Compliant default set used with the soft wrist."""
    return ControllerGains()


def stiff_gains() -> ControllerGains:
    """Stiff tracking set for the rigid / fin-ray comparators."""
    return ControllerGains(
        virtual_mass=(5.0, 5.0, 5.0, 0.05, 0.05, 0.05),
        virtual_damping=(894.4271909999159, 894.4271909999159, 894.4271909999159,
                         4.47213595499958, 4.47213595499958, 4.47213595499958),
        stiffness_to_target=(40000.0, 40000.0, 40000.0, 100.0, 100.0, 100.0),
    )


def tracking_gains() -> ControllerGains:
    """Pure position tracking (stiffness to target -> infinity) baseline."""
    return ControllerGains(track_exact=True)


GAIN_PRESETS = {
    "claw": claw_gains,
    "rigid": stiff_gains,
    "finray": stiff_gains,
    "tracking": tracking_gains,
}


@dataclass
class PlantState:
    """Simulated arm flange state plus the wrist views hanging off it."""

    tcp_pose: list[float] = field(default_factory=lambda: [0.0] * 6)
    tcp_velocity: list[float] = field(default_factory=lambda: [0.0] * 6)
    commanded_pose: list[float] = field(default_factory=lambda: [0.0] * 6)
    wrist_deflection: Deflection6 = field(default_factory=Deflection6)
    measured_wrench: Wrench6 = field(default_factory=Wrench6)
    # Last command received inside the current 20 ms window (last-writer-wins).
    pending_command: list[float] | None = None

    def copy(self) -> "PlantState":
        return PlantState(
            tcp_pose=list(self.tcp_pose),
            tcp_velocity=list(self.tcp_velocity),
            commanded_pose=list(self.commanded_pose),
            wrist_deflection=self.wrist_deflection,
            measured_wrench=self.measured_wrench,
            pending_command=list(self.pending_command) if self.pending_command else None,
        )


def set_command(state: PlantState, pose) -> PlantState:
    """Stage a pose command; it takes effect at the next 20 ms boundary.

    Multiple commands inside one window coalesce to the last one. Never an
    error; commanding the current pose is a no-op at latch time.
    """
    pose = [float(v) for v in pose]
    if len(pose) != 6 or not all(math.isfinite(v) for v in pose):
        raise ValueError("command pose must be 6 finite values")
    state.pending_command = pose
    return state


def latch_command(state: PlantState) -> PlantState:
    """Apply the pending command at a window boundary (session-internal)."""
    if state.pending_command is not None:
        state.commanded_pose = state.pending_command
        state.pending_command = None
    return state


@dataclass
class EStopMonitor:
    """Latching protective stop on any wrench component over threshold.

    Thresholds are not a measured quantity; the defaults sit near typical
    collaborative-arm protective-stop levels and are configurable per
    scenario.
    """

    force_threshold: float = 50.0
    torque_threshold: float = 10.0
    tripped: bool = False
    trip_axis: str | None = None

    def reset(self) -> None:
        self.tripped = False
        self.trip_axis = None


def check_estop(monitor: EStopMonitor, wrench: Wrench6) -> EStopMonitor:
    """Latch the monitor if any component exceeds its threshold.

    Records the first offending axis (fx..tz order); once tripped the
    monitor stays tripped until an explicit reset.
    """
    if monitor.tripped:
        return monitor
    values = wrench.as_vector()
    for i, name in enumerate(WRENCH_AXES):
        limit = monitor.force_threshold if i < 3 else monitor.torque_threshold
        if abs(values[i]) > limit:
            monitor.tripped = True
            monitor.trip_axis = name
            break
    return monitor


def _deadband(f: float, band: float) -> float:
    return 0.0 if abs(f) <= band else f


def step_controller(
    state: PlantState,
    gains: ControllerGains,
    external_wrench: Wrench6,
    dt: float = INNER_DT,
    monitor: EStopMonitor | None = None,
) -> PlantState:
    """One inner-loop integration step of the virtual dynamics.

    Deterministic: identical inputs produce bit-identical outputs. If a
    monitor is supplied and fires on ``external_wrench``, the step raises
    EStopTrippedError without integrating (the plant freezes).
    """
    if not 0.0 < dt <= 0.01:
        raise ValueError(f"dt must be in (0, 0.01], got {dt}")
    if monitor is not None:
        if monitor.tripped:
            raise EStopTrippedError(f"e-stop latched on {monitor.trip_axis}")
        check_estop(monitor, external_wrench)
        if monitor.tripped:
            raise EStopTrippedError(f"e-stop tripped on {monitor.trip_axis}")

    if gains.track_exact:
        state.tcp_pose = list(state.commanded_pose)
        state.tcp_velocity = [0.0] * 6
        return state

    wrench = external_wrench.as_vector()
    pose = state.tcp_pose
    vel = state.tcp_velocity
    for i in range(6):
        m = gains.virtual_mass[i]
        c = gains.virtual_damping[i]
        k = gains.stiffness_to_target[i]
        if i < 3:
            err = (state.commanded_pose[i] - pose[i]) / _MM_PER_M
            v = vel[i] / _MM_PER_M
            f = _deadband(wrench[i], gains.force_deadband)
            acc = (f + k * err - c * v) / m
            v += dt * acc
            vel[i] = v * _MM_PER_M
            pose[i] += dt * vel[i]
        else:
            err = (state.commanded_pose[i] - pose[i]) / _DEG_PER_RAD
            w = vel[i] / _DEG_PER_RAD
            # Torque deadband scales with the threshold ratio of the axes.
            tau = _deadband(wrench[i], gains.force_deadband * 0.02)
            acc = (tau + k * err - c * w) / m
            w += dt * acc
            vel[i] = w * _DEG_PER_RAD
            pose[i] += dt * vel[i]
    return state


def virtual_energy(state: PlantState, gains: ControllerGains) -> float:
    """Kinetic plus spring-to-target energy of the virtual dynamics (J)."""
    e = 0.0
    for i in range(6):
        m = gains.virtual_mass[i]
        k = gains.stiffness_to_target[i]
        if i < 3:
            v = state.tcp_velocity[i] / _MM_PER_M
            err = (state.commanded_pose[i] - state.tcp_pose[i]) / _MM_PER_M
        else:
            v = state.tcp_velocity[i] / _DEG_PER_RAD
            err = (state.commanded_pose[i] - state.tcp_pose[i]) / _DEG_PER_RAD
        e += 0.5 * m * v * v + 0.5 * k * err * err
    return e

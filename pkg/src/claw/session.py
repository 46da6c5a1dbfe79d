"""Deterministic simulation session: plant + wrist + lock + scenario stepping.

One session owns one simulator. The inner physics/control loop runs at
500 Hz; commands (from a script, a teleop client, or a replayed episode)
latch on 20 ms window boundaries, giving exactly 10 inner steps per command
window. Every frame is stamped with simulated time, so results are
independent of wall-clock pacing: identical inputs produce byte-identical
episode logs.

The wrist deflection is quasi-static: each tick takes one damped Newton step
of the tip force balance (wrist restoring wrench plus environment contact),
using the models' local stiffness. Transients settle within a few
milliseconds of simulated time, far faster than any commanded motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .controller import (
    COMMAND_WINDOW,
    INNER_DT,
    EStopMonitor,
    PlantState,
    latch_command,
    set_command,
    step_controller,
)
from .episode import DEFAULT_EPOCH, EpisodeLog, EpisodeRow
from .errors import EStopTrippedError
from .lockstate import CARRIER_POSITION, LockState, StiffnessMode, command_mode
from .scenario import (
    GRIP_FORCE_CEILING_N,
    TIMEOUT_S,
    ScenarioConfig,
    ScenarioStatus,
    ScriptConfig,
    build_environment,
)
from .wristmodel import (
    Deflection6,
    FinRayWrist,
    PolynomialWrist,
    Wrench6,
    clamp_vector,
    default_params,
    rigid_params,
)

# Quasi-static relaxation tuning: stiffness floor keeps the Newton step
# defined out of contact; the per-tick step cap bounds tip slew to 500 mm/s.
_RELAX_FLOOR = (0.2, 0.2, 0.2, 0.02, 0.02, 0.02)
_TIP_SLEW = 500.0

_PINNED_MODES = {
    "claw_free": StiffnessMode.FREE,
    "claw_half": StiffnessMode.HALF_LOCK,
    "claw_full": StiffnessMode.FULL_LOCK,
    "rigid": StiffnessMode.FREE,
    "finray": StiffnessMode.FREE,
}


def build_wrist(gripper: str):
    if gripper == "rigid":
        return PolynomialWrist(rigid_params())
    if gripper == "finray":
        return FinRayWrist()
    return PolynomialWrist(default_params())


# --- scripted command sources -------------------------------------------------

class HoldScript:
    """No autopilot; commands come from a client or replay."""

    run_to_completion = False

    def command(self, t: float, session: "SimSession"):
        return None, None

    def done(self, t: float) -> bool:
        return True


class DescendScript:
    """Straight-down insertion: ramp Z to past the hole bottom and hold."""

    run_to_completion = False

    def __init__(self, cfg: ScriptConfig, start_pose, hole_depth: float):
        self.start = list(start_pose)
        self.z_target = -(hole_depth + cfg.overdrive_mm)
        self.speed = cfg.speed_mm_s
        self.settle_s = cfg.settle_s

    def command(self, t: float, session: "SimSession"):
        pose = list(self.start)
        pose[2] = max(self.z_target, self.start[2] - self.speed * t)
        return pose, None

    def done(self, t: float) -> bool:
        return t >= (self.start[2] - self.z_target) / self.speed + self.settle_s


class TranslateScript:
    """Ramp one axis by a fixed distance, then hold."""

    run_to_completion = False

    def __init__(self, cfg: ScriptConfig, start_pose):
        self.start = list(start_pose)
        self.axis = {"x": 0, "y": 1, "z": 2}[cfg.axis]
        self.distance = cfg.distance_mm
        self.speed = cfg.speed_mm_s
        self.hold_s = cfg.hold_s

    def command(self, t: float, session: "SimSession"):
        travel = min(abs(self.distance), self.speed * t)
        pose = list(self.start)
        pose[self.axis] += math.copysign(travel, self.distance)
        return pose, None

    def done(self, t: float) -> bool:
        return t >= abs(self.distance) / self.speed + self.hold_s


class DoorDemoScript:
    """Human door-opening strategy: stiff press, release, pull, return.

    Presses the handle in full-lock until the latch frees, immediately drops
    to free mode (when ``variable_stiffness``), relaxes the press partway,
    pulls the door open, and finally returns the handle rotation to neutral.
    Phase changes are event-driven off the live latch state, so the recorded
    episode carries the exact switch instant.
    """

    ENGAGE_S = 0.4  # lock carrier needs 0.25 s to reach full-lock
    DONE_HOLD_S = 1.0

    run_to_completion = True

    def __init__(self, cfg: ScriptConfig, start_pose, geometry):
        self.cfg = cfg
        self.start = list(start_pose)
        self.arc = geometry.handle_length * math.pi / 180.0  # mm per deg
        self.phase = "engage"
        self.phase_t0 = 0.0
        self.theta = 0.0
        self.theta_at_latch = cfg.press_target_deg
        self.pull = 0.0
        self.done_t: float | None = None
        self._lever_sent: str | None = None

    def _pose(self):
        pose = list(self.start)
        pose[0] += self.pull
        pose[1] += self.arc * self.theta
        pose[5] += self.theta
        return pose

    def command(self, t: float, session: "SimSession"):
        cfg = self.cfg
        lever = None
        if self.phase == "engage":
            if self._lever_sent is None:
                lever = self._lever_sent = "full_lock"
            if t - self.phase_t0 >= self.ENGAGE_S:
                self.phase, self.phase_t0 = "press", t
        elif self.phase == "press":
            self.theta = min(cfg.press_target_deg, cfg.press_rate_deg_s * (t - self.phase_t0))
            if session.status.latch_released:
                self.theta_at_latch = self.theta
                if cfg.variable_stiffness:
                    lever = "free"
                self.phase, self.phase_t0 = "partial", t
            elif self.theta >= cfg.press_target_deg and t - self.phase_t0 >= (
                cfg.press_target_deg / cfg.press_rate_deg_s + 1.0
            ):
                # Latch never freed (stiffness too low); carry on regardless.
                self.theta_at_latch = self.theta
                self.phase, self.phase_t0 = "partial", t
        elif self.phase == "partial":
            frac = min(1.0, (t - self.phase_t0) / cfg.partial_retract_s)
            self.theta = self.theta_at_latch + frac * (cfg.partial_retract_deg - self.theta_at_latch)
            if frac >= 1.0:
                self.phase, self.phase_t0 = "pull", t
        elif self.phase == "pull":
            frac = min(1.0, (t - self.phase_t0) / cfg.pull_s)
            self.pull = -cfg.pull_mm * frac
            if frac >= 1.0:
                self.phase, self.phase_t0 = "retract", t
        elif self.phase == "retract":
            frac = min(1.0, (t - self.phase_t0) / cfg.retract_s)
            self.theta = cfg.partial_retract_deg * (1.0 - frac)
            if frac >= 1.0:
                self.phase = "done"
                self.done_t = t
        return self._pose(), lever

    def done(self, t: float) -> bool:
        return self.done_t is not None and t >= self.done_t + self.DONE_HOLD_S


class ReplaySource:
    """Feeds a recorded episode's command stream back on its own time grid."""

    run_to_completion = True

    def __init__(self, log: EpisodeLog, mode_override: StiffnessMode | None = None,
                 mode_schedule: list[tuple[float, str]] | None = None):
        self.rows = log.rows
        self.index = 0
        self.override = mode_override
        self.schedule = list(mode_schedule or [])
        self.schedule_index = 0
        self._last_mode: str | None = None

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.rows)

    def done(self, t: float) -> bool:
        return self.exhausted

    def command(self, t: float, session: "SimSession"):
        pose = None
        lever = None
        while self.index < len(self.rows) and self.rows[self.index].t <= t + 1e-9:
            row = self.rows[self.index]
            pose = list(row.pose)
            if self.override is None and not self.schedule:
                if row.mode != self._last_mode:
                    lever = row.mode
                    self._last_mode = row.mode
            self.index += 1
        if self.override is not None and t == 0.0:
            lever = self.override.value
        while self.schedule_index < len(self.schedule) and self.schedule[self.schedule_index][0] <= t + 1e-9:
            lever = self.schedule[self.schedule_index][1]
            self.schedule_index += 1
        return pose, lever


def build_script(config: ScenarioConfig, start_pose):
    cfg = config.script
    if cfg.type == "descend":
        depth = config.geometry.hole_depth if config.kind == "peg_in_hole" else 0.0
        return DescendScript(cfg, start_pose, depth)
    if cfg.type == "translate":
        return TranslateScript(cfg, start_pose)
    if cfg.type == "door_demo":
        return DoorDemoScript(cfg, start_pose, config.geometry)
    return HoldScript()


class SimSession:
    """One deterministic simulator instance for a scenario config."""

    def __init__(
        self,
        config: ScenarioConfig,
        started: str = DEFAULT_EPOCH,
        inner_dt: float = INNER_DT,
        command_source=None,
        record: bool = True,
    ):
        self.config = config
        self.steps_per_window = max(1, round(COMMAND_WINDOW / inner_dt))
        self.dt = COMMAND_WINDOW / self.steps_per_window
        self.gripper = config.gripper
        self.wrist = build_wrist(self.gripper)
        self.gains = config.gains.resolve(self.gripper)
        self.pinned_mode = _PINNED_MODES.get(self.gripper)
        initial_mode = self.pinned_mode or StiffnessMode.FREE
        self.lock = LockState.for_mode(initial_mode)
        self.lock_target: StiffnessMode = initial_mode
        self.lever_mode: StiffnessMode = initial_mode

        start_pose = list(config.initial_misalignment)
        if config.kind == "peg_in_hole" and config.script.type == "descend":
            start_pose[2] += config.script.approach_mm
        self.plant = PlantState(
            tcp_pose=list(start_pose),
            commanded_pose=list(start_pose),
        )
        self.monitor = EStopMonitor(
            force_threshold=config.estop.force_threshold,
            torque_threshold=config.estop.torque_threshold,
        )
        self.status = ScenarioStatus()
        self.env = build_environment(config)
        self.source = command_source if command_source is not None else build_script(config, start_pose)
        self.schedule = list(config.mode_schedule)
        self._schedule_index = 0

        self.raw_defl = [0.0] * 6
        self._measured = [0.0] * 6
        self._tick = 0
        self._prev_tip_z = start_pose[2]
        self._events: list[str] = []
        self.peak_force = 0.0
        self.finished = False
        self.frame_listeners: list = []
        self.log: EpisodeLog | None = None
        if record:
            self.log = EpisodeLog(
                scenario_hash=config.config_hash(),
                gripper=self.gripper,
                started=started,
            )

    # -- public control surface ------------------------------------------------

    @property
    def t(self) -> float:
        return self._tick * self.dt

    def effective_mode(self) -> StiffnessMode:
        return self.pinned_mode or self.lock.mode

    def submit_command(self, pose=None, mode: StiffnessMode | str | None = None) -> None:
        """Stage a client command; latched at the next 20 ms boundary."""
        if pose is not None:
            set_command(self.plant, pose)
        if mode is not None:
            self.command_stiffness(mode)

    def command_stiffness(self, mode: StiffnessMode | str) -> None:
        self.lever_mode = StiffnessMode.parse(mode)
        if self.pinned_mode is None:
            self.lock_target = self.lever_mode

    def advance(self, duration: float) -> None:
        """Step simulated time forward by ``duration`` seconds."""
        n = max(1, round(duration / self.dt))
        for _ in range(n):
            if self.finished:
                return
            self.step_inner()

    def run(self, max_t: float = TIMEOUT_S + 1.0) -> ScenarioStatus:
        """Step until the scenario reaches a terminal outcome."""
        while not self.finished and self.t < max_t:
            self.step_inner()
        return self.status

    # -- stepping --------------------------------------------------------------

    def step_inner(self) -> None:
        if self.finished:
            return
        if self._tick % self.steps_per_window == 0:
            self._window_boundary()
            if self.finished:
                return
        self._physics_tick()
        self._tick += 1

    def _window_boundary(self) -> None:
        t = self.t
        while self._schedule_index < len(self.schedule) and self.schedule[self._schedule_index][0] <= t + 1e-9:
            self.command_stiffness(self.schedule[self._schedule_index][1])
            self._schedule_index += 1
        pose, lever = self.source.command(t, self)
        if lever is not None:
            self.command_stiffness(lever)
        if pose is not None:
            set_command(self.plant, pose)
        latch_command(self.plant)
        self._emit_frame(t)
        if self.status.terminal:
            # Protective stops and timeouts end the episode at once; a
            # success only ends it once the command source has played out
            # (a recorded motion keeps going past the success instant).
            if self._frozen():
                self.finished = True
            elif not getattr(self.source, "run_to_completion", False) or self.source.done(t):
                self.finished = True

    def _frozen(self) -> bool:
        return self.status.outcome in ("estop", "timeout")

    def _physics_tick(self) -> None:
        if self._frozen():
            return
        dt = self.dt
        if self.pinned_mode is None and self.lock.carrier_position != CARRIER_POSITION[self.lock_target]:
            self.lock = command_mode(self.lock, self.lock_target, dt)
        mode = self.effective_mode()

        # Quasi-static tip balance: one damped Newton step per axis.
        d = self.raw_defl
        pose = self.plant.tcp_pose
        tip = [pose[i] + d[i] for i in range(6)]
        vz = (tip[2] - self._prev_tip_z) / dt
        self._prev_tip_z = tip[2]
        cw, ck, events = self.env.contact(tip, vz, mode, dt, self._measured)
        if events:
            self._events.extend(events)
        ww = self.wrist.wrench(d, mode)
        ws = self.wrist.stiffness(d, mode)
        cap = _TIP_SLEW * dt
        for i in range(6):
            step = (ww[i] + cw[i]) / (ws[i] + ck[i] + _RELAX_FLOOR[i])
            if step > cap:
                step = cap
            elif step < -cap:
                step = -cap
            d[i] += step

        measured = self.wrist.wrench(d, mode)
        for i in range(6):
            measured[i] = -measured[i]
        self._measured = measured
        force_peak = max(abs(measured[0]), abs(measured[1]), abs(measured[2]))
        if force_peak > self.peak_force:
            self.peak_force = force_peak

        t_next = (self._tick + 1) * dt
        was_terminal = self.status.terminal
        if not was_terminal:
            self.status.elapsed = t_next
        tip = [pose[i] + d[i] for i in range(6)]
        self.env.update_status(tip, self.status)
        if self.status.outcome == "success":
            if not was_terminal:
                self._events.append("success")
            return
        if self.config.kind == "peg_in_hole" and abs(measured[2]) > GRIP_FORCE_CEILING_N:
            self._events.append("slip")
            self.monitor.tripped = True
            self.monitor.trip_axis = "grip"
            self.status.finish("estop")
            return
        wrench = Wrench6.from_vector(measured)
        try:
            step_controller(self.plant, self.gains, wrench, dt, monitor=self.monitor)
        except EStopTrippedError:
            self._events.append(f"estop:{self.monitor.trip_axis}")
            self.status.finish("estop")
            return
        if t_next >= TIMEOUT_S:
            self._events.append("timeout")
            self.status.finish("timeout")

    def _emit_frame(self, t: float) -> None:
        clamped = clamp_vector(self.raw_defl, self.effective_mode(), self.wrist.envelope)
        self.plant.wrist_deflection = Deflection6.from_vector(clamped)
        self.plant.measured_wrench = Wrench6.from_vector(self._measured)
        event = ";".join(self._events)
        self._events = []
        if self.log is not None:
            self.log.append(EpisodeRow(
                t=t,
                pose=list(self.plant.commanded_pose),
                deflection=clamped,
                wrench=list(self._measured),
                mode=self.lever_mode.value,
                estop=self.monitor.tripped,
                event=event,
            ))
        if self.frame_listeners:
            frame = self.state_frame(t, event)
            for listener in self.frame_listeners:
                listener(frame)

    def state_frame(self, t: float | None = None, event: str = "") -> dict:
        """Wire-format state frame (actual pose, effective mode, live status)."""
        scenario: dict = {"outcome": self.status.outcome}
        if self.config.kind == "door_handle":
            scenario["handle_angle"] = self.status.handle_angle
            scenario["latch_released"] = self.status.latch_released
        else:
            scenario["insertion_depth"] = self.status.insertion_depth
        return {
            "type": "state",
            "t": self.t if t is None else t,
            "pose": list(self.plant.tcp_pose),
            "deflection": self.plant.wrist_deflection.as_vector(),
            "wrench": list(self._measured),
            "mode": self.effective_mode().value,
            "carrier_position": self.lock.carrier_position,
            "estop": self.monitor.tripped,
            "scenario": scenario,
        }


def step_scenario(session: SimSession, command=None, dt: float = COMMAND_WINDOW) -> SimSession:
    """Advance a running scenario, optionally staging a pose command first."""
    if command is not None:
        session.submit_command(pose=command)
    session.advance(dt)
    return session


@dataclass
class SweepResult:
    offset_x: float
    offset_y: float
    gripper: str
    outcome: str
    depth: float
    peak_force: float
    elapsed: float

    def csv_row(self) -> dict:
        return {
            "offset_x_mm": self.offset_x,
            "offset_y_mm": self.offset_y,
            "gripper": self.gripper,
            "outcome": self.outcome,
            "depth_mm": self.depth,
            "peak_force_N": self.peak_force,
            "elapsed_s": self.elapsed,
        }


SWEEP_CSV_COLUMNS = (
    "offset_x_mm", "offset_y_mm", "gripper", "outcome",
    "depth_mm", "peak_force_N", "elapsed_s",
)


def misalignment_sweep(
    config: ScenarioConfig,
    gripper: str,
    offsets,
    axis: str = "x",
) -> list[SweepResult]:
    """Run the scripted insertion across lateral offsets for one gripper.

    Each offset gets a fresh session with a straight-down command
    trajectory; results are ordered exactly as the offsets given.
    """
    idx = {"x": 0, "y": 1}[axis]
    out = []
    for off in offsets:
        mis = list(config.initial_misalignment)
        mis[idx] = float(off)
        cfg = config.model_copy(update={"gripper": gripper, "initial_misalignment": mis})
        session = SimSession(cfg, record=False)
        status = session.run()
        out.append(SweepResult(
            offset_x=mis[0],
            offset_y=mis[1],
            gripper=gripper,
            outcome=status.outcome,
            depth=status.insertion_depth,
            peak_force=session.peak_force,
            elapsed=status.elapsed,
        ))
    return out

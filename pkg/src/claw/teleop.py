"""Two-channel teleoperation: pose commands one way, force feedback back.

Messages are newline-delimited JSON, one message per line, with a tagged
``type`` field: Command (leader -> follower pose + stiffness lever),
Feedback (follower -> leader wrench + e-stop flag), Hello (handshake with
spec_version), and Bye (orderly close with a reason). Sequence numbers are
strictly increasing per direction; stale or duplicate commands are dropped.

The pose channel carries the 6-vector TCP command in mm/deg (the plant is
Cartesian, so joint positions reduce to the tool pose). Force feedback is
the simulated flange wrench, unfiltered, at 50 Hz.

Decode is total: any byte sequence either parses into a message or raises
MalformedMessageError with the byte offset of the offending line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .episode import DEFAULT_EPOCH, EpisodeLog
from .errors import (
    MalformedMessageError,
    ProtocolViolationError,
    ScheduleConflictError,
    VersionMismatchError,
)
from .lockstate import StiffnessMode
from .scenario import SPEC_VERSION, ScenarioConfig
from .session import ReplaySource, SimSession


@dataclass(frozen=True)
class Command:
    seq: int
    t: float
    pose: tuple[float, ...]
    mode: str

    def __post_init__(self):
        if len(self.pose) != 6:
            raise ValueError("pose must have 6 entries")
        StiffnessMode.parse(self.mode)


@dataclass(frozen=True)
class Feedback:
    seq: int
    t: float
    wrench: tuple[float, ...]
    estop: bool

    def __post_init__(self):
        if len(self.wrench) != 6:
            raise ValueError("wrench must have 6 entries")


@dataclass(frozen=True)
class Hello:
    spec_version: int
    role: str


@dataclass(frozen=True)
class Bye:
    reason: str


TeleopMessage = Union[Command, Feedback, Hello, Bye]


def encode(msg: TeleopMessage) -> bytes:
    """One message as a newline-terminated JSON line."""
    if isinstance(msg, Command):
        payload = {"type": "command", "seq": msg.seq, "t": msg.t,
                   "pose": list(msg.pose), "mode": msg.mode}
    elif isinstance(msg, Feedback):
        payload = {"type": "feedback", "seq": msg.seq, "t": msg.t,
                   "wrench": list(msg.wrench), "estop": msg.estop}
    elif isinstance(msg, Hello):
        payload = {"type": "hello", "spec_version": msg.spec_version, "role": msg.role}
    elif isinstance(msg, Bye):
        payload = {"type": "bye", "reason": msg.reason}
    else:
        raise TypeError(f"not a teleop message: {type(msg)!r}")
    return (json.dumps(payload, allow_nan=False, separators=(",", ":")) + "\n").encode()


def _require(obj: dict, key: str, offset: int):
    if key not in obj:
        raise MalformedMessageError(f"missing field {key!r}", offset)
    return obj[key]


def _vector6(value, name: str, offset: int) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != 6:
        raise MalformedMessageError(f"{name} must be a 6-element array", offset)
    out = []
    for v in value:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise MalformedMessageError(f"{name} entries must be finite numbers", offset)
        out.append(float(v))
    return tuple(out)


def decode_line(line: bytes | str, offset: int = 0) -> TeleopMessage:
    """Decode one NDJSON line into a message; never raises anything else."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedMessageError("invalid utf-8", offset) from exc
    line = line.strip()
    if not line:
        raise MalformedMessageError("empty line", offset)
    try:
        obj = json.loads(line, parse_constant=_reject_constant)
    except ValueError as exc:
        raise MalformedMessageError(f"invalid JSON: {exc}", offset) from exc
    if not isinstance(obj, dict):
        raise MalformedMessageError("message must be a JSON object", offset)
    kind = obj.get("type")
    try:
        if kind == "command":
            seq = _require(obj, "seq", offset)
            t = _require(obj, "t", offset)
            if not isinstance(seq, int) or isinstance(seq, bool):
                raise MalformedMessageError("seq must be an integer", offset)
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t):
                raise MalformedMessageError("t must be a finite number", offset)
            mode = _require(obj, "mode", offset)
            try:
                StiffnessMode.parse(mode)
            except ValueError as exc:
                raise MalformedMessageError(f"unknown mode {mode!r}", offset) from exc
            return Command(seq=seq, t=float(t),
                           pose=_vector6(_require(obj, "pose", offset), "pose", offset),
                           mode=mode)
        if kind == "feedback":
            seq = _require(obj, "seq", offset)
            t = _require(obj, "t", offset)
            estop = _require(obj, "estop", offset)
            if not isinstance(seq, int) or isinstance(seq, bool):
                raise MalformedMessageError("seq must be an integer", offset)
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t):
                raise MalformedMessageError("t must be a finite number", offset)
            if not isinstance(estop, bool):
                raise MalformedMessageError("estop must be a boolean", offset)
            return Feedback(seq=seq, t=float(t),
                            wrench=_vector6(_require(obj, "wrench", offset), "wrench", offset),
                            estop=estop)
        if kind == "hello":
            ver = _require(obj, "spec_version", offset)
            role = _require(obj, "role", offset)
            if not isinstance(ver, int) or isinstance(ver, bool):
                raise MalformedMessageError("spec_version must be an integer", offset)
            if not isinstance(role, str):
                raise MalformedMessageError("role must be a string", offset)
            return Hello(spec_version=ver, role=role)
        if kind == "bye":
            reason = _require(obj, "reason", offset)
            if not isinstance(reason, str):
                raise MalformedMessageError("reason must be a string", offset)
            return Bye(reason=reason)
    except MalformedMessageError:
        raise
    except (TypeError, ValueError) as exc:
        raise MalformedMessageError(str(exc), offset) from exc
    raise MalformedMessageError(f"unknown message type {kind!r}", offset)


def _reject_constant(name):
    raise ValueError(f"non-finite constant {name} not allowed")


def decode_stream(data: bytes) -> Iterator[TeleopMessage]:
    """Decode a buffer of NDJSON lines, reporting offsets on failure."""
    offset = 0
    for raw in data.split(b"\n"):
        if raw.strip():
            yield decode_line(raw, offset)
        offset += len(raw) + 1


class FollowerSession:
    """Protocol endpoint that drives a simulator from a command stream.

    Construction requires a completed Hello handshake (matching
    spec_version). Commands are applied at most once per 20 ms window with
    stale or duplicate sequence numbers dropped; feedback frames carry the
    simulated flange wrench at 50 Hz of simulated time.
    """

    def __init__(self, session: SimSession, hello: Hello):
        if hello.spec_version != SPEC_VERSION:
            raise VersionMismatchError(
                f"peer spec_version {hello.spec_version} != {SPEC_VERSION}"
            )
        self.session = session
        self.peer_role = hello.role
        self.last_seq = -1
        self.feedback_seq = 0
        self._last_mode: str | None = None

    def handle(self, msg: TeleopMessage) -> bool:
        """Apply one inbound message; returns False once the peer says Bye."""
        if isinstance(msg, Bye):
            return False
        if isinstance(msg, Hello):
            raise ProtocolViolationError("duplicate hello")
        if isinstance(msg, Feedback):
            raise ProtocolViolationError("follower received feedback")
        if isinstance(msg, Command):
            if msg.seq <= self.last_seq:
                return True  # stale or duplicate: dropped, no state change
            self.last_seq = msg.seq
            self.session.submit_command(pose=list(msg.pose))
            if msg.mode != self._last_mode:
                self.session.command_stiffness(msg.mode)
                self._last_mode = msg.mode
            return True
        raise ProtocolViolationError(f"unsupported message {type(msg).__name__}")

    def tick_window(self) -> Feedback:
        """Advance one 20 ms window and emit the feedback frame."""
        self.session.advance(0.02)
        fb = Feedback(
            seq=self.feedback_seq,
            t=self.session.t,
            wrench=tuple(self.session.plant.measured_wrench.as_vector()),
            estop=self.session.monitor.tripped,
        )
        self.feedback_seq += 1
        return fb


def serve_follower(session: SimSession, messages: Iterable[TeleopMessage]) -> Iterator[TeleopMessage]:
    """Run a complete loopback follower session over an in-memory stream.

    The first message must be a Hello; each subsequent Command yields one
    20 ms step and one Feedback. Protocol violations close the stream with
    a Bye carrying the reason.
    """
    iterator = iter(messages)
    try:
        first = next(iterator)
    except StopIteration:
        yield Bye(reason="empty stream")
        return
    if not isinstance(first, Hello):
        yield Bye(reason="protocol-violation: expected hello")
        return
    try:
        follower = FollowerSession(session, first)
    except VersionMismatchError as exc:
        yield Bye(reason=f"version-mismatch: {exc}")
        return
    yield Hello(spec_version=SPEC_VERSION, role="follower")
    for msg in iterator:
        try:
            if not follower.handle(msg):
                break
        except ProtocolViolationError as exc:
            yield Bye(reason=f"protocol-violation: {exc}")
            return
        yield follower.tick_window()
    yield Bye(reason="stream ended")


def record(
    config: ScenarioConfig,
    started: str = DEFAULT_EPOCH,
    max_t: float | None = None,
) -> EpisodeLog:
    """Run the config's scripted trajectory to completion and return its log."""
    session = SimSession(config, started=started)
    if max_t is None:
        session.run()
    else:
        session.run(max_t=max_t)
    return session.log


def replay(
    log: EpisodeLog,
    config: ScenarioConfig,
    mode_override: StiffnessMode | str | None = None,
    mode_schedule: list[tuple[float, str]] | None = None,
    started: str | None = None,
) -> tuple[EpisodeLog, SimSession]:
    """Re-run a recorded episode, optionally substituting the mode channel.

    Recorded poses are fed as commands on their original 50 Hz grid. With no
    override the recorded lever channel is replayed too; a fixed
    ``mode_override`` or a ``mode_schedule`` replaces it (giving both is a
    conflict). The replay runs under the same scenario config, which must
    match the log's recorded config hash.
    """
    if log.spec_version != SPEC_VERSION:
        raise VersionMismatchError(f"episode spec_version {log.spec_version} != {SPEC_VERSION}")
    if mode_override is not None and mode_schedule is not None:
        raise ScheduleConflictError("give either a fixed mode override or a schedule, not both")
    if log.scenario_hash and log.scenario_hash != config.config_hash():
        raise VersionMismatchError(
            f"episode was recorded under scenario {log.scenario_hash}, "
            f"not {config.config_hash()}"
        )
    override = StiffnessMode.parse(mode_override) if mode_override is not None else None
    source = ReplaySource(log, mode_override=override, mode_schedule=mode_schedule)
    cfg = config.model_copy(update={"mode_schedule": []})
    session = SimSession(cfg, started=started or log.started, command_source=source)
    if not log.rows:
        return session.log, session
    end_t = log.rows[-1].t
    while not session.finished:
        session.step_inner()
        # Past the recorded stream the follower holds the last command; stop
        # at the log horizon plus a settling margin unless already terminal.
        if session.t > end_t + 2.0 and not session.status.terminal:
            break
    return session.log, session

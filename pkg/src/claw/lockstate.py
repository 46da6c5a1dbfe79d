"""Pin-carrier lock mechanism: three stiffness modes from one linear carrier.

Four locking pins ride on a single carrier driven by one actuator. The pin
profiles differ, so which joints engage depends on which end of the travel
the carrier sits at:

* carrier at 0 (center) -> free: no pins engaged, all four joints rotate.
* carrier at -1 -> half-lock: the slot-shaped pins engage the two X joints.
* carrier at +1 -> full-lock: all four pins engage.

Pins only constrain their joints at the travel ends, so any carrier position
strictly between the anchors behaves as free; in particular a half<->full
switch transits the free state. Mode and engaged-joint set are pure
functions of the carrier position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

# Carrier travel speed in carrier units per second: a full free->full-lock
# stroke takes 0.25 s. Switching latency is not a reported quantity; this is
# a configurable model default.
DEFAULT_CARRIER_RATE = 4.0

JOINTS_X = frozenset({"X+", "X-"})
JOINTS_ALL = frozenset({"X+", "X-", "Y+", "Y-"})


class StiffnessMode(str, enum.Enum):
    FREE = "free"
    HALF_LOCK = "half_lock"
    FULL_LOCK = "full_lock"

    @classmethod
    def parse(cls, value: "StiffnessMode | str") -> "StiffnessMode":
        if isinstance(value, StiffnessMode):
            return value
        return cls(value)


#: Carrier anchor position for each mode.
CARRIER_POSITION = {
    StiffnessMode.FREE: 0.0,
    StiffnessMode.HALF_LOCK: -1.0,
    StiffnessMode.FULL_LOCK: 1.0,
}


def mode_at(carrier_position: float) -> StiffnessMode:
    """Effective mode for a carrier position; anchors only, free in transit."""
    if carrier_position == -1.0:
        return StiffnessMode.HALF_LOCK
    if carrier_position == 1.0:
        return StiffnessMode.FULL_LOCK
    return StiffnessMode.FREE


def engaged_joints_at(carrier_position: float) -> frozenset[str]:
    if carrier_position == -1.0:
        return JOINTS_X
    if carrier_position == 1.0:
        return JOINTS_ALL
    return frozenset()


@dataclass(frozen=True)
class LockState:
    """Carrier position plus the mode/joint view derived from it."""

    carrier_position: float = 0.0
    engaged_joints: frozenset[str] = field(default_factory=frozenset)
    mode: StiffnessMode = StiffnessMode.FREE

    def __post_init__(self):
        if not -1.0 <= self.carrier_position <= 1.0:
            raise ValueError(f"carrier position {self.carrier_position} outside [-1, 1]")
        if self.mode is not mode_at(self.carrier_position):
            raise ValueError(
                f"mode {self.mode.value} inconsistent with carrier {self.carrier_position}"
            )
        if self.engaged_joints != engaged_joints_at(self.carrier_position):
            raise ValueError("engaged joints inconsistent with carrier position")

    @classmethod
    def at(cls, position: float) -> "LockState":
        return cls(
            carrier_position=position,
            engaged_joints=engaged_joints_at(position),
            mode=mode_at(position),
        )

    @classmethod
    def for_mode(cls, mode: StiffnessMode | str) -> "LockState":
        return cls.at(CARRIER_POSITION[StiffnessMode.parse(mode)])


def command_mode(
    current: LockState,
    target: StiffnessMode | str,
    dt: float,
    carrier_rate: float = DEFAULT_CARRIER_RATE,
) -> LockState:
    """Advance the carrier toward ``target``'s anchor for ``dt`` seconds.

    The carrier moves linearly at ``carrier_rate`` and lands exactly on the
    anchor (never overshoots), so the mode updates precisely on arrival.
    Commands are idempotent; commanding the current mode is a no-op.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    goal = CARRIER_POSITION[StiffnessMode.parse(target)]
    pos = current.carrier_position
    if pos == goal:
        return current
    travel = carrier_rate * dt
    if goal > pos:
        pos = min(goal, pos + travel)
    else:
        pos = max(goal, pos - travel)
    return LockState.at(pos)


def locked_axes(mode: StiffnessMode | str) -> frozenset[str]:
    """Wrist axes whose compliance the mode removes.

    Z, roll, and pitch are never in the image: the pins act on the rotary
    joints, which only gate in-plane translation and yaw.
    """
    mode = StiffnessMode.parse(mode)
    if mode is StiffnessMode.FREE:
        return frozenset()
    if mode is StiffnessMode.HALF_LOCK:
        return frozenset({"X"})
    return frozenset({"X", "Y", "Yaw"})


def settle_time(current: LockState, target: StiffnessMode | str,
                carrier_rate: float = DEFAULT_CARRIER_RATE) -> float:
    """Seconds of carrier travel needed to reach the target anchor."""
    goal = CARRIER_POSITION[StiffnessMode.parse(target)]
    return abs(goal - current.carrier_position) / carrier_rate

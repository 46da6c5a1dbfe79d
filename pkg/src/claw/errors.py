"""Exception types shared across the claw package."""


class ClawError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class InvalidSpecError(ClawError):
    """A leaf-spring spec or derived loop geometry is physically impossible."""


class InfeasibleCalibrationError(ClawError):
    """Stiffness anchors cannot be satisfied within tolerance."""


class GeometryViolationError(ClawError):
    """Scenario geometry is degenerate (non-positive peg width, clearance, ...)."""


class EStopTrippedError(ClawError):
    """The emergency-stop monitor latched during a controller step."""


class MalformedMessageError(ClawError):
    """A wire message could not be decoded.

    ``offset`` is the byte offset of the offending line within the input.
    """

    def __init__(self, reason: str, offset: int = 0):
        super().__init__(f"malformed message at byte {offset}: {reason}")
        self.reason = reason
        self.offset = offset


class ProtocolViolationError(ClawError):
    """A teleop session received input that violates the protocol."""


class VersionMismatchError(ClawError):
    """Wire or file spec_version does not match this implementation."""


class ScheduleConflictError(ClawError):
    """Both a fixed mode override and a mode schedule were supplied."""

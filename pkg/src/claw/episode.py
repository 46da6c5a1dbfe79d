"""Episode logs: timestamped pose/deflection/wrench/mode streams on a 20 ms grid.

File format is CSV with one comment header line:

    # claw-episode v1 scenario=<hash> gripper=<id> started=<iso8601>

followed by the column row and data rows. The pose columns carry the
*commanded* pose active during each window (that is what replay feeds back
as commands); deflection and wrench columns carry the simulated physics.
The mode column carries the commanded lever target for the same reason.

Deterministic runs stamp ``started`` with a fixed epoch so identical runs
produce byte-identical files; interactive recordings may pass wall-clock
time instead.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .errors import MalformedMessageError, VersionMismatchError

FORMAT_TAG = "claw-episode v1"
SPEC_VERSION = 1
SAMPLE_PERIOD_S = 0.02
DEFAULT_EPOCH = "1970-01-01T00:00:00Z"

COLUMNS = (
    "t_s",
    "x_mm", "y_mm", "z_mm", "roll_deg", "pitch_deg", "yaw_deg",
    "dx_mm", "dy_mm", "dz_mm", "droll_deg", "dpitch_deg", "dyaw_deg",
    "fx_N", "fy_N", "fz_N", "tx_Nm", "ty_Nm", "tz_Nm",
    "mode", "estop", "event",
)


@dataclass
class EpisodeRow:
    t: float
    pose: list[float]
    deflection: list[float]
    wrench: list[float]
    mode: str
    estop: bool
    event: str = ""


@dataclass
class EpisodeLog:
    scenario_hash: str
    gripper: str
    started: str = DEFAULT_EPOCH
    spec_version: int = SPEC_VERSION
    rows: list[EpisodeRow] = field(default_factory=list)

    def append(self, row: EpisodeRow) -> None:
        if self.rows and row.t <= self.rows[-1].t:
            raise ValueError("rows must be strictly increasing in time")
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# {FORMAT_TAG} scenario={self.scenario_hash} "
            f"gripper={self.gripper} started={self.started}\n"
        )
        buf.write(",".join(COLUMNS) + "\n")
        for r in self.rows:
            cells = [repr(float(r.t))]
            cells += [repr(float(v)) for v in r.pose]
            cells += [repr(float(v)) for v in r.deflection]
            cells += [repr(float(v)) for v in r.wrench]
            cells += [r.mode, "1" if r.estop else "0", r.event]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def save(self, path) -> None:
        from .fileio import atomic_write_text

        atomic_write_text(path, self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "EpisodeLog":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise MalformedMessageError("missing episode header line", 0)
        header = lines[0][2:]
        if not header.startswith(FORMAT_TAG):
            if header.startswith("claw-episode"):
                raise VersionMismatchError(f"unsupported episode format: {header.split()[1]}")
            raise MalformedMessageError("not a claw episode file", 0)
        meta = {}
        for tokenized in header[len(FORMAT_TAG):].split():
            if "=" in tokenized:
                key, val = tokenized.split("=", 1)
                meta[key] = val
        if len(lines) < 2 or lines[1].split(",") != list(COLUMNS):
            raise MalformedMessageError("episode column header mismatch", len(lines[0]) + 1)
        log = cls(
            scenario_hash=meta.get("scenario", ""),
            gripper=meta.get("gripper", ""),
            started=meta.get("started", DEFAULT_EPOCH),
        )
        offset = len(lines[0]) + 1 + len(lines[1]) + 1
        for lineno, line in enumerate(lines[2:], start=3):
            if not line.strip():
                offset += len(line) + 1
                continue
            cells = line.split(",")
            if len(cells) != len(COLUMNS):
                raise MalformedMessageError(f"line {lineno}: expected {len(COLUMNS)} cells", offset)
            try:
                row = EpisodeRow(
                    t=float(cells[0]),
                    pose=[float(v) for v in cells[1:7]],
                    deflection=[float(v) for v in cells[7:13]],
                    wrench=[float(v) for v in cells[13:19]],
                    mode=cells[19],
                    estop=cells[20] == "1",
                    event=cells[21],
                )
            except ValueError as exc:
                raise MalformedMessageError(f"line {lineno}: {exc}", offset) from exc
            log.append(row)
            offset += len(line) + 1
        return log

    @classmethod
    def load(cls, path) -> "EpisodeLog":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_csv(fh.read())

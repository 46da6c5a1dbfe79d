/**
 * Episode file loading and the door-replay preset.
 *
 * Episode CSVs open with `# claw-episode v1 scenario=<hash> gripper=<id>
 * started=<iso>` followed by a fixed column row; parse failures carry the
 * offending line number so the UI can show a useful diagnostic.
 */

export interface EpisodeRow {
  t: number;
  pose: number[];
  deflection: number[];
  wrench: number[];
  mode: string;
  estop: boolean;
  event: string;
}

export interface Episode {
  scenarioHash: string;
  gripper: string;
  started: string;
  rows: EpisodeRow[];
}

export class EpisodeParseError extends Error {
  constructor(message: string, readonly line: number) {
    super(`line ${line}: ${message}`);
  }
}

const COLUMNS =
  "t_s,x_mm,y_mm,z_mm,roll_deg,pitch_deg,yaw_deg," +
  "dx_mm,dy_mm,dz_mm,droll_deg,dpitch_deg,dyaw_deg," +
  "fx_N,fy_N,fz_N,tx_Nm,ty_Nm,tz_Nm,mode,estop,event";

export function parseEpisodeCsv(text: string): Episode {
  const lines = text.split(/\r?\n/);
  if (!lines.length || !lines[0].startsWith("# claw-episode v1")) {
    throw new EpisodeParseError("not a claw-episode v1 file", 1);
  }
  const meta: Record<string, string> = {};
  for (const token of lines[0].slice("# claw-episode v1".length).trim().split(/\s+/)) {
    const eq = token.indexOf("=");
    if (eq > 0) meta[token.slice(0, eq)] = token.slice(eq + 1);
  }
  if ((lines[1] ?? "") !== COLUMNS) {
    throw new EpisodeParseError("unexpected column header", 2);
  }
  const rows: EpisodeRow[] = [];
  for (let i = 2; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) continue;
    const cells = line.split(",");
    if (cells.length !== 22) {
      throw new EpisodeParseError(`expected 22 cells, found ${cells.length}`, i + 1);
    }
    const nums = cells.slice(0, 19).map((c) => Number(c));
    const bad = nums.findIndex((n) => !Number.isFinite(n));
    if (bad >= 0) {
      throw new EpisodeParseError(`cell ${bad + 1} is not a number: '${cells[bad]}'`, i + 1);
    }
    rows.push({
      t: nums[0],
      pose: nums.slice(1, 7),
      deflection: nums.slice(7, 13),
      wrench: nums.slice(13, 19),
      mode: cells[19],
      estop: cells[20] === "1",
      event: cells[21],
    });
  }
  return {
    scenarioHash: meta["scenario"] ?? "",
    gripper: meta["gripper"] ?? "",
    started: meta["started"] ?? "",
    rows,
  };
}

/** Scrubber over a loaded episode: frame lookup by time. */
export class Scrubber {
  index = 0;

  constructor(readonly episode: Episode) {}

  get duration(): number {
    const rows = this.episode.rows;
    return rows.length ? rows[rows.length - 1].t : 0;
  }

  seek(t: number): EpisodeRow | null {
    const rows = this.episode.rows;
    if (!rows.length) return null;
    let lo = 0;
    let hi = rows.length - 1;
    while (lo < hi) {
      const mid = (lo + hi + 1) >> 1;
      if (rows[mid].t <= t) lo = mid;
      else hi = mid - 1;
    }
    this.index = lo;
    return rows[lo];
  }
}

export interface DoorTrace {
  label: string;
  /** (t, |primary-axis force|) samples. */
  points: { t: number; v: number }[];
  outcome: "success" | "estop" | "other";
}

export interface DoorPreset {
  traces: DoorTrace[];
  /** Time of the full->free switch on the variable trace, if present. */
  switchT: number | null;
  /** Marker where the force dropped by >= 50% within 0.1 s of the switch. */
  dropMarker: { t: number; from: number; to: number } | null;
}

function outcomeOf(rows: EpisodeRow[]): "success" | "estop" | "other" {
  for (const row of rows) {
    if (row.event.includes("success")) return "success";
    if (row.event.includes("estop") || row.estop) return "estop";
  }
  return "other";
}

/**
 * Overlay the three door-replay conditions (variable, full-lock only,
 * free only) on the primary motion axis and locate the sharp force drop
 * at the variable trace's full->free switch.
 */
export function doorPreset(variable: Episode, fullOnly: Episode, freeOnly: Episode): DoorPreset {
  const axis = 14 - 13; // fy within the wrench block: the press axis
  const toTrace = (label: string, ep: Episode): DoorTrace => ({
    label,
    points: ep.rows.map((r) => ({ t: r.t, v: Math.abs(r.wrench[axis]) })),
    outcome: outcomeOf(ep.rows),
  });
  const traces = [
    toTrace("variable", variable),
    toTrace("full-lock only", fullOnly),
    toTrace("free only", freeOnly),
  ];

  let switchT: number | null = null;
  const rows = variable.rows;
  for (let i = 1; i < rows.length; i++) {
    if (rows[i - 1].mode === "full_lock" && rows[i].mode === "free") {
      switchT = rows[i].t;
      break;
    }
  }
  let dropMarker: DoorPreset["dropMarker"] = null;
  if (switchT !== null) {
    const beforeIdx = rows.findIndex((r) => r.t >= switchT!) - 1;
    const before = beforeIdx >= 0 ? Math.abs(rows[beforeIdx].wrench[axis]) : 0;
    let minAfter = Infinity;
    let minT = switchT;
    for (const r of rows) {
      if (r.t > switchT && r.t <= switchT + 0.1) {
        const v = Math.abs(r.wrench[axis]);
        if (v < minAfter) {
          minAfter = v;
          minT = r.t;
        }
      }
    }
    if (Number.isFinite(minAfter) && before > 0 && minAfter <= 0.5 * before) {
      dropMarker = { t: minT, from: before, to: minAfter };
    }
  }
  return { traces, switchT, dropMarker };
}

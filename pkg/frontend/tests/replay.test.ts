import { describe, expect, it } from "vitest";

import { RecordingContext, renderStripChart } from "../src/charts";
import {
  Episode,
  EpisodeParseError,
  Scrubber,
  doorPreset,
  parseEpisodeCsv,
} from "../src/replay";

const COLUMNS =
  "t_s,x_mm,y_mm,z_mm,roll_deg,pitch_deg,yaw_deg," +
  "dx_mm,dy_mm,dz_mm,droll_deg,dpitch_deg,dyaw_deg," +
  "fx_N,fy_N,fz_N,tx_Nm,ty_Nm,tz_Nm,mode,estop,event";

function makeCsv(rows: string[]): string {
  return [
    "# claw-episode v1 scenario=abc123 gripper=claw started=1970-01-01T00:00:00Z",
    COLUMNS,
    ...rows,
  ].join("\n");
}

function row(t: number, fy: number, mode = "free", estop = "0", event = ""): string {
  const pose = [0, 0, 0, 0, 0, 0].join(",");
  const defl = [0, 0, 0, 0, 0, 0].join(",");
  const wrench = [0, fy, 0, 0, 0, 0].join(",");
  return `${t},${pose},${defl},${wrench},${mode},${estop},${event}`;
}

describe("parseEpisodeCsv", () => {
  it("parses header metadata and rows", () => {
    const ep = parseEpisodeCsv(makeCsv([row(0, 0), row(0.02, -1.5)]));
    expect(ep.scenarioHash).toBe("abc123");
    expect(ep.gripper).toBe("claw");
    expect(ep.rows).toHaveLength(2);
    expect(ep.rows[1].wrench[1]).toBe(-1.5);
  });

  it("rejects non-episode files", () => {
    expect(() => parseEpisodeCsv("t,x\n0,1")).toThrow(EpisodeParseError);
  });

  it("reports the line number of a bad row", () => {
    const bad = makeCsv([row(0, 0), "0.02,oops"]);
    try {
      parseEpisodeCsv(bad);
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(EpisodeParseError);
      expect((err as EpisodeParseError).line).toBe(4);
      expect((err as EpisodeParseError).message).toContain("line 4");
    }
  });

  it("reports non-numeric cells with position", () => {
    const bad = makeCsv([row(0, 0).replace("0,free", "x,free")]);
    expect(() => parseEpisodeCsv(bad)).toThrow(/not a number/);
  });
});

describe("Scrubber", () => {
  it("seeks to the latest row at or before t", () => {
    const ep = parseEpisodeCsv(makeCsv([row(0, 0), row(0.02, 1), row(0.04, 2)]));
    const scrub = new Scrubber(ep);
    expect(scrub.duration).toBeCloseTo(0.04);
    expect(scrub.seek(0.03)?.wrench[1]).toBe(1);
    expect(scrub.seek(99)?.wrench[1]).toBe(2);
    expect(scrub.seek(0)?.wrench[1]).toBe(0);
  });
});

function syntheticTriad(): [Episode, Episode, Episode] {
  // Variable: press force rises in full-lock, collapses at the switch.
  const variable = parseEpisodeCsv(
    makeCsv([
      row(0.0, 0, "full_lock"),
      row(0.02, -4, "full_lock"),
      row(0.04, -6, "full_lock", "0", "latch"),
      row(0.06, -0.4, "free", "0", "handle_release"),
      row(0.08, -0.1, "free"),
      row(0.1, -0.05, "free", "0", "success"),
    ]),
  );
  const fullOnly = parseEpisodeCsv(
    makeCsv([
      row(0.0, 0, "full_lock"),
      row(0.02, -4, "full_lock"),
      row(0.04, -6, "full_lock", "0", "latch"),
      row(0.06, -5.5, "full_lock"),
      row(0.08, -5.0, "full_lock"),
      row(0.1, -4.5, "full_lock", "0", "success"),
    ]),
  );
  const freeOnly = parseEpisodeCsv(
    makeCsv([
      row(0.0, 0, "free"),
      row(0.02, -2, "free"),
      row(0.04, -3, "free"),
      row(0.06, -3, "free", "1", "estop:fx"),
    ]),
  );
  return [variable, fullOnly, freeOnly];
}

describe("doorPreset", () => {
  it("builds three traces with outcomes and a drop marker", () => {
    const [variable, fullOnly, freeOnly] = syntheticTriad();
    const preset = doorPreset(variable, fullOnly, freeOnly);
    expect(preset.traces).toHaveLength(3);
    expect(preset.traces.map((t) => t.outcome)).toEqual(["success", "success", "estop"]);
    expect(preset.switchT).toBeCloseTo(0.06);
    expect(preset.dropMarker).not.toBeNull();
    expect(preset.dropMarker!.from).toBeCloseTo(6);
    expect(preset.dropMarker!.to).toBeLessThanOrEqual(3);
  });

  it("omits the marker when no sharp drop exists", () => {
    const [, fullOnly] = syntheticTriad();
    const preset = doorPreset(fullOnly, fullOnly, fullOnly);
    expect(preset.dropMarker).toBeNull();
  });
});

describe("renderStripChart", () => {
  it("draws every series, thresholds, and markers", () => {
    const ctx = new RecordingContext();
    renderStripChart(
      ctx,
      [
        { label: "a", color: "#111111", points: [{ t: 0, v: 0 }, { t: 1, v: 5 }] },
        { label: "b", color: "#222222", points: [{ t: 0, v: 1 }, { t: 1, v: -2 }] },
        { label: "c", color: "#333333", points: [{ t: 0, v: 2 }, { t: 1, v: 3 }] },
      ],
      {
        width: 400,
        height: 150,
        thresholds: [{ value: 50, label: "e-stop 50 N" }],
        markers: [{ t: 0.5, label: "full->free" }],
      },
    );
    const colors = ctx.strokes().map((s) => s.color);
    for (const c of ["#111111", "#222222", "#333333"]) {
      expect(colors).toContain(c);
    }
    expect(ctx.texts()).toContain("e-stop 50 N");
    expect(ctx.texts()).toContain("full->free");
  });

  it("renders an empty-data placeholder without crashing", () => {
    const ctx = new RecordingContext();
    renderStripChart(ctx, [{ label: "a", color: "#fff", points: [] }], {
      width: 100,
      height: 50,
    });
    expect(ctx.texts()).toContain("no data");
  });
});

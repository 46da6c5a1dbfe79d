/**
 * Dependency-free strip charts on a 2D canvas.
 *
 * Rendering goes through the small Draw2D surface below (the subset of
 * CanvasRenderingContext2D actually used), so tests can pass a recording
 * stub and assert on emitted primitives without a browser.
 */

export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  font: string;
  setLineDash(pattern: number[]): void;
}

export interface Series {
  label: string;
  color: string;
  points: { t: number; v: number }[];
}

export interface Marker {
  t: number;
  label: string;
  color?: string;
}

export interface StripChartOptions {
  width: number;
  height: number;
  /** Horizontal guide lines, e.g. an e-stop threshold. */
  thresholds?: { value: number; label: string; color?: string }[];
  markers?: Marker[];
  /** Fixed value range; inferred from the data when omitted. */
  min?: number;
  max?: number;
  timeWindow?: number;
}

const PAD_LEFT = 42;
const PAD_BOTTOM = 16;
const PAD_TOP = 8;

export function renderStripChart(ctx: Draw2D, series: Series[], opts: StripChartOptions): void {
  const { width, height } = opts;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);

  const all = series.flatMap((s) => s.points);
  if (!all.length) {
    ctx.fillStyle = "#8899aa";
    ctx.font = "12px sans-serif";
    ctx.fillText("no data", width / 2 - 20, height / 2);
    return;
  }
  const tMax = Math.max(...all.map((p) => p.t));
  const window = opts.timeWindow ?? 30;
  const tMin = Math.max(0, tMax - window);
  let vMin = opts.min ?? Math.min(0, ...all.map((p) => p.v));
  let vMax = opts.max ?? Math.max(0, ...all.map((p) => p.v));
  for (const th of opts.thresholds ?? []) {
    vMin = Math.min(vMin, th.value);
    vMax = Math.max(vMax, th.value);
  }
  if (vMax - vMin < 1e-9) vMax = vMin + 1;
  const plotW = width - PAD_LEFT - 4;
  const plotH = height - PAD_TOP - PAD_BOTTOM;
  const sx = (t: number) => PAD_LEFT + ((t - tMin) / Math.max(tMax - tMin, 1e-9)) * plotW;
  const sy = (v: number) => PAD_TOP + (1 - (v - vMin) / (vMax - vMin)) * plotH;

  // Axes and value labels.
  ctx.strokeStyle = "#2c3440";
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.beginPath();
  ctx.moveTo(PAD_LEFT, PAD_TOP);
  ctx.lineTo(PAD_LEFT, PAD_TOP + plotH);
  ctx.lineTo(PAD_LEFT + plotW, PAD_TOP + plotH);
  ctx.stroke();
  ctx.fillStyle = "#8899aa";
  ctx.font = "10px sans-serif";
  ctx.fillText(vMax.toFixed(1), 2, PAD_TOP + 8);
  ctx.fillText(vMin.toFixed(1), 2, PAD_TOP + plotH);

  for (const th of opts.thresholds ?? []) {
    ctx.strokeStyle = th.color ?? "#aa4444";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(PAD_LEFT, sy(th.value));
    ctx.lineTo(PAD_LEFT + plotW, sy(th.value));
    ctx.stroke();
    ctx.fillStyle = th.color ?? "#aa4444";
    ctx.fillText(th.label, PAD_LEFT + 4, sy(th.value) - 2);
  }
  ctx.setLineDash([]);

  for (const s of series) {
    const pts = s.points.filter((p) => p.t >= tMin);
    if (!pts.length) continue;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(sx(pts[0].t), sy(pts[0].v));
    for (let i = 1; i < pts.length; i++) {
      ctx.lineTo(sx(pts[i].t), sy(pts[i].v));
    }
    ctx.stroke();
  }

  for (const m of opts.markers ?? []) {
    if (m.t < tMin || m.t > tMax) continue;
    ctx.strokeStyle = m.color ?? "#ddbb44";
    ctx.lineWidth = 1;
    ctx.setLineDash([2, 3]);
    ctx.beginPath();
    ctx.moveTo(sx(m.t), PAD_TOP);
    ctx.lineTo(sx(m.t), PAD_TOP + plotH);
    ctx.stroke();
    ctx.fillStyle = m.color ?? "#ddbb44";
    ctx.fillText(m.label, sx(m.t) + 2, PAD_TOP + 10);
  }
  ctx.setLineDash([]);
}

/** Records primitive calls so tests can assert on chart output headlessly. */
export class RecordingContext implements Draw2D {
  calls: { op: string; args: unknown[] }[] = [];
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 1;
  font = "";

  private log(op: string, ...args: unknown[]) {
    this.calls.push({ op, args });
  }

  clearRect(...args: number[]) {
    this.log("clearRect", ...args);
  }
  beginPath() {
    this.log("beginPath");
  }
  moveTo(...args: number[]) {
    this.log("moveTo", ...args);
  }
  lineTo(...args: number[]) {
    this.log("lineTo", ...args);
  }
  stroke() {
    this.log("stroke", this.strokeStyle, this.lineWidth);
  }
  fillRect(...args: number[]) {
    this.log("fillRect", ...args);
  }
  fillText(text: string, x: number, y: number) {
    this.log("fillText", text, x, y);
  }
  setLineDash(pattern: number[]) {
    this.log("setLineDash", [...pattern]);
  }

  count(op: string): number {
    return this.calls.filter((c) => c.op === op).length;
  }

  texts(): string[] {
    return this.calls.filter((c) => c.op === "fillText").map((c) => String(c.args[0]));
  }

  strokes(): { color: string }[] {
    return this.calls.filter((c) => c.op === "stroke").map((c) => ({ color: String(c.args[0]) }));
  }
}

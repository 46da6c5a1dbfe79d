/**
 * 2D schematic: top view (XY deflection), side view (Z deflection), and the
 * lock lever position. The wrist base is drawn at the origin and the finger
 * unit is displaced by the live deflection, exaggerated for visibility.
 */

import { Draw2D } from "./charts.js";
import { StateFrame } from "./protocol.js";

export interface SchematicOptions {
  width: number;
  height: number;
  /** mm of deflection per pixel of displacement on screen. */
  scale?: number;
}

export function renderSchematic(ctx: Draw2D, frame: StateFrame | null, opts: SchematicOptions): void {
  const { width, height } = opts;
  const scale = opts.scale ?? 1.5;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);
  ctx.font = "10px sans-serif";

  const half = width / 2;
  const cy = height / 2;
  ctx.fillStyle = "#8899aa";
  ctx.fillText("top (X/Y)", 8, 12);
  ctx.fillText("side (Z)", half + 8, 12);

  // Envelope circles / rails.
  ctx.strokeStyle = "#2c3440";
  ctx.lineWidth = 1;
  ctx.setLineDash([3, 3]);
  const r = 40 * scale;
  ctx.beginPath();
  ctx.moveTo(half / 2 - r, cy);
  ctx.lineTo(half / 2 + r, cy);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(half / 2, cy - r);
  ctx.lineTo(half / 2, cy + r);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(half + half / 2, cy - 20 * scale);
  ctx.lineTo(half + half / 2, cy + 10 * scale);
  ctx.stroke();
  ctx.setLineDash([]);

  const d = frame?.deflection ?? [0, 0, 0, 0, 0, 0];
  // Top view: finger unit offset by x/y deflection; yaw drawn as a heading line.
  const fx = half / 2 + d[0] * scale;
  const fy = cy - d[1] * scale;
  ctx.fillStyle = "#58a6ff";
  ctx.fillRect(fx - 6, fy - 6, 12, 12);
  const yawRad = ((frame?.deflection[5] ?? 0) * Math.PI) / 180;
  ctx.strokeStyle = "#58a6ff";
  ctx.beginPath();
  ctx.moveTo(fx, fy);
  ctx.lineTo(fx + 16 * Math.sin(yawRad), fy - 16 * Math.cos(yawRad));
  ctx.stroke();

  // Side view: compression raises the block, extension lowers it.
  const sz = cy - d[2] * scale;
  ctx.fillStyle = "#58a6ff";
  ctx.fillRect(half + half / 2 - 6, sz - 6, 12, 12);

  // Lever state.
  const mode = frame?.mode ?? "free";
  const carrier = frame?.carrier_position ?? 0;
  ctx.fillStyle = "#8899aa";
  ctx.fillText(`lever: ${mode} (carrier ${carrier.toFixed(2)})`, 8, height - 6);
}

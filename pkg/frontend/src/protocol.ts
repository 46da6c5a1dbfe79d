/**
 * Wire protocol: newline-delimited JSON shared with the session server.
 *
 * Encoding is canonical (same field order and compact separators as the
 * server), so encode(decode(line)) reproduces the exact bytes for every
 * message whose numbers print in plain decimal notation.
 */

export const SPEC_VERSION = 1;

export type StiffnessMode = "free" | "half_lock" | "full_lock";
export const MODES: StiffnessMode[] = ["free", "half_lock", "full_lock"];

export type Vec6 = [number, number, number, number, number, number];

export interface CommandMsg {
  type: "command";
  seq: number;
  t: number;
  pose: Vec6;
  mode: StiffnessMode;
}

export interface FeedbackMsg {
  type: "feedback";
  seq: number;
  t: number;
  wrench: Vec6;
  estop: boolean;
}

export interface HelloMsg {
  type: "hello";
  spec_version: number;
  role: string;
}

export interface ByeMsg {
  type: "bye";
  reason: string;
}

export interface ScenarioState {
  outcome: string;
  insertion_depth?: number;
  handle_angle?: number;
  latch_released?: boolean;
}

export interface StateFrame {
  type: "state";
  t: number;
  pose: Vec6;
  deflection: Vec6;
  wrench: Vec6;
  mode: StiffnessMode;
  carrier_position: number;
  estop: boolean;
  scenario: ScenarioState;
}

export type TeleopMessage = CommandMsg | FeedbackMsg | HelloMsg | ByeMsg;
export type InboundMessage = TeleopMessage | StateFrame;

export class MalformedMessage extends Error {
  constructor(reason: string, readonly offset = 0) {
    super(`malformed message at byte ${offset}: ${reason}`);
  }
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function vec6(value: unknown, name: string, offset: number): Vec6 {
  if (!Array.isArray(value) || value.length !== 6) {
    throw new MalformedMessage(`${name} must be a 6-element array`, offset);
  }
  for (const v of value) {
    if (!isFiniteNumber(v)) {
      throw new MalformedMessage(`${name} entries must be finite numbers`, offset);
    }
  }
  return value as Vec6;
}

function requireField(obj: Record<string, unknown>, key: string, offset: number): unknown {
  if (!(key in obj)) throw new MalformedMessage(`missing field '${key}'`, offset);
  return obj[key];
}

/** Decode one NDJSON line; throws MalformedMessage and nothing else. */
export function decodeLine(line: string, offset = 0): InboundMessage {
  const trimmed = line.trim();
  if (!trimmed) throw new MalformedMessage("empty line", offset);
  let obj: unknown;
  try {
    obj = JSON.parse(trimmed);
  } catch (err) {
    throw new MalformedMessage(`invalid JSON: ${(err as Error).message}`, offset);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new MalformedMessage("message must be a JSON object", offset);
  }
  const rec = obj as Record<string, unknown>;
  const kind = rec["type"];
  switch (kind) {
    case "command": {
      const seq = requireField(rec, "seq", offset);
      const t = requireField(rec, "t", offset);
      const mode = requireField(rec, "mode", offset);
      if (!Number.isInteger(seq)) throw new MalformedMessage("seq must be an integer", offset);
      if (!isFiniteNumber(t)) throw new MalformedMessage("t must be a finite number", offset);
      if (!MODES.includes(mode as StiffnessMode)) {
        throw new MalformedMessage(`unknown mode '${String(mode)}'`, offset);
      }
      return {
        type: "command",
        seq: seq as number,
        t: t as number,
        pose: vec6(requireField(rec, "pose", offset), "pose", offset),
        mode: mode as StiffnessMode,
      };
    }
    case "feedback": {
      const seq = requireField(rec, "seq", offset);
      const t = requireField(rec, "t", offset);
      const estop = requireField(rec, "estop", offset);
      if (!Number.isInteger(seq)) throw new MalformedMessage("seq must be an integer", offset);
      if (!isFiniteNumber(t)) throw new MalformedMessage("t must be a finite number", offset);
      if (typeof estop !== "boolean") throw new MalformedMessage("estop must be a boolean", offset);
      return {
        type: "feedback",
        seq: seq as number,
        t: t as number,
        wrench: vec6(requireField(rec, "wrench", offset), "wrench", offset),
        estop,
      };
    }
    case "hello": {
      const ver = requireField(rec, "spec_version", offset);
      const role = requireField(rec, "role", offset);
      if (!Number.isInteger(ver)) throw new MalformedMessage("spec_version must be an integer", offset);
      if (typeof role !== "string") throw new MalformedMessage("role must be a string", offset);
      return { type: "hello", spec_version: ver as number, role };
    }
    case "bye": {
      const reason = requireField(rec, "reason", offset);
      if (typeof reason !== "string") throw new MalformedMessage("reason must be a string", offset);
      return { type: "bye", reason };
    }
    case "state": {
      const frame = {
        type: "state" as const,
        t: requireField(rec, "t", offset),
        pose: vec6(requireField(rec, "pose", offset), "pose", offset),
        deflection: vec6(requireField(rec, "deflection", offset), "deflection", offset),
        wrench: vec6(requireField(rec, "wrench", offset), "wrench", offset),
        mode: requireField(rec, "mode", offset),
        carrier_position: requireField(rec, "carrier_position", offset),
        estop: requireField(rec, "estop", offset),
        scenario: requireField(rec, "scenario", offset),
      };
      if (!isFiniteNumber(frame.t)) throw new MalformedMessage("t must be a finite number", offset);
      if (!MODES.includes(frame.mode as StiffnessMode)) {
        throw new MalformedMessage(`unknown mode '${String(frame.mode)}'`, offset);
      }
      if (!isFiniteNumber(frame.carrier_position)) {
        throw new MalformedMessage("carrier_position must be a number", offset);
      }
      if (typeof frame.estop !== "boolean") {
        throw new MalformedMessage("estop must be a boolean", offset);
      }
      if (typeof frame.scenario !== "object" || frame.scenario === null) {
        throw new MalformedMessage("scenario must be an object", offset);
      }
      return frame as StateFrame;
    }
    default:
      throw new MalformedMessage(`unknown message type '${String(kind)}'`, offset);
  }
}

/** Encode one message as a newline-terminated JSON line (canonical order). */
export function encodeLine(msg: TeleopMessage): string {
  switch (msg.type) {
    case "command":
      return (
        JSON.stringify({ type: "command", seq: msg.seq, t: msg.t, pose: msg.pose, mode: msg.mode }) +
        "\n"
      );
    case "feedback":
      return (
        JSON.stringify({
          type: "feedback",
          seq: msg.seq,
          t: msg.t,
          wrench: msg.wrench,
          estop: msg.estop,
        }) + "\n"
      );
    case "hello":
      return JSON.stringify({ type: "hello", spec_version: msg.spec_version, role: msg.role }) + "\n";
    case "bye":
      return JSON.stringify({ type: "bye", reason: msg.reason }) + "\n";
  }
}

/** Accumulates stream chunks and yields complete NDJSON lines. */
export class NdjsonBuffer {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const lines = this.buffer.split("\n");
    this.buffer = lines.pop() ?? "";
    return lines.filter((line) => line.trim().length > 0);
  }

  flush(): string | null {
    const rest = this.buffer.trim();
    this.buffer = "";
    return rest.length ? rest : null;
  }
}

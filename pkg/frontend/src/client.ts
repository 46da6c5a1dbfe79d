/**
 * Session client: the virtual leader plus the live view of one session.
 *
 * All displayed state is server-authoritative: mode, forces, deflections,
 * and outcome always come from received frames, never from local echo. The
 * client only integrates the *commanded* pose (the virtual leader's hand
 * position), which the server echoes back through the actual TCP pose.
 */

import {
  ByeMsg,
  InboundMessage,
  MalformedMessage,
  NdjsonBuffer,
  SPEC_VERSION,
  StateFrame,
  StiffnessMode,
  Vec6,
  decodeLine,
  encodeLine,
} from "./protocol.js";

export type Axis = 0 | 1 | 2 | 3 | 4 | 5;
export const AXIS_NAMES = ["x", "y", "z", "roll", "pitch", "yaw"] as const;

/** Minimal transport surface so tests can inject fakes for WebSocket. */
export interface Transport {
  send(text: string): void;
  close(): void;
}

export type ConnectionState = "connecting" | "live" | "closed";

export interface SeriesPoint {
  t: number;
  v: number;
}

/** Fixed-capacity time series holding the last windowSeconds of samples. */
export class RollingSeries {
  readonly points: SeriesPoint[] = [];

  constructor(readonly windowSeconds = 30.0) {}

  push(t: number, v: number): void {
    const pts = this.points;
    if (pts.length && t < pts[pts.length - 1].t) return; // stale sample
    pts.push({ t, v });
    const cutoff = t - this.windowSeconds;
    let drop = 0;
    while (drop < pts.length && pts[drop].t < cutoff) drop++;
    if (drop > 0) pts.splice(0, drop);
  }

  latest(): SeriesPoint | null {
    return this.points.length ? this.points[this.points.length - 1] : null;
  }
}

export interface ClientEvents {
  onFrame?: (frame: StateFrame) => void;
  onBye?: (bye: ByeMsg) => void;
  onError?: (message: string) => void;
}

/** Default jog increments: 1 mm per tick translations, 1 deg rotations. */
export const JOG_STEP: Vec6 = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0];

export class SessionClient {
  readonly role: "leader" | "observer";
  connection: ConnectionState = "connecting";
  latest: StateFrame | null = null;
  byeReason: string | null = null;
  /** Lever the user selected; null until first frame arrives. */
  leverTarget: StiffnessMode | null = null;
  /** True while the lever awaits server confirmation ("switching..."). */
  switching = false;

  readonly forceSeries: RollingSeries[] = [];
  readonly deflectionSeries: RollingSeries[] = [];
  readonly modeChanges: { t: number; mode: StiffnessMode }[] = [];

  private seq = 0;
  private commandPose: Vec6 | null = null;
  private readonly buffer = new NdjsonBuffer();

  constructor(
    private readonly transport: Transport,
    role: "leader" | "observer" = "leader",
    private readonly events: ClientEvents = {},
    windowSeconds = 30.0,
  ) {
    this.role = role;
    for (let i = 0; i < 6; i++) {
      this.forceSeries.push(new RollingSeries(windowSeconds));
      this.deflectionSeries.push(new RollingSeries(windowSeconds));
    }
    this.transport.send(
      encodeLine({ type: "hello", spec_version: SPEC_VERSION, role }),
    );
  }

  /** Feed raw text from the socket (may contain several NDJSON lines). */
  ingest(chunk: string): void {
    for (const line of this.buffer.push(chunk + (chunk.endsWith("\n") ? "" : "\n"))) {
      let msg: InboundMessage;
      try {
        msg = decodeLine(line);
      } catch (err) {
        if (err instanceof MalformedMessage) {
          this.events.onError?.(err.message);
          continue;
        }
        throw err;
      }
      this.handle(msg);
    }
  }

  private handle(msg: InboundMessage): void {
    switch (msg.type) {
      case "hello":
        this.connection = "live";
        break;
      case "bye":
        this.byeReason = msg.reason;
        this.connection = "closed";
        this.events.onBye?.(msg);
        break;
      case "state": {
        const prevMode = this.latest?.mode;
        this.latest = msg;
        if (this.commandPose === null) this.commandPose = [...msg.pose] as Vec6;
        if (this.leverTarget === null) this.leverTarget = msg.mode;
        for (let i = 0; i < 6; i++) {
          this.forceSeries[i].push(msg.t, msg.wrench[i]);
          this.deflectionSeries[i].push(msg.t, msg.deflection[i]);
        }
        if (prevMode !== undefined && prevMode !== msg.mode) {
          this.modeChanges.push({ t: msg.t, mode: msg.mode });
        }
        if (this.switching && this.leverTarget !== null) {
          const target = this.leverTarget;
          const carrierGoal = target === "free" ? 0 : target === "half_lock" ? -1 : 1;
          if (msg.mode === target && msg.carrier_position === carrierGoal) {
            this.switching = false;
          }
        }
        this.events.onFrame?.(msg);
        break;
      }
      case "command":
      case "feedback":
        break; // not expected on this stream; ignore
    }
  }

  get commanding(): boolean {
    return (
      this.role === "leader" &&
      this.connection === "live" &&
      this.latest !== null &&
      !this.latest.estop &&
      this.latest.scenario.outcome === "running"
    );
  }

  get estopped(): boolean {
    return this.latest?.estop ?? false;
  }

  /** The pose the virtual leader is currently commanding. */
  get pose(): Vec6 | null {
    return this.commandPose ? ([...this.commandPose] as Vec6) : null;
  }

  private sendCommand(pose: Vec6, mode: StiffnessMode): void {
    this.seq += 1;
    this.transport.send(
      encodeLine({ type: "command", seq: this.seq, t: this.latest?.t ?? 0, pose, mode }),
    );
  }

  /**
   * Nudge one axis of the commanded pose. Commands only flow while this
   * client is the live commander and the session is running; during an
   * e-stop the controls lock and nothing is sent.
   */
  jog(axis: Axis, direction: 1 | -1, magnitude?: number): boolean {
    if (!this.commanding || this.commandPose === null || this.leverTarget === null) {
      return false;
    }
    const step = magnitude ?? JOG_STEP[axis];
    this.commandPose[axis] += direction * step;
    this.sendCommand([...this.commandPose] as Vec6, this.leverTarget);
    return true;
  }

  /**
   * Move the stiffness lever. Re-selecting the current confirmed target is
   * a no-op; otherwise a command carrying the new mode goes out and the UI
   * shows "switching..." until a frame confirms mode and carrier position.
   */
  lever(mode: StiffnessMode): boolean {
    if (!this.commanding || this.commandPose === null) return false;
    if (mode === this.leverTarget && !this.switching) return false;
    this.leverTarget = mode;
    this.switching = true;
    this.sendCommand([...this.commandPose] as Vec6, mode);
    return true;
  }

  close(): void {
    if (this.connection !== "closed") {
      try {
        this.transport.send(encodeLine({ type: "bye", reason: "client closed" }));
      } catch {
        // transport already gone
      }
      this.transport.close();
      this.connection = "closed";
    }
  }
}

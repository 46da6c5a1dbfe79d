/**
 * Page wiring: scenario launcher, live session view with the virtual
 * leader (keyboard/button jog plus the stiffness lever), strip charts, and
 * the episode replay viewer with the door-comparison preset.
 */

import { AXIS_NAMES, Axis, SessionClient } from "./client.js";
import { Draw2D, Marker, Series, renderStripChart } from "./charts.js";
import { MODES, StiffnessMode } from "./protocol.js";
import { Episode, EpisodeParseError, Scrubber, doorPreset, parseEpisodeCsv } from "./replay.js";
import { renderSchematic } from "./schematic.js";

const FORCE_COLORS = ["#e06c75", "#98c379", "#61afef"];
const TORQUE_COLORS = ["#d19a66", "#c678dd", "#56b6c2"];

interface SessionDescriptor {
  session_id: string;
  state: string;
  scenario_hash: string;
  created: string;
  scenario: { kind: string; gripper: string; estop: { force_threshold: number } };
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function ctx2d(canvas: HTMLCanvasElement): Draw2D {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  return ctx as unknown as Draw2D;
}

let client: SessionClient | null = null;
let socket: WebSocket | null = null;

async function refreshSessions(): Promise<void> {
  const res = await fetch("/api/sessions");
  const sessions = (await res.json()) as SessionDescriptor[];
  const list = el<HTMLUListElement>("session-list");
  list.innerHTML = "";
  for (const s of sessions) {
    const item = document.createElement("li");
    const label = document.createElement("span");
    label.textContent = `${s.session_id} · ${s.scenario.kind} · ${s.scenario.gripper} · ${s.state}`;
    const attach = document.createElement("button");
    attach.textContent = s.state === "terminal" ? "view replay" : "attach";
    attach.onclick = () => connect(s);
    item.append(label, attach);
    list.append(item);
  }
}

async function launchSession(): Promise<void> {
  const kind = el<HTMLSelectElement>("launch-kind").value;
  const gripper = el<HTMLSelectElement>("launch-gripper").value;
  const script = kind === "wall_touch" ? { type: "hold" } : undefined;
  const body: Record<string, unknown> = { kind, gripper };
  if (script) body.script = script;
  const res = await fetch("/api/sessions", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!res.ok) {
    const err = await res.json();
    setBanner(`launch failed: ${JSON.stringify(err.detail ?? err.error)}`, "error");
    return;
  }
  await refreshSessions();
}

function setBanner(text: string, kind: "info" | "error" | "estop" = "info"): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text;
  banner.className = `banner ${kind}`;
}

function connect(descriptor: SessionDescriptor): void {
  client?.close();
  socket?.close();
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(`${proto}://${location.host}/api/sessions/${descriptor.session_id}/stream`);
  socket = ws;
  const transport = {
    send: (text: string) => ws.send(text),
    close: () => ws.close(),
  };
  ws.onopen = () => {
    client = new SessionClient(transport, "leader", {
      onBye: (bye) => setBanner(`session closed: ${bye.reason}`, "error"),
      onError: (message) => setBanner(message, "error"),
    });
    el<HTMLSpanElement>("session-label").textContent =
      `${descriptor.session_id} (${descriptor.scenario.kind})`;
    setBanner(`attached to ${descriptor.session_id}`);
  };
  ws.onmessage = (event) => client?.ingest(String(event.data));
  ws.onclose = () => {
    if (client) client.connection = "closed";
  };
  forceThreshold = descriptor.scenario.estop?.force_threshold ?? 50;
}

let forceThreshold = 50;

function renderLive(): void {
  const frame = client?.latest ?? null;
  const status = el<HTMLDivElement>("status");
  if (client && frame) {
    const sc = frame.scenario;
    const extras =
      sc.insertion_depth !== undefined
        ? `depth ${sc.insertion_depth.toFixed(2)} mm`
        : `handle ${sc.handle_angle?.toFixed(1)} deg, latch ${sc.latch_released ? "released" : "held"}`;
    status.textContent =
      `t=${frame.t.toFixed(2)}s · mode ${frame.mode} · outcome ${sc.outcome} · ${extras}`;
    if (frame.estop) {
      setBanner("EMERGENCY STOP latched - controls locked", "estop");
    }
  } else {
    status.textContent = client ? "waiting for frames..." : "not attached";
  }

  for (const mode of MODES) {
    const button = el<HTMLButtonElement>(`lever-${mode}`);
    button.disabled = !client?.commanding;
    button.classList.toggle("active", frame?.mode === mode);
    button.classList.toggle(
      "pending",
      Boolean(client?.switching && client.leverTarget === mode),
    );
  }
  el<HTMLSpanElement>("lever-state").textContent = client?.switching
    ? "switching..."
    : frame
      ? `confirmed: ${frame.mode}`
      : "";

  if (client) {
    const markers: Marker[] = client.modeChanges.map((m) => ({ t: m.t, label: m.mode }));
    const forces: Series[] = [0, 1, 2].map((i) => ({
      label: AXIS_NAMES[i],
      color: FORCE_COLORS[i],
      points: client!.forceSeries[i].points,
    }));
    renderStripChart(ctx2d(el<HTMLCanvasElement>("chart-force")), forces, {
      width: 560,
      height: 170,
      thresholds: [
        { value: forceThreshold, label: `e-stop ${forceThreshold} N` },
        { value: -forceThreshold, label: "" },
      ],
      markers,
    });
    const torques: Series[] = [3, 4, 5].map((i) => ({
      label: AXIS_NAMES[i],
      color: TORQUE_COLORS[i - 3],
      points: client!.forceSeries[i].points,
    }));
    renderStripChart(ctx2d(el<HTMLCanvasElement>("chart-torque")), torques, {
      width: 560,
      height: 120,
      markers,
    });
    const deflections: Series[] = [0, 1, 2].map((i) => ({
      label: AXIS_NAMES[i],
      color: FORCE_COLORS[i],
      points: client!.deflectionSeries[i].points,
    }));
    renderStripChart(ctx2d(el<HTMLCanvasElement>("chart-deflection")), deflections, {
      width: 560,
      height: 120,
    });
  }
  renderSchematic(ctx2d(el<HTMLCanvasElement>("schematic")), frame, { width: 360, height: 220 });
  requestAnimationFrame(renderLive);
}

// --- replay viewer ---------------------------------------------------------

const loadedEpisodes: Episode[] = [];
let scrubber: Scrubber | null = null;

function describeEpisode(ep: Episode): string {
  return `${ep.gripper} · ${ep.rows.length} rows · ${ep.rows.at(-1)?.t.toFixed(2) ?? 0}s`;
}

function renderReplayChart(): void {
  if (!loadedEpisodes.length) return;
  const canvas = el<HTMLCanvasElement>("chart-replay");
  if (loadedEpisodes.length >= 3) {
    const preset = doorPreset(loadedEpisodes[0], loadedEpisodes[1], loadedEpisodes[2]);
    const markers: Marker[] = [];
    if (preset.switchT !== null) markers.push({ t: preset.switchT, label: "full->free" });
    if (preset.dropMarker) {
      markers.push({ t: preset.dropMarker.t, label: "force drop", color: "#ff6666" });
    }
    renderStripChart(
      ctx2d(canvas),
      preset.traces.map((tr, i) => ({
        label: tr.label,
        color: FORCE_COLORS[i % FORCE_COLORS.length],
        points: tr.points,
      })),
      { width: 560, height: 200, markers, timeWindow: 1e9 },
    );
    el<HTMLDivElement>("replay-info").textContent = preset.traces
      .map((t) => `${t.label}: ${t.outcome}`)
      .join("  ·  ");
  } else {
    const ep = loadedEpisodes[loadedEpisodes.length - 1];
    renderStripChart(
      ctx2d(canvas),
      [0, 1, 2].map((i) => ({
        label: AXIS_NAMES[i],
        color: FORCE_COLORS[i],
        points: ep.rows.map((r) => ({ t: r.t, v: r.wrench[i] })),
      })),
      { width: 560, height: 200, timeWindow: 1e9 },
    );
    el<HTMLDivElement>("replay-info").textContent = describeEpisode(ep);
  }
}

function onEpisodeFiles(files: FileList | null): void {
  if (!files) return;
  const readers = Array.from(files).map(
    (file) =>
      new Promise<Episode>((resolve, reject) => {
        const reader = new FileReader();
        reader.onload = () => {
          try {
            resolve(parseEpisodeCsv(String(reader.result)));
          } catch (err) {
            reject(err instanceof EpisodeParseError ? new Error(`${file.name}: ${err.message}`) : err);
          }
        };
        reader.onerror = () => reject(new Error(`cannot read ${file.name}`));
        reader.readAsText(file);
      }),
  );
  Promise.all(readers)
    .then((eps) => {
      loadedEpisodes.splice(0, loadedEpisodes.length, ...eps);
      scrubber = new Scrubber(eps[0]);
      const slider = el<HTMLInputElement>("scrub");
      slider.max = String(scrubber.duration);
      renderReplayChart();
    })
    .catch((err) => setBanner(String(err instanceof Error ? err.message : err), "error"));
}

function onScrub(): void {
  if (!scrubber) return;
  const t = Number(el<HTMLInputElement>("scrub").value);
  const row = scrubber.seek(t);
  if (row) {
    el<HTMLDivElement>("replay-info").textContent =
      `t=${row.t.toFixed(2)}s mode=${row.mode} |f|=(${row.wrench
        .slice(0, 3)
        .map((v) => v.toFixed(2))
        .join(", ")}) N ${row.event ? `event=${row.event}` : ""}`;
  }
}

// --- bootstrapping -----------------------------------------------------------

export function start(): void {
  el<HTMLButtonElement>("refresh").onclick = () => void refreshSessions();
  el<HTMLButtonElement>("launch").onclick = () => void launchSession();
  for (const mode of MODES) {
    el<HTMLButtonElement>(`lever-${mode}`).onclick = () => client?.lever(mode as StiffnessMode);
  }
  const jogButtons: [string, Axis, 1 | -1][] = [
    ["jog-x-plus", 0, 1], ["jog-x-minus", 0, -1],
    ["jog-y-plus", 1, 1], ["jog-y-minus", 1, -1],
    ["jog-z-plus", 2, 1], ["jog-z-minus", 2, -1],
    ["jog-yaw-plus", 5, 1], ["jog-yaw-minus", 5, -1],
  ];
  for (const [id, axis, dir] of jogButtons) {
    el<HTMLButtonElement>(id).onclick = () => client?.jog(axis, dir);
  }
  document.addEventListener("keydown", (ev) => {
    const map: Record<string, [Axis, 1 | -1]> = {
      ArrowRight: [0, 1], ArrowLeft: [0, -1],
      ArrowUp: [1, 1], ArrowDown: [1, -1],
      PageUp: [2, 1], PageDown: [2, -1],
      "]": [5, 1], "[": [5, -1],
    };
    const jog = map[ev.key];
    if (jog && client?.jog(jog[0], jog[1])) ev.preventDefault();
  });
  el<HTMLInputElement>("episode-files").onchange = (ev) =>
    onEpisodeFiles((ev.target as HTMLInputElement).files);
  el<HTMLInputElement>("scrub").oninput = () => onScrub();
  void refreshSessions();
  requestAnimationFrame(renderLive);
}

if (typeof document !== "undefined" && document.getElementById("session-list")) {
  start();
}

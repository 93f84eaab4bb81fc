// Pure view-model logic. Every number shown in the UI is derived here from
// API payloads; nothing in this module touches the DOM or does planning.

import type {
  NetworkDoc,
  RouteDoc,
  StatusEvent,
  TelemetryFrame,
} from "./types.js";

export type PanelPhase =
  | "connecting"
  | "live"
  | "reconnecting"
  | "delivered"
  | "failed";

export interface PanelState {
  deliveryId: string;
  src: string;
  dst: string;
  phase: PanelPhase;
  reason?: string;
  latest?: TelemetryFrame;
  framesSeen: number;
}

export function initialPanel(
  deliveryId: string,
  src: string,
  dst: string,
): PanelState {
  return { deliveryId, src, dst, phase: "connecting", framesSeen: 0 };
}

const TERMINAL: PanelPhase[] = ["delivered", "failed"];

export function isTerminal(state: PanelState): boolean {
  return TERMINAL.includes(state.phase);
}

/** Fold one telemetry frame in; stale or out-of-order frames are ignored. */
export function applyFrame(state: PanelState, frame: TelemetryFrame): PanelState {
  if (isTerminal(state)) return state;
  if (state.latest && frame.clock <= state.latest.clock) return state;
  return {
    ...state,
    phase: "live",
    latest: frame,
    framesSeen: state.framesSeen + 1,
  };
}

export function applyStatus(state: PanelState, status: StatusEvent): PanelState {
  if (status.status === "delivered") {
    return { ...state, phase: "delivered" };
  }
  if (status.status === "failed") {
    return { ...state, phase: "failed", reason: status.reason ?? "failed" };
  }
  return state;
}

/** Stream dropped: show reconnecting unless the mission already ended. */
export function applyDisconnect(state: PanelState): PanelState {
  if (isTerminal(state)) return state;
  return { ...state, phase: "reconnecting" };
}

export function batteryPercent(fraction: number): number {
  const clamped = Math.min(1, Math.max(0, fraction));
  return Math.round(clamped * 1000) / 10;
}

export function formatClock(seconds: number): string {
  return `${seconds.toFixed(1)} s`;
}

export function phaseLabel(state: PanelState): string {
  if (state.phase === "delivered") return "Delivered";
  if (state.phase === "failed") return `Failed: ${state.reason ?? "unknown"}`;
  if (state.phase === "reconnecting") return "reconnecting…";
  if (!state.latest) return "waiting for telemetry…";
  const raw = state.latest.phase;
  return raw.charAt(0).toUpperCase() + raw.slice(1);
}

export interface DispatchCheck {
  ok: boolean;
  reason?: string;
}

export function canDispatch(src: string, dst: string): DispatchCheck {
  if (!src || !dst) return { ok: false, reason: "pick both endpoints" };
  if (src === dst) return { ok: false, reason: "source and destination must differ" };
  return { ok: true };
}

/** Nodes a route touches, in flight order (recharge stops do not repeat). */
export function routeNodeSequence(route: RouteDoc): string[] {
  const seq = [route.src];
  for (const leg of route.legs) {
    if (leg.kind === "fly") seq.push(leg.to);
  }
  return seq;
}

/** Consecutive node pairs of the route; each must be a network edge. */
export function routeSegments(route: RouteDoc): Array<[string, string]> {
  const seq = routeNodeSequence(route);
  const out: Array<[string, string]> = [];
  for (let i = 0; i + 1 < seq.length; i++) {
    out.push([seq[i], seq[i + 1]]);
  }
  return out;
}

export function isNetworkEdge(doc: NetworkDoc, u: string, v: string): boolean {
  return doc.edges.some(
    (e) => (e.from === u && e.to === v) || (e.from === v && e.to === u),
  );
}

/** True when every rendered route segment exists in the network. */
export function routeFollowsNetwork(doc: NetworkDoc, route: RouteDoc): boolean {
  return routeSegments(route).every(([u, v]) => isNetworkEdge(doc, u, v));
}

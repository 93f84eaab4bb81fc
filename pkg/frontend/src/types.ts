// Wire types mirroring the dispatch service's JSON documents.

export interface NetworkNode {
  id: string;
  position: [number, number, number];
  is_recharge: boolean;
}

export interface NetworkEdge {
  from: string;
  to: string;
  length3d: number;
}

export interface NetworkZone {
  id: string;
  region: [number, number][];
}

export interface NetworkDoc {
  nodes: NetworkNode[];
  edges: NetworkEdge[];
  zones: NetworkZone[];
  params: { corridor_width: number; clearance: number };
}

export interface FlyLegDoc {
  kind: "fly";
  from: string;
  to: string;
  duration_s: number;
  energy_wh: number;
}

export interface RechargeLegDoc {
  kind: "recharge";
  at: string;
  duration_s: number;
  energy_wh: number;
}

export type RouteLegDoc = FlyLegDoc | RechargeLegDoc;

export interface RouteDoc {
  src: string;
  dst: string;
  legs: RouteLegDoc[];
  total_time_s: number;
  battery_trace_wh: number[];
  initial_battery_wh: number;
}

export interface TelemetryFrame {
  clock: number;
  position: [number, number, number];
  heading: number;
  battery: number;
  battery_fraction: number;
  phase: string;
  current_leg: number;
}

export interface DeliveryRecord {
  id: string;
  request: { src: string; dst: string; initial_battery_fraction: number };
  route: RouteDoc | null;
  status: "planned" | "flying" | "delivered" | "failed";
  reason: string | null;
  created_at: string;
}

export interface StatusEvent {
  status: string;
  reason?: string;
}

// Wire types mirroring the control service payloads. Field names match the
// JSON exactly; do not rename without changing the server.

export interface Pose {
  x: number;
  y: number;
  theta: number;
}

export interface VelPair {
  v: number;
  w: number;
}

export interface RobotFrame {
  id: string;
  pose: Pose;
  auto: VelPair;
  fused: VelPair;
  wheels: { l: number; r: number };
}

export interface Alert {
  tick: number;
  robot_a: string;
  robot_b: string;
  distance_m: number;
  threshold_m: number;
}

export interface DissonanceSample {
  robot_id: string;
  tick: number;
  intensity: number;
  dissonance: number;
  station_m: number;
}

export interface TaskState {
  availability: string;
  occupancy: string;
}

export interface SimFrame {
  tick: number;
  t_s: number;
  phase: string;
  task_state: TaskState;
  robots: RobotFrame[];
  alerts: Alert[];
  dissonance: DissonanceSample[];
  commands: unknown[];
}

export interface StatePayload {
  paused: boolean;
  seq: number;
  server_ts: number;
  frame: SimFrame;
}

export type Cell = [number, number];

export interface HyperEdge {
  id: number;
  members: number[];
  attribute: { type: string; [k: string]: unknown };
}

export interface ScenarioDoc {
  map: {
    width: number;
    height: number;
    cell_size: number;
    obstacles: Cell[];
    terrain: { cell: Cell; multiplier: number }[];
  };
  hypergraph: {
    vertices: { id: number; cell: Cell }[];
    edges: HyperEdge[];
    initial_state: TaskState;
  };
  robots: { id: string; start: Cell; goal: Cell; cruise_speed: number }[];
  workspace_cells: Cell[];
  pathway_cells: Cell[];
  dwell_s: number;
  dt_s: number;
  drive: { wheel_radius: number; axle_length: number; v_max: number; w_max: number };
  thresholds: { proximity_m: number; dv_per_event: number; dw_per_event: number };
}

export type OperatorCommand =
  | { kind: "velocity_increment"; robot_id: string; dv: number; dw: number }
  | { kind: "pause" }
  | { kind: "resume" }
  | { kind: "semantic_feedback"; text: string; anchor_cells: Cell[] }
  | { kind: "set_threshold"; meters: number }
  | { kind: "set_task_state"; availability?: string; occupancy?: string };

export interface Ack {
  accepted: boolean;
  received_tick?: number;
  note?: string;
  reason?: string;
}

export type Connection = "Connecting" | "Live" | "Dropped";

export interface InputScaling {
  dv_per_press: number;
  dw_per_press: number;
}

export interface UiState {
  latest: SimFrame | null;
  selected_cells: Cell[];
  input_scaling: InputScaling;
  connection: Connection;
}

function isNum(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isPose(x: unknown): x is Pose {
  const p = x as Pose;
  return !!p && isNum(p.x) && isNum(p.y) && isNum(p.theta);
}

function isVel(x: unknown): x is VelPair {
  const v = x as VelPair;
  return !!v && isNum(v.v) && isNum(v.w);
}

function isRobot(x: unknown): x is RobotFrame {
  const r = x as RobotFrame;
  return (
    !!r &&
    typeof r.id === "string" &&
    isPose(r.pose) &&
    isVel(r.auto) &&
    isVel(r.fused)
  );
}

/**
 * Validate a raw message against the frame schema. Returns null on any
 * mismatch; the caller keeps the previous scene and shows the error banner.
 */
export function asFrame(raw: unknown): SimFrame | null {
  const f = raw as SimFrame;
  if (!f || typeof f !== "object") return null;
  if (!Number.isInteger(f.tick) || !isNum(f.t_s)) return null;
  if (typeof f.phase !== "string") return null;
  const ts = f.task_state;
  if (!ts || typeof ts.availability !== "string" || typeof ts.occupancy !== "string")
    return null;
  if (!Array.isArray(f.robots) || !f.robots.every(isRobot)) return null;
  if (!Array.isArray(f.alerts) || !Array.isArray(f.dissonance)) return null;
  return f;
}

export function asStatePayload(raw: unknown): StatePayload | null {
  const p = raw as StatePayload;
  if (!p || typeof p !== "object") return null;
  if (typeof p.paused !== "boolean" || !Number.isInteger(p.seq)) return null;
  const frame = asFrame(p.frame);
  return frame ? { ...p, frame } : null;
}

import type { Alert, Cell, ScenarioDoc, SimFrame } from "./types.js";
import type { View } from "./view.js";
import { cellOrigin, terrainTints, worldToPx } from "./view.js";

/**
 * Structural subset of CanvasRenderingContext2D the renderer touches. Tests
 * substitute a recording stub; the browser passes the real context.
 */
export interface Draw2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

const ROBOT_COLORS = ["#2f6fde", "#d2622a", "#3e9c5c", "#a24bb5"];

export function robotColor(index: number): string {
  return ROBOT_COLORS[index % ROBOT_COLORS.length];
}

// Terrain tint: deeper orange for costlier ground. Multiplier 1 is neutral.
function tintFor(multiplier: number): string {
  const t = Math.max(0, Math.min(1, (multiplier - 1.0) / 1.5));
  const alpha = 0.15 + 0.55 * t;
  return `rgba(214, 120, 28, ${alpha.toFixed(3)})`;
}

export interface SceneExtras {
  /** Recent poses per robot, oldest first; drawn as the realized route. */
  trails: Map<string, [number, number][]>;
  selected: Cell[];
}

export function renderScene(
  ctx: Draw2D,
  view: View,
  doc: ScenarioDoc,
  frame: SimFrame,
  extras: SceneExtras,
): void {
  const px = view.cellPx;
  ctx.clearRect(0, 0, view.cols * px, view.rows * px);
  ctx.globalAlpha = 1;

  ctx.fillStyle = "#f4f2ec";
  ctx.fillRect(0, 0, view.cols * px, view.rows * px);

  const tints = terrainTints(doc);
  for (const [key, mult] of tints) {
    const [c, r] = key.split(",").map(Number);
    const [x, y] = cellOrigin(view, c, r);
    ctx.fillStyle = tintFor(mult);
    ctx.fillRect(x, y, px, px);
  }

  ctx.fillStyle = "rgba(90, 140, 190, 0.25)";
  for (const cell of doc.pathway_cells) {
    const [x, y] = cellOrigin(view, cell[0], cell[1]);
    ctx.fillRect(x, y, px, px);
  }
  ctx.fillStyle = "rgba(120, 190, 120, 0.3)";
  for (const cell of doc.workspace_cells) {
    const [x, y] = cellOrigin(view, cell[0], cell[1]);
    ctx.fillRect(x, y, px, px);
  }

  ctx.fillStyle = "#3a3a3a";
  for (const cell of doc.map.obstacles) {
    const [x, y] = cellOrigin(view, cell[0], cell[1]);
    ctx.fillRect(x, y, px, px);
  }

  ctx.strokeStyle = "#d8d4ca";
  ctx.lineWidth = 1;
  for (let c = 0; c <= view.cols; c++) {
    line(ctx, c * px, 0, c * px, view.rows * px);
  }
  for (let r = 0; r <= view.rows; r++) {
    line(ctx, 0, r * px, view.cols * px, r * px);
  }

  ctx.strokeStyle = "#caa52c";
  ctx.lineWidth = 2;
  for (const cell of extras.selected) {
    const [x, y] = cellOrigin(view, cell[0], cell[1]);
    ctx.strokeRect(x + 1, y + 1, px - 2, px - 2);
  }

  const cs = doc.map.cell_size;
  doc.robots.forEach((meta, i) => {
    const color = robotColor(i);
    // Route overlay: goal flag plus the trail actually driven so far.
    const [gx, gy] = cellOrigin(view, meta.goal[0], meta.goal[1]);
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.strokeRect(gx + px * 0.3, gy + px * 0.3, px * 0.4, px * 0.4);

    const trail = extras.trails.get(meta.id) ?? [];
    if (trail.length > 1) {
      ctx.strokeStyle = color;
      ctx.globalAlpha = 0.45;
      ctx.beginPath();
      trail.forEach(([wx, wy], j) => {
        const [tx, ty] = worldToPx(view, cs, wx, wy);
        if (j === 0) ctx.moveTo(tx, ty);
        else ctx.lineTo(tx, ty);
      });
      ctx.stroke();
      ctx.globalAlpha = 1;
    }
  });

  for (const robot of frame.robots) {
    const idx = doc.robots.findIndex((r) => r.id === robot.id);
    const color = robotColor(idx < 0 ? 0 : idx);
    const [x, y] = worldToPx(view, cs, robot.pose.x, robot.pose.y);
    const rad = px * 0.32;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(x, y, rad, 0, Math.PI * 2);
    ctx.fill();
    // Heading spike; canvas y is flipped so theta's sign inverts.
    ctx.strokeStyle = "#1c1c1c";
    ctx.lineWidth = 2;
    line(
      ctx,
      x,
      y,
      x + Math.cos(robot.pose.theta) * rad * 1.7,
      y - Math.sin(robot.pose.theta) * rad * 1.7,
    );
    ctx.fillStyle = "#1c1c1c";
    ctx.font = `${Math.max(10, px * 0.3)}px sans-serif`;
    ctx.fillText(robot.id, x + rad, y - rad);
  }
}

function line(ctx: Draw2D, x0: number, y0: number, x1: number, y1: number): void {
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
}

export function alertText(alerts: Alert[]): string {
  return alerts
    .map(
      (a) =>
        `${a.robot_a}/${a.robot_b} at ${a.distance_m.toFixed(2)} m ` +
        `(threshold ${a.threshold_m.toFixed(2)} m)`,
    )
    .join("; ");
}

export const STRIP_CAPACITY = 240;

export interface StripHistory {
  order: string[];
  series: Map<string, number[]>;
}

export function newStrip(): StripHistory {
  return { order: [], series: new Map() };
}

export function pushStrip(strip: StripHistory, frame: SimFrame): void {
  for (const d of frame.dissonance) {
    let buf = strip.series.get(d.robot_id);
    if (!buf) {
      buf = [];
      strip.series.set(d.robot_id, buf);
      strip.order.push(d.robot_id);
    }
    buf.push(d.dissonance);
    if (buf.length > STRIP_CAPACITY) buf.shift();
  }
}

export function renderStrip(
  ctx: Draw2D,
  strip: StripHistory,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#161a1e";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "#3c444c";
  ctx.lineWidth = 1;
  line(ctx, 0, height - 1, width, height - 1);
  strip.order.forEach((rid, i) => {
    const buf = strip.series.get(rid);
    if (!buf || buf.length < 2) return;
    ctx.strokeStyle = robotColor(i);
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    buf.forEach((value, j) => {
      const x = (j / (STRIP_CAPACITY - 1)) * width;
      const y = height - 2 - Math.min(1, Math.max(0, value)) * (height - 6);
      if (j === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  });
}

export interface FieldArtifact {
  time_bins: number;
  station_bins: number;
  values: number[];
}

/** Full dissonance contour fetched on demand; values are row-major with time
    as the outer index. */
export function renderContour(
  ctx: Draw2D,
  field: FieldArtifact,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const { time_bins: tb, station_bins: sb, values } = field;
  if (tb === 0 || sb === 0) return;
  let peak = 0;
  for (const v of values) peak = Math.max(peak, v);
  const cw = width / sb;
  const ch = height / tb;
  for (let t = 0; t < tb; t++) {
    for (let s = 0; s < sb; s++) {
      const v = values[t * sb + s];
      const level = peak > 0 ? v / peak : 0;
      ctx.fillStyle = heat(level);
      // Latest time bin at the top.
      ctx.fillRect(s * cw, (tb - 1 - t) * ch, cw + 0.5, ch + 0.5);
    }
  }
}

function heat(level: number): string {
  const l = Math.min(1, Math.max(0, level));
  const r = Math.round(20 + 235 * l);
  const g = Math.round(16 + 60 * l);
  const b = Math.round(46 + 30 * (1 - l));
  return `rgb(${r}, ${g}, ${b})`;
}

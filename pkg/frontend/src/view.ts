import type { Cell, ScenarioDoc } from "./types.js";

/** Pixel geometry for the map canvas. Row 0 renders at the bottom so canvas
    coordinates and world coordinates share an orientation. */
export interface View {
  cellPx: number;
  cols: number;
  rows: number;
}

export function fitView(doc: ScenarioDoc, maxWidthPx: number, maxHeightPx: number): View {
  const cols = doc.map.width;
  const rows = doc.map.height;
  const cellPx = Math.max(
    8,
    Math.floor(Math.min(maxWidthPx / cols, maxHeightPx / rows)),
  );
  return { cellPx, cols, rows };
}

export function cellOrigin(view: View, col: number, row: number): [number, number] {
  return [col * view.cellPx, (view.rows - 1 - row) * view.cellPx];
}

/** World meters to canvas pixels. */
export function worldToPx(view: View, cellSize: number, x: number, y: number): [number, number] {
  return [(x / cellSize) * view.cellPx, (view.rows - y / cellSize) * view.cellPx];
}

export function cellAtPoint(view: View, px: number, py: number): Cell | null {
  const col = Math.floor(px / view.cellPx);
  const row = view.rows - 1 - Math.floor(py / view.cellPx);
  if (col < 0 || col >= view.cols || row < 0 || row >= view.rows) return null;
  return [col, row];
}

/** Cells covered by a click-drag rectangle given in canvas pixels. Order is
    row-major from the lower-left corner, duplicates impossible. */
export function rectCells(view: View, x0: number, y0: number, x1: number, y1: number): Cell[] {
  const a = clampCell(view, x0, y0);
  const b = clampCell(view, x1, y1);
  const cells: Cell[] = [];
  for (let row = Math.min(a[1], b[1]); row <= Math.max(a[1], b[1]); row++) {
    for (let col = Math.min(a[0], b[0]); col <= Math.max(a[0], b[0]); col++) {
      cells.push([col, row]);
    }
  }
  return cells;
}

function clampCell(view: View, px: number, py: number): Cell {
  const col = Math.min(view.cols - 1, Math.max(0, Math.floor(px / view.cellPx)));
  const row = Math.min(
    view.rows - 1,
    Math.max(0, view.rows - 1 - Math.floor(py / view.cellPx)),
  );
  return [col, row];
}

/** Terrain multiplier per cell, folded from map terrain and hypergraph terrain
    edges. Feedback-created edges show up here after a scenario re-fetch. */
export function terrainTints(doc: ScenarioDoc): Map<string, number> {
  const tints = new Map<string, number>();
  for (const t of doc.map.terrain) {
    tints.set(keyOf(t.cell), t.multiplier);
  }
  const cellOfVertex = new Map<number, Cell>();
  for (const v of doc.hypergraph.vertices) cellOfVertex.set(v.id, v.cell);
  for (const e of doc.hypergraph.edges) {
    if (e.attribute.type !== "terrain") continue;
    const m = typeof e.attribute.multiplier === "number" ? e.attribute.multiplier : 1.0;
    for (const vid of e.members) {
      const cell = cellOfVertex.get(vid);
      if (cell) tints.set(keyOf(cell), m);
    }
  }
  return tints;
}

export function keyOf(cell: Cell): string {
  return `${cell[0]},${cell[1]}`;
}

export type FeedbackCheck =
  | { ok: true; text: string; anchor_cells: Cell[] }
  | { ok: false; error: string };

/** Local validation before any network call. Empty text never leaves the
    client; zero cells is fine (the note lands in the episodic archive). */
export function checkFeedback(text: string, cells: Cell[]): FeedbackCheck {
  const trimmed = text.trim();
  if (!trimmed) return { ok: false, error: "feedback text is required" };
  return { ok: true, text: trimmed, anchor_cells: cells };
}

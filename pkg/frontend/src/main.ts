import { handleKey, makeThrottle } from "./input.js";
import { makeNet, openStream } from "./net.js";
import type { Stream } from "./net.js";
import {
  alertText,
  newStrip,
  pushStrip,
  renderContour,
  renderScene,
  renderStrip,
} from "./render.js";
import type { Draw2D, FieldArtifact } from "./render.js";
import type { Cell, ScenarioDoc, SimFrame, UiState } from "./types.js";
import { cellAtPoint, checkFeedback, fitView, rectCells } from "./view.js";
import type { View } from "./view.js";

const TRAIL_CAP = 600;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const base = location.origin;
  const net = makeNet(base);

  // Simulation truth lives on the server: a fresh page rebuilds everything
  // from these two fetches, nothing is cached locally.
  let doc: ScenarioDoc = await net.getScenario();
  const first = await net.getState();

  const ui: UiState = {
    latest: first.frame,
    selected_cells: [],
    input_scaling: {
      dv_per_press: doc.thresholds.dv_per_event / 2,
      dw_per_press: doc.thresholds.dw_per_event / 2,
    },
    connection: "Connecting",
  };

  const canvas = el<HTMLCanvasElement>("map");
  const stripCanvas = el<HTMLCanvasElement>("strip");
  const contourCanvas = el<HTMLCanvasElement>("contour");
  const banner = el<HTMLDivElement>("banner");
  const errorBanner = el<HTMLDivElement>("error-banner");
  const phaseEl = el<HTMLSpanElement>("phase");
  const connEl = el<HTMLSpanElement>("conn");
  const taskEl = el<HTMLSpanElement>("task-state");
  const toastEl = el<HTMLDivElement>("toast");
  const robotSel = el<HTMLSelectElement>("robot");
  const feedbackText = el<HTMLTextAreaElement>("feedback-text");
  const feedbackNote = el<HTMLDivElement>("feedback-note");

  let view: View = fitView(doc, 720, 440);
  canvas.width = view.cols * view.cellPx;
  canvas.height = view.rows * view.cellPx;

  for (const r of doc.robots) {
    const opt = document.createElement("option");
    opt.value = r.id;
    opt.textContent = r.id;
    robotSel.appendChild(opt);
  }

  const trails = new Map<string, [number, number][]>();
  const strip = newStrip();
  let lastBad = 0;
  let toastTimer: number | undefined;

  const toast = (msg: string) => {
    toastEl.textContent = msg;
    toastEl.style.display = "block";
    if (toastTimer !== undefined) clearTimeout(toastTimer);
    toastTimer = window.setTimeout(() => (toastEl.style.display = "none"), 2500);
  };

  const absorb = (frame: SimFrame) => {
    ui.latest = frame;
    for (const r of frame.robots) {
      let t = trails.get(r.id);
      if (!t) {
        t = [];
        trails.set(r.id, t);
      }
      t.push([r.pose.x, r.pose.y]);
      if (t.length > TRAIL_CAP) t.shift();
    }
    pushStrip(strip, frame);
  };
  absorb(first.frame);

  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  const stream: Stream = openStream(`${proto}//${location.host}/stream`, () => {
    ui.connection = stream.status();
  });

  const ctx = canvas.getContext("2d") as unknown as Draw2D;
  const stripCtx = stripCanvas.getContext("2d") as unknown as Draw2D;

  let dragStart: [number, number] | null = null;

  const paint = () => {
    const payload = stream.take(); // latest-wins per animation tick
    if (payload) absorb(payload.frame);
    if (stream.badFrames() > lastBad) {
      lastBad = stream.badFrames();
      errorBanner.textContent = "malformed frame received; showing last good state";
      errorBanner.style.display = "block";
    }
    const frame = ui.latest;
    if (frame) {
      renderScene(ctx, view, doc, frame, { trails, selected: ui.selected_cells });
      renderStrip(stripCtx, strip, stripCanvas.width, stripCanvas.height);
      phaseEl.textContent = frame.phase;
      taskEl.textContent = `${frame.task_state.availability} / ${frame.task_state.occupancy}`;
      if (frame.alerts.length > 0) {
        banner.textContent = `proximity: ${alertText(frame.alerts)}`;
        banner.style.display = "block";
      } else {
        banner.style.display = "none";
      }
    }
    connEl.textContent = ui.connection;
    connEl.className = ui.connection.toLowerCase();
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);

  const throttle = makeThrottle(doc.dt_s * 1000);
  window.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLTextAreaElement || ev.target instanceof HTMLInputElement)
      return;
    const outcome = handleKey(
      ev.key,
      ev.repeat,
      performance.now(),
      ui.connection,
      robotSel.value,
      ui.input_scaling,
      throttle,
    );
    if (outcome.action === "ignore") return;
    ev.preventDefault();
    if (outcome.action === "drop") {
      toast(outcome.notice);
      return;
    }
    void net.postCommand(outcome.command).then((ack) => {
      if (!ack.accepted) toast(`rejected: ${ack.reason ?? "unknown"}`);
      else if (ack.note?.includes("clamped")) toast("increment clamped to the per-event limit");
    });
  });

  canvas.addEventListener("mousedown", (ev) => {
    dragStart = [ev.offsetX, ev.offsetY];
  });
  canvas.addEventListener("mouseup", (ev) => {
    if (!dragStart) return;
    const [x0, y0] = dragStart;
    dragStart = null;
    const moved = Math.abs(ev.offsetX - x0) > 3 || Math.abs(ev.offsetY - y0) > 3;
    if (moved) {
      ui.selected_cells = rectCells(view, x0, y0, ev.offsetX, ev.offsetY);
    } else {
      const cell = cellAtPoint(view, ev.offsetX, ev.offsetY);
      ui.selected_cells = cell ? toggleCell(ui.selected_cells, cell) : [];
    }
  });

  el<HTMLButtonElement>("clear-cells").addEventListener("click", () => {
    ui.selected_cells = [];
  });

  el<HTMLButtonElement>("send-feedback").addEventListener("click", () => {
    const checked = checkFeedback(feedbackText.value, ui.selected_cells);
    if (!checked.ok) {
      feedbackNote.textContent = checked.error;
      return;
    }
    feedbackNote.textContent = "";
    void net
      .postCommand({
        kind: "semantic_feedback",
        text: checked.text,
        anchor_cells: checked.anchor_cells,
      })
      .then(async (ack) => {
        if (!ack.accepted) {
          feedbackNote.textContent = ack.reason ?? "rejected";
          return;
        }
        feedbackText.value = "";
        ui.selected_cells = [];
        doc = await net.getScenario(); // pick up the new hyperedge tint
        view = fitView(doc, 720, 440);
        toast("feedback applied");
      });
  });

  el<HTMLButtonElement>("pause").addEventListener("click", () => {
    void net.postCommand({ kind: "pause" });
  });
  el<HTMLButtonElement>("resume").addEventListener("click", () => {
    void net.postCommand({ kind: "resume" });
  });

  el<HTMLButtonElement>("fetch-contour").addEventListener("click", () => {
    void fetch(net.artifactUrl("dissonance"))
      .then(async (res) => {
        if (!res.ok) throw new Error(await res.text());
        const field = (await res.json()) as FieldArtifact;
        const cctx = contourCanvas.getContext("2d") as unknown as Draw2D;
        renderContour(cctx, field, contourCanvas.width, contourCanvas.height);
        contourCanvas.style.display = "block";
      })
      .catch((err) => toast(`contour unavailable: ${err}`));
  });
}

function toggleCell(cells: Cell[], cell: Cell): Cell[] {
  const rest = cells.filter((c) => c[0] !== cell[0] || c[1] !== cell[1]);
  return rest.length === cells.length ? [...cells, cell] : rest;
}

boot().catch((err) => {
  const banner = document.getElementById("error-banner");
  if (banner) {
    banner.textContent = `failed to reach the control service: ${err}`;
    banner.style.display = "block";
  }
});

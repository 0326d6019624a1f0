import type { Ack, Connection, OperatorCommand, ScenarioDoc, StatePayload } from "./types.js";
import { asStatePayload } from "./types.js";

export interface Net {
  getState(): Promise<StatePayload>;
  getScenario(): Promise<ScenarioDoc>;
  postCommand(cmd: OperatorCommand): Promise<Ack>;
  artifactUrl(name: string): string;
}

export function makeNet(base: string, fetchFn: typeof fetch = fetch): Net {
  const get = async (path: string) => {
    const res = await fetchFn(base + path);
    if (!res.ok) throw new Error(`GET ${path}: ${res.status}`);
    return res.json();
  };
  return {
    getState: () => get("/state"),
    getScenario: () => get("/scenario"),
    // Rejections come back as 400 with a reason field; surface them as a
    // normal Ack so callers show the text instead of throwing.
    postCommand: async (cmd) => {
      const res = await fetchFn(base + "/command", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(cmd),
      });
      return (await res.json()) as Ack;
    },
    artifactUrl: (name) => `${base}/artifact/${name}`,
  };
}

type WsCtor = new (url: string) => {
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  close(): void;
};

export interface Stream {
  /** Latest payload since the previous take(), or null. Latest-wins: a slow
      consumer sees only the newest frame, never a backlog. */
  take(): StatePayload | null;
  status(): Connection;
  /** Count of messages that failed schema validation (drives the error banner). */
  badFrames(): number;
  close(): void;
}

export function openStream(
  wsUrl: string,
  onChange: () => void,
  Ctor?: WsCtor,
): Stream {
  const WS = Ctor ?? (globalThis as { WebSocket?: WsCtor }).WebSocket;
  if (!WS) throw new Error("no WebSocket implementation available");
  let pending: StatePayload | null = null;
  let conn: Connection = "Connecting";
  let bad = 0;
  const ws = new WS(wsUrl);
  ws.onopen = () => {
    conn = "Live";
    onChange();
  };
  ws.onclose = () => {
    conn = "Dropped";
    onChange();
  };
  ws.onerror = () => {
    conn = "Dropped";
    onChange();
  };
  ws.onmessage = (ev) => {
    let raw: unknown;
    try {
      raw = JSON.parse(String(ev.data));
    } catch {
      bad += 1;
      onChange();
      return;
    }
    const payload = asStatePayload(raw);
    if (!payload) {
      bad += 1;
    } else {
      pending = payload;
    }
    onChange();
  };
  return {
    take: () => {
      const p = pending;
      pending = null;
      return p;
    },
    status: () => conn,
    badFrames: () => bad,
    close: () => ws.close(),
  };
}

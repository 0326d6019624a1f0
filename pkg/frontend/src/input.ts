import type { Connection, InputScaling, OperatorCommand } from "./types.js";

// Sign convention: Up/W nudges forward, Left/A steers counter-clockwise.
const KEY_MAP: Record<string, [number, number]> = {
  arrowup: [1, 0],
  w: [1, 0],
  arrowdown: [-1, 0],
  s: [-1, 0],
  arrowleft: [0, 1],
  a: [0, 1],
  arrowright: [0, -1],
  d: [0, -1],
};

export function incrementFor(
  key: string,
  robotId: string,
  scaling: InputScaling,
): OperatorCommand | null {
  const dir = KEY_MAP[key.toLowerCase()];
  if (!dir) return null;
  return {
    kind: "velocity_increment",
    robot_id: robotId,
    dv: dir[0] * scaling.dv_per_press,
    dw: dir[1] * scaling.dw_per_press,
  };
}

export interface Throttle {
  /** One command per keydown; OS auto-repeat is capped at the tick rate so a
      held key can never outrun the simulation. */
  allow(key: string, repeat: boolean, nowMs: number): boolean;
}

export function makeThrottle(tickMs: number): Throttle {
  const lastSent = new Map<string, number>();
  return {
    allow(key, repeat, nowMs) {
      const prev = lastSent.get(key);
      if (repeat && prev !== undefined && nowMs - prev < tickMs) return false;
      lastSent.set(key, nowMs);
      return true;
    },
  };
}

export type KeyOutcome =
  | { action: "send"; command: OperatorCommand }
  | { action: "drop"; notice: string }
  | { action: "ignore" };

export function handleKey(
  key: string,
  repeat: boolean,
  nowMs: number,
  connection: Connection,
  robotId: string,
  scaling: InputScaling,
  throttle: Throttle,
): KeyOutcome {
  const command = incrementFor(key, robotId, scaling);
  if (!command) return { action: "ignore" };
  if (connection !== "Live") {
    return { action: "drop", notice: "connection lost; increment not sent" };
  }
  if (!throttle.allow(key.toLowerCase(), repeat, nowMs)) return { action: "ignore" };
  return { action: "send", command };
}

/** Wire protocol shared with the session server.
 *
 * Every frame is a versioned JSON envelope; the server answers commands
 * with `ack`/`error` frames and broadcasts `snapshot`/`state` frames on
 * its event stream. This module is DOM-free.
 */

export const PROTOCOL_VERSION = 1;

export type CommandType =
  | "set_lambda"
  | "set_mode"
  | "nl_command"
  | "wrench"
  | "grasp"
  | "release"
  | "assert_triple"
  | "inject_latency";

export type EnvelopeType =
  | CommandType
  | "hello"
  | "join"
  | "ack"
  | "error"
  | "state"
  | "snapshot";

const ENVELOPE_TYPES: ReadonlySet<string> = new Set([
  "set_lambda",
  "set_mode",
  "nl_command",
  "wrench",
  "grasp",
  "release",
  "assert_triple",
  "inject_latency",
  "hello",
  "join",
  "ack",
  "error",
  "state",
  "snapshot",
]);

export interface Envelope {
  v: number;
  type: EnvelopeType;
  seq: number;
  sid: string;
  t: number;
  payload: Record<string, unknown>;
}

export type ArbitrationMode = "autonomy" | "blended" | "manual";
export type ArbitrationSource = "shared_control" | "shared_autonomy";

export interface WorldObject {
  id: string;
  position: number[];
  radius: number;
  mass: number;
  grasped: boolean;
}

/** Full per-tick state as broadcast by the server. */
export interface Snapshot {
  tick: number;
  time: number;
  world: {
    q: number[];
    q_dot: number[];
    ee: number[];
    objects: WorldObject[];
  };
  compliance: {
    x_c: number[];
    v_c: number[];
    x_d: number[];
    v_d: number[];
    f_ext: number[];
    mass: number[];
    damping: number[];
    stiffness: number[];
  };
  arbitration: {
    lambda: number;
    filtered_lambda: number;
    mode: ArbitrationMode;
    source: ArbitrationSource;
  };
  intent: { intent: string; confidence: number };
  wrench: number[];
  speed_scale: number;
  trajectory: unknown;
}

export function makeEnvelope(
  type: EnvelopeType,
  seq: number,
  sid: string,
  payload: Record<string, unknown>,
): Envelope {
  return { v: PROTOCOL_VERSION, type, seq, sid, t: Date.now() % 2_000_000_000, payload };
}

export function isEnvelope(value: unknown): value is Envelope {
  if (typeof value !== "object" || value === null) return false;
  const doc = value as Record<string, unknown>;
  return (
    doc.v === PROTOCOL_VERSION &&
    typeof doc.type === "string" &&
    ENVELOPE_TYPES.has(doc.type) &&
    typeof doc.seq === "number" &&
    Number.isInteger(doc.seq) &&
    doc.seq >= 0 &&
    typeof doc.sid === "string" &&
    typeof doc.t === "number" &&
    typeof doc.payload === "object" &&
    doc.payload !== null
  );
}

/** Decode one stream frame; malformed text yields null (never throws). */
export function parseFrame(text: string): Envelope | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  return isEnvelope(doc) ? doc : null;
}

export function isStateFrame(env: Envelope): boolean {
  return (env.type === "state" || env.type === "snapshot") && typeof (env.payload as { tick?: unknown }).tick === "number";
}

export function snapshotOf(env: Envelope): Snapshot | null {
  return isStateFrame(env) ? (env.payload as unknown as Snapshot) : null;
}

/** The human-readable note an ack carries, e.g. "lambda=0.5". */
export function ackNote(env: Envelope): string | null {
  if (env.type !== "ack") return null;
  const note = env.payload.note;
  return typeof note === "string" ? note : null;
}

/** Value of a "key=value" note when the key matches, else null. */
export function noteValue(note: string, key: string): string | null {
  const prefix = `${key}=`;
  return note.startsWith(prefix) ? note.slice(prefix.length) : null;
}

export function errorCode(env: Envelope): string | null {
  if (env.type !== "error") return null;
  const code = env.payload.code;
  return typeof code === "string" ? code : null;
}

export function errorReason(env: Envelope): string {
  const reason = env.payload.reason;
  return typeof reason === "string" ? reason : "unknown error";
}

/** Console view-model: everything the widgets render.
 *
 * Renders only server-acknowledged state -- frames from the event stream
 * and ack notes. There is no client-side prediction: the lambda slider
 * position tracked here is the last value the server confirmed, and the
 * parameter panel always shows the compliance parameters of the latest
 * broadcast snapshot. DOM-free.
 */

import {
  ackNote,
  errorCode,
  errorReason,
  noteValue,
  snapshotOf,
  type Envelope,
  type Snapshot,
} from "./protocol.js";

export type Connection = "idle" | "connecting" | "live" | "down";

export interface CommandNotice {
  kind: "matched" | "none";
  token?: string;
  text: string;
}

export interface WireError {
  code: string;
  reason: string;
}

/** Fixed-capacity history; the oldest entry falls out when full. */
export class RingBuffer<T> {
  private readonly slots: (T | undefined)[];
  private start = 0;
  private count = 0;

  constructor(readonly capacity: number) {
    if (!Number.isInteger(capacity) || capacity <= 0) {
      throw new RangeError(`capacity must be a positive integer, got ${capacity}`);
    }
    this.slots = new Array<T | undefined>(capacity);
  }

  get length(): number {
    return this.count;
  }

  push(item: T): void {
    const end = (this.start + this.count) % this.capacity;
    this.slots[end] = item;
    if (this.count < this.capacity) {
      this.count += 1;
    } else {
      this.start = (this.start + 1) % this.capacity;
    }
  }

  at(index: number): T {
    if (index < 0 || index >= this.count) {
      throw new RangeError(`index ${index} outside [0, ${this.count})`);
    }
    return this.slots[(this.start + index) % this.capacity] as T;
  }

  last(): T | null {
    return this.count === 0 ? null : this.at(this.count - 1);
  }

  map<U>(fn: (item: T, index: number) => U): U[] {
    const out = new Array<U>(this.count);
    for (let i = 0; i < this.count; i++) out[i] = fn(this.at(i), i);
    return out;
  }
}

export const DEFAULT_HISTORY = 600;

export const AUTO_TUNE_TOOLTIP =
  "λ is auto-tuned from force and intent in shared autonomy; " +
  "switch to shared control to set it manually";

export class ConsoleView {
  connection: Connection = "idle";
  banner: string | null = null;
  latest: Snapshot | null = null;
  readonly history: RingBuffer<Snapshot>;
  /** Last server-acknowledged lambda; widgets snap the slider to this. */
  sliderValue = 0;
  notice: CommandNotice | null = null;
  lastError: WireError | null = null;

  constructor(historySize: number = DEFAULT_HISTORY) {
    this.history = new RingBuffer<Snapshot>(historySize);
  }

  get lambda(): number {
    return this.latest?.arbitration.lambda ?? 0;
  }

  get mode(): string {
    return this.latest?.arbitration.mode ?? "autonomy";
  }

  get source(): string {
    return this.latest?.arbitration.source ?? "shared_control";
  }

  /** Manual lambda entry only makes sense when the human owns lambda. */
  get sliderEnabled(): boolean {
    return this.source === "shared_control";
  }

  get sliderTooltip(): string | null {
    return this.sliderEnabled ? null : AUTO_TUNE_TOOLTIP;
  }

  get displayedParams(): { mass: number[]; damping: number[]; stiffness: number[] } | null {
    if (this.latest === null) return null;
    const c = this.latest.compliance;
    return { mass: c.mass, damping: c.damping, stiffness: c.stiffness };
  }

  get intentLabel(): string {
    if (this.latest === null) return "unknown";
    const { intent, confidence } = this.latest.intent;
    return `${intent} (${confidence.toFixed(2)})`;
  }

  setConnection(connection: Connection, banner: string | null = null): void {
    this.connection = connection;
    this.banner = banner;
  }

  /** Apply one server frame, from the event stream or a reply list.
   *
   * Paced sessions deliver command acks on the event stream (commands are
   * queued, so the POST reply is empty); unpaced sessions return them in
   * the reply list. Both paths land here.
   */
  applyFrame(env: Envelope): void {
    const snapshot = snapshotOf(env);
    if (snapshot !== null) {
      this.latest = snapshot;
      this.history.push(snapshot);
      this.sliderValue = snapshot.arbitration.lambda;
      return;
    }
    if (env.type === "error") {
      this.lastError = { code: errorCode(env) ?? "unknown", reason: errorReason(env) };
      return;
    }
    const note = ackNote(env);
    if (note === null) return;
    const lambda = noteValue(note, "lambda");
    if (lambda !== null) {
      const value = Number(lambda);
      if (Number.isFinite(value)) this.sliderValue = value;
      return;
    }
    const token = noteValue(note, "matched");
    if (token !== null) {
      this.notice = { kind: "matched", token, text: `matched "${token}"` };
      return;
    }
    if (note === "no_command") {
      this.notice = { kind: "none", text: "no compliance command recognized" };
    }
  }

  /** Apply the immediate replies to one submitted command. */
  applyReplies(replies: Envelope[]): void {
    for (const env of replies) this.applyFrame(env);
  }
}

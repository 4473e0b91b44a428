/** Session client: handshake, sequenced sends, rate limiting, reconnect.
 *
 * The transport is injected so the whole client runs against a loopback
 * stand-in in tests. Two channels are coalesced to at most one message per
 * MIN_SEND_INTERVAL_MS (default 50 ms, i.e. 20 msg/s): the lambda slider
 * and the drag wrench, each latest-value-wins. Ending a drag bypasses the
 * limiter and always emits one zero wrench. DOM-free.
 */

import {
  errorCode,
  errorReason,
  makeEnvelope,
  type CommandType,
  type Envelope,
} from "./protocol.js";
import { ConsoleView } from "./view.js";

export interface Transport {
  /** Submit one envelope; resolves with the server's immediate replies. */
  send(env: Envelope): Promise<Envelope[]>;
  /** Open the event stream; returns an unsubscribe function. */
  subscribe(onFrame: (env: Envelope) => void, onDown: () => void): () => void;
}

export interface ClientOptions {
  sid: string;
  client: string;
  /** Floor between sends on a coalesced channel, ms (default 50). */
  minSendIntervalMs?: number;
  backoffStartMs?: number;
  backoffCapMs?: number;
  now?: () => number;
}

export const MIN_SEND_INTERVAL_MS = 50;
export const BACKOFF_START_MS = 250;
export const BACKOFF_CAP_MS = 5000;
/** Jump applied to the counter when the server reports a stale seq. */
export const SEQ_RESYNC_JUMP = 1000;

type Clock = () => number;

/** Latest-value-wins rate limiter: leading send, trailing flush. */
class Coalescer<T> {
  private pending: T | null = null;
  private lastSent = Number.NEGATIVE_INFINITY;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly intervalMs: number,
    private readonly now: Clock,
    private readonly emit: (value: T) => void,
  ) {}

  offer(value: T): void {
    const wait = this.lastSent + this.intervalMs - this.now();
    if (wait <= 0 && this.timer === null) {
      this.lastSent = this.now();
      this.emit(value);
      return;
    }
    this.pending = value;
    if (this.timer === null) {
      this.timer = setTimeout(() => this.flush(), Math.max(wait, 0));
    }
  }

  /** Emit immediately, dropping anything pending (safety sends). */
  force(value: T): void {
    this.clear();
    this.lastSent = this.now();
    this.emit(value);
  }

  clear(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.pending = null;
  }

  private flush(): void {
    this.timer = null;
    if (this.pending === null) return;
    const value = this.pending;
    this.pending = null;
    this.lastSent = this.now();
    this.emit(value);
  }
}

export class SessionClient {
  readonly view: ConsoleView;
  private seq = 0;
  private unsubscribe: (() => void) | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private backoffMs: number;
  private closed = false;
  private readonly lambdaChannel: Coalescer<number>;
  private readonly wrenchChannel: Coalescer<[number, number]>;
  private readonly now: Clock;

  constructor(
    private readonly transport: Transport,
    private readonly opts: ClientOptions,
    view?: ConsoleView,
  ) {
    this.view = view ?? new ConsoleView();
    this.now = opts.now ?? (() => Date.now());
    this.backoffMs = opts.backoffStartMs ?? BACKOFF_START_MS;
    const interval = opts.minSendIntervalMs ?? MIN_SEND_INTERVAL_MS;
    this.lambdaChannel = new Coalescer<number>(interval, this.now, (value) => {
      void this.dispatch("set_lambda", { value });
    });
    this.wrenchChannel = new Coalescer<[number, number]>(interval, this.now, (f) => {
      void this.dispatch("wrench", { f });
    });
  }

  /** hello/join handshake, then subscribe to the event stream. */
  async connect(): Promise<void> {
    if (this.closed) return;
    this.view.setConnection("connecting");
    try {
      for (const step of ["hello", "join"] as const) {
        const replies = await this.transport.send(this.handshakeEnvelope(step));
        const rejection = replies.find((env) => env.type === "error");
        if (rejection !== undefined) {
          this.view.applyFrame(rejection);
          this.view.setConnection(
            "down",
            `${step} rejected: ${errorReason(rejection)} — retrying`,
          );
          this.scheduleReconnect();
          return;
        }
        if (step === "join") for (const env of replies) this.view.applyFrame(env);
      }
    } catch (err) {
      this.view.setConnection("down", `connection failed: ${describe(err)} — retrying`);
      this.scheduleReconnect();
      return;
    }
    this.unsubscribe = this.transport.subscribe(
      (env) => this.view.applyFrame(env),
      () => this.onStreamDown(),
    );
    this.backoffMs = this.opts.backoffStartMs ?? BACKOFF_START_MS;
    this.view.setConnection("live");
  }

  close(): void {
    this.closed = true;
    this.lambdaChannel.clear();
    this.wrenchChannel.clear();
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.unsubscribe?.();
    this.unsubscribe = null;
    this.view.setConnection("idle");
  }

  /** Slider input; coalesced, latest value wins. */
  setLambda(value: number): void {
    this.lambdaChannel.offer(Math.min(1, Math.max(0, value)));
  }

  /** Switch who owns lambda (shared_control vs shared_autonomy). */
  async setSource(source: "shared_control" | "shared_autonomy"): Promise<void> {
    await this.dispatch("set_mode", { source });
  }

  /** Free-text compliance command; the ack carries the matched token. */
  async sendCommand(text: string): Promise<void> {
    await this.dispatch("nl_command", { text });
  }

  /** Drag gesture sample; coalesced to the send-rate floor. */
  dragWrench(f: [number, number]): void {
    this.wrenchChannel.offer(f);
  }

  /** Drag release: always emits exactly one zero wrench, immediately. */
  endDrag(): void {
    this.wrenchChannel.force([0, 0]);
  }

  async grasp(objectId: string): Promise<void> {
    await this.dispatch("grasp", { object_id: objectId });
  }

  async release(objectId: string): Promise<void> {
    await this.dispatch("release", { object_id: objectId });
  }

  private handshakeEnvelope(type: "hello" | "join"): Envelope {
    return makeEnvelope(type, this.nextSeq(), this.opts.sid, { client: this.opts.client });
  }

  private nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  private async dispatch(type: CommandType, payload: Record<string, unknown>): Promise<void> {
    let replies: Envelope[];
    try {
      replies = await this.transport.send(
        makeEnvelope(type, this.nextSeq(), this.opts.sid, payload),
      );
      if (replies.some((env) => errorCode(env) === "stale_seq")) {
        // The server has seen a higher seq from this client name (e.g. a
        // previous tab); jump past it and resend once.
        this.seq += SEQ_RESYNC_JUMP;
        replies = await this.transport.send(
          makeEnvelope(type, this.nextSeq(), this.opts.sid, payload),
        );
      }
    } catch (err) {
      this.view.setConnection("down", `send failed: ${describe(err)} — retrying`);
      this.scheduleReconnect();
      return;
    }
    this.view.applyReplies(replies);
  }

  private onStreamDown(): void {
    this.unsubscribe?.();
    this.unsubscribe = null;
    this.view.setConnection("down", "connection lost — retrying");
    this.scheduleReconnect();
  }

  private scheduleReconnect(): void {
    if (this.closed || this.reconnectTimer !== null) return;
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.opts.backoffCapMs ?? BACKOFF_CAP_MS);
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      void this.connect();
    }, delay);
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

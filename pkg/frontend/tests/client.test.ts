import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { SessionClient } from "../src/client.js";
import { AUTO_TUNE_TOOLTIP } from "../src/view.js";
import { LoopbackServer } from "./mock.js";

function makePair(sid = "live"): { server: LoopbackServer; client: SessionClient } {
  const server = new LoopbackServer();
  const client = new SessionClient(server, { sid, client: "operator" });
  return { server, client };
}

describe("SessionClient", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("handshakes hello/join and renders the joining snapshot", async () => {
    const { server, client } = makePair();
    await client.connect();
    expect(client.view.connection).toBe("live");
    expect(server.sent.map((env) => env.type)).toEqual(["hello", "join"]);
    // join reply snapshot plus the subscribe-time snapshot
    expect(client.view.latest).not.toBeNull();
    expect(client.view.history.length).toBe(2);
    expect(client.view.lambda).toBe(0);
    expect(client.view.mode).toBe("autonomy");
    client.close();
  });

  it("reflects a slider change to lambda=1.0 within 200 ms of fake time", async () => {
    const { client } = makePair();
    await client.connect();
    const t0 = Date.now();

    client.setLambda(1.0);
    await vi.advanceTimersByTimeAsync(0); // leading send + ack microtasks
    expect(client.view.sliderValue).toBe(1); // server-acknowledged value

    await vi.advanceTimersByTimeAsync(50); // next broadcast carries it
    expect(client.view.lambda).toBe(1);
    expect(client.view.mode).toBe("manual");
    expect(Date.now() - t0).toBeLessThanOrEqual(200);
    client.close();
  });

  it("renders telemetry at >= 10 Hz while live", async () => {
    const { client } = makePair();
    await client.connect();
    const before = client.view.history.length;
    await vi.advanceTimersByTimeAsync(1000);
    expect(client.view.history.length - before).toBeGreaterThanOrEqual(10);
    client.close();
  });

  it("coalesces rapid slider drags to the send-rate floor, latest wins", async () => {
    const { server, client } = makePair();
    await client.connect();

    const before = server.framesSent("set_lambda").length;
    for (let i = 0; i < 100; i++) {
      client.setLambda(i / 99); // 100 samples over 500 ms = 200 Hz of input
      await vi.advanceTimersByTimeAsync(5);
    }
    await vi.advanceTimersByTimeAsync(60); // trailing flush
    const frames = server.framesSent("set_lambda").slice(before);

    // <= 1 message per 50 ms across the 500 ms drag (leading + trailing)
    expect(frames.length).toBeLessThanOrEqual(11);
    expect(frames.length).toBeGreaterThanOrEqual(2);
    const last = frames[frames.length - 1];
    expect((last?.payload as { value: number }).value).toBe(1);
    expect(client.view.sliderValue).toBe(1);
    client.close();
  });

  it("recovers from a stale seq by resending once with a fresh seq", async () => {
    const { server, client } = makePair();
    await client.connect();

    server.primeSeq(600); // as if another tab burned seqs 1..600
    client.setLambda(0.5);
    await vi.advanceTimersByTimeAsync(0);

    const frames = server.framesSent("set_lambda");
    expect(frames.length).toBe(2); // original + exactly one resend
    expect(frames[1]?.seq).toBeGreaterThan(600);
    expect(client.view.sliderValue).toBe(0.5); // resend was acked
    expect(client.view.lastError).toBeNull(); // recovery is silent
    client.close();
  });

  it("limits drag wrenches to the send-rate floor and zeroes on release", async () => {
    const { server, client } = makePair();
    await client.connect();
    expect(server.framesSent("wrench").length).toBe(0); // no drag, no wrench

    for (let i = 1; i <= 60; i++) {
      client.dragWrench([i * 0.5, 0]); // 60 samples over 300 ms
      await vi.advanceTimersByTimeAsync(5);
    }
    const during = server.framesSent("wrench").length;
    expect(during).toBeLessThanOrEqual(7); // <= 1 per 50 ms over 300 ms

    client.endDrag(); // bypasses the limiter, no matter how recent the last send
    const frames = server.framesSent("wrench");
    expect(frames.length).toBe(during + 1);
    const last = frames[frames.length - 1];
    expect((last?.payload as { f: number[] }).f).toEqual([0, 0]);
    client.close();
  });

  it("shows a banner, backs off, and rejoins after the stream drops", async () => {
    const { server, client } = makePair();
    await client.connect();
    expect(client.view.connection).toBe("live");

    server.offline = true;
    server.dropStream();
    expect(client.view.connection).toBe("down");
    expect(client.view.banner).toContain("retrying");

    await vi.advanceTimersByTimeAsync(250); // first retry: still offline
    expect(client.view.connection).toBe("down");
    expect(server.framesSent("hello").length).toBe(1); // retry never reached it

    await vi.advanceTimersByTimeAsync(499); // next retry not due yet (backoff doubled)
    expect(client.view.connection).toBe("down");

    server.offline = false; // server "restarted"
    await vi.advanceTimersByTimeAsync(1); // 500 ms retry fires
    expect(client.view.connection).toBe("live");
    expect(server.framesSent("hello").length).toBe(2);
    expect(client.view.banner).toBeNull();
    client.close();
  });

  it("surfaces the server reason when joining an unknown session", async () => {
    const { client } = makePair("not-a-session");
    await client.connect();
    expect(client.view.connection).toBe("down");
    expect(client.view.banner).toContain("no session 'not-a-session'");
    expect(client.view.lastError?.code).toBe("unknown_session");
    client.close();
  });

  it("applies acks arriving on the event stream (paced sessions)", async () => {
    const { server, client } = makePair();
    await client.connect();

    server.pushFrame(server.ack(42, "lambda=0.7"));
    expect(client.view.sliderValue).toBe(0.7);

    server.pushFrame(server.ack(43, "matched=softly"));
    expect(client.view.notice).toEqual({
      kind: "matched",
      token: "softly",
      text: 'matched "softly"',
    });
    client.close();
  });

  it("disables the slider with a tooltip while the source is shared autonomy", async () => {
    const { server, client } = makePair();
    await client.connect();
    expect(client.view.sliderEnabled).toBe(true);
    expect(client.view.sliderTooltip).toBeNull();

    await client.setSource("shared_autonomy");
    await vi.advanceTimersByTimeAsync(50); // broadcast reflects the new source
    expect(client.view.source).toBe("shared_autonomy");
    expect(client.view.sliderEnabled).toBe(false);
    expect(client.view.sliderTooltip).toBe(AUTO_TUNE_TOOLTIP);

    // a slider write in this source is rejected by the server, not predicted
    client.setLambda(0.9);
    await vi.advanceTimersByTimeAsync(0);
    expect(client.view.lastError?.code).toBe("rejected");
    expect(server.lambda).toBe(0);
    client.close();
  });

  it("halves the displayed stiffness after a 'softly' command round-trips", async () => {
    const { client } = makePair();
    await client.connect();
    expect(client.view.displayedParams?.stiffness).toEqual([100, 100]);

    await client.sendCommand("move softly please");
    expect(client.view.notice?.kind).toBe("matched");
    expect(client.view.notice?.token).toBe("softly");

    await vi.advanceTimersByTimeAsync(50); // next broadcast shows new params
    expect(client.view.displayedParams?.stiffness).toEqual([50, 50]);
    client.close();
  });

  it("reports an unmatched command without blocking anything", async () => {
    const { server, client } = makePair();
    await client.connect();
    await client.sendCommand("hello");
    expect(client.view.notice).toEqual({
      kind: "none",
      text: "no compliance command recognized",
    });
    expect(server.stiffness).toEqual([100, 100]); // nothing changed
    // the session keeps flowing: another command still works
    client.setLambda(0.5);
    await vi.advanceTimersByTimeAsync(0);
    expect(client.view.sliderValue).toBe(0.5);
    client.close();
  });
});

/** Browser entry point: wires the DOM to the session client.
 *
 * Served at /console/ by the simulator (`cobotsim serve --console frontend`)
 * or any static file server; the simulator API must be reachable at the
 * same origin (or `?server=` must point at it).
 */

import { SessionClient, type Transport } from "./client.js";
import { series } from "./charts.js";
import { isEnvelope, parseFrame, type Envelope } from "./protocol.js";
import { dragToForce } from "./gesture.js";
import { drawStrip, renderWorkcell, type Geometry } from "./render.js";

function httpTransport(base: string, sid: string, client: string): Transport {
  const messagesUrl = `${base}/sessions/${encodeURIComponent(sid)}/messages?client=${encodeURIComponent(client)}`;
  const eventsUrl = `${base}/sessions/${encodeURIComponent(sid)}/events?client=${encodeURIComponent(client)}`;
  return {
    async send(envelope: Envelope): Promise<Envelope[]> {
      const res = await fetch(messagesUrl, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(envelope),
      });
      const body: unknown = await res.json().catch(() => null);
      if (body !== null && typeof body === "object" && isEnvelope(body)) {
        return [body]; // typed error frame (e.g. unknown session)
      }
      if (!res.ok) throw new Error(`HTTP ${res.status}`);
      const replies = (body as { replies?: unknown[] } | null)?.replies;
      return Array.isArray(replies) ? replies.filter(isEnvelope) : [];
    },
    subscribe(onFrame, onDown): () => void {
      const source = new EventSource(eventsUrl);
      source.onmessage = (event) => {
        const frame = parseFrame(String(event.data));
        if (frame !== null) onFrame(frame);
      };
      source.onerror = () => {
        source.close();
        onDown();
      };
      return () => source.close();
    },
  };
}

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el;
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("server") ?? "";
  const sid = params.get("sid") ?? "live";
  const clientName = params.get("client") ?? "operator";

  const client = new SessionClient(httpTransport(base, sid, clientName), {
    sid,
    client: clientName,
  });
  const view = client.view;

  const banner = $("banner");
  const lambdaSlider = $("lambda") as HTMLInputElement;
  const lambdaValue = $("lambda-value");
  const modeLabel = $("mode");
  const sourceLabel = $("source");
  const intentLabel = $("intent");
  const paramsLabel = $("params");
  const noticeLabel = $("notice");
  const commandInput = $("command") as HTMLInputElement;
  const objectSelect = $("object") as HTMLSelectElement;
  const workcell = $("workcell") as HTMLCanvasElement;
  const stripLambda = $("strip-lambda") as HTMLCanvasElement;
  const stripForce = $("strip-force") as HTMLCanvasElement;
  const stripStiffness = $("strip-stiffness") as HTMLCanvasElement;

  let geometry: Geometry = { linkLengths: [0.5, 0.5], probeRadius: 0.05 };
  void fetch(`${base}/sessions/${encodeURIComponent(sid)}`)
    .then((res) => (res.ok ? res.json() : null))
    .then((status: { robot?: { link_lengths?: number[]; probe_radius?: number } } | null) => {
      if (status?.robot?.link_lengths) {
        geometry = {
          linkLengths: status.robot.link_lengths,
          probeRadius: status.robot.probe_radius ?? 0.05,
        };
      }
    })
    .catch(() => undefined);

  let sliderHeld = false;
  lambdaSlider.addEventListener("pointerdown", () => {
    sliderHeld = true;
  });
  lambdaSlider.addEventListener("pointerup", () => {
    sliderHeld = false;
  });
  lambdaSlider.addEventListener("input", () => {
    client.setLambda(Number(lambdaSlider.value));
  });

  $("source-control").addEventListener("click", () => void client.setSource("shared_control"));
  $("source-autonomy").addEventListener("click", () => void client.setSource("shared_autonomy"));
  $("send-command").addEventListener("click", () => {
    if (commandInput.value.trim().length > 0) void client.sendCommand(commandInput.value);
  });
  commandInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && commandInput.value.trim().length > 0) {
      void client.sendCommand(commandInput.value);
    }
  });
  $("grasp").addEventListener("click", () => {
    if (objectSelect.value) void client.grasp(objectSelect.value);
  });
  $("release").addEventListener("click", () => {
    const held = view.latest?.world.objects.find((obj) => obj.grasped);
    const target = held?.id ?? objectSelect.value;
    if (target) void client.release(target);
  });

  let drag: { startX: number; startY: number; f: [number, number] } | null = null;
  workcell.addEventListener("pointerdown", (event) => {
    workcell.setPointerCapture(event.pointerId);
    drag = { startX: event.offsetX, startY: event.offsetY, f: [0, 0] };
  });
  workcell.addEventListener("pointermove", (event) => {
    if (drag === null) return;
    const side = Math.min(workcell.width, workcell.height);
    drag.f = dragToForce(event.offsetX - drag.startX, event.offsetY - drag.startY, side);
    client.dragWrench(drag.f);
  });
  const stopDrag = () => {
    if (drag === null) return;
    drag = null;
    client.endDrag();
  };
  workcell.addEventListener("pointerup", stopDrag);
  workcell.addEventListener("pointercancel", stopDrag);

  const workcellCtx = workcell.getContext("2d");
  const stripCtxs: Array<[HTMLCanvasElement, CanvasRenderingContext2D | null]> = [
    [stripLambda, stripLambda.getContext("2d")],
    [stripForce, stripForce.getContext("2d")],
    [stripStiffness, stripStiffness.getContext("2d")],
  ];

  function redraw(): void {
    banner.textContent =
      view.banner ??
      (view.lastError !== null
        ? `${view.lastError.code}: ${view.lastError.reason}`
        : view.connection === "live"
          ? ""
          : view.connection);
    banner.className = `banner ${view.connection}${view.lastError !== null ? " error" : ""}`;

    if (!sliderHeld) lambdaSlider.value = view.sliderValue.toFixed(3);
    lambdaSlider.disabled = !view.sliderEnabled;
    lambdaSlider.title = view.sliderTooltip ?? "";
    lambdaValue.textContent = view.lambda.toFixed(3);
    modeLabel.textContent = view.mode;
    sourceLabel.textContent = view.source;
    intentLabel.textContent = view.intentLabel;

    const kdm = view.displayedParams;
    paramsLabel.textContent =
      kdm === null
        ? "—"
        : `K=[${kdm.stiffness.map((v) => v.toFixed(1)).join(", ")}]  ` +
          `D=[${kdm.damping.map((v) => v.toFixed(1)).join(", ")}]  ` +
          `M=[${kdm.mass.map((v) => v.toFixed(2)).join(", ")}]`;

    noticeLabel.textContent = view.notice?.text ?? "";
    noticeLabel.className = `notice ${view.notice?.kind ?? ""}`;

    const snapshot = view.latest;
    if (snapshot !== null) {
      const seen = new Set<string>();
      for (const option of Array.from(objectSelect.options)) seen.add(option.value);
      for (const obj of snapshot.world.objects) {
        if (!seen.has(obj.id)) {
          const option = document.createElement("option");
          option.value = obj.id;
          option.textContent = obj.id;
          objectSelect.appendChild(option);
        }
      }
    }

    if (workcellCtx !== null) {
      renderWorkcell(workcellCtx, workcell.width, workcell.height, view, geometry, drag);
    }
    const lambdaSeries = series(view.history, (s) => s.arbitration.filtered_lambda);
    const forceSeries = series(view.history, (s) =>
      Math.hypot(s.compliance.f_ext[0] ?? 0, s.compliance.f_ext[1] ?? 0),
    );
    const stiffnessSeries = series(view.history, (s) => s.compliance.stiffness[0] ?? 0);
    const strips: Array<[SeriesArgs, [number, number] | undefined]> = [
      [{ points: lambdaSeries, color: "#6fd08c", label: "λ (filtered)" }, [0, 1]],
      [{ points: forceSeries, color: "#e0564f", label: "|f_ext| N" }, undefined],
      [{ points: stiffnessSeries, color: "#5a82c2", label: "K[0] N/m" }, undefined],
    ];
    strips.forEach(([args, range], i) => {
      const entry = stripCtxs[i];
      if (entry && entry[1] !== null) {
        drawStrip(entry[1], entry[0].width, entry[0].height, args.points, args.color, args.label, range);
      }
    });
  }

  interface SeriesArgs {
    points: ReturnType<typeof series>;
    color: string;
    label: string;
  }

  function frame(): void {
    redraw();
    window.requestAnimationFrame(frame);
  }
  window.requestAnimationFrame(frame);

  void client.connect();
}

main();

import { describe, expect, it } from "vitest";

import { series, seriesBounds, toPixels, type SeriesPoint } from "../src/charts.js";
import { ConsoleView } from "../src/view.js";
import { LoopbackServer } from "./mock.js";

describe("series extraction", () => {
  it("maps the snapshot history through a selector, oldest first", () => {
    const server = new LoopbackServer();
    const view = new ConsoleView();
    for (const lambda of [0.1, 0.2, 0.3]) {
      server.lambda = lambda;
      server.tick += 1;
      view.applyFrame(server.stateEnvelope());
    }
    const points = series(view.history, (s) => s.arbitration.lambda);
    expect(points.map((p) => p.value)).toEqual([0.1, 0.2, 0.3]);
    expect(points[0]?.t).toBeLessThan(points[2]?.t ?? 0);
  });

  it("computes bounds and returns null for an empty series", () => {
    expect(seriesBounds([])).toBeNull();
    const bounds = seriesBounds([
      { t: 1, value: 5 },
      { t: 3, value: -2 },
      { t: 2, value: 9 },
    ]);
    expect(bounds).toEqual({ tMin: 1, tMax: 3, vMin: -2, vMax: 9 });
  });
});

describe("toPixels", () => {
  const ramp: SeriesPoint[] = [
    { t: 0, value: 0 },
    { t: 1, value: 0.5 },
    { t: 2, value: 1 },
  ];

  it("maps data onto the chart area with y growing downward", () => {
    const pixels = toPixels(ramp, 200, 100);
    expect(pixels[0]).toEqual([0, 100]); // min value at the bottom
    expect(pixels[2]).toEqual([200, 0]); // max value at the top
    expect(pixels[1]?.[0]).toBeCloseTo(100, 10);
    expect(pixels[1]?.[1]).toBeCloseTo(50, 10);
  });

  it("honours a fixed value range for stable axes", () => {
    const pixels = toPixels([{ t: 0, value: 0.5 }, { t: 1, value: 0.5 }], 100, 100, [0, 1]);
    expect(pixels[0]?.[1]).toBeCloseTo(50, 10); // 0.5 sits mid-range of [0, 1]
  });

  it("pads a flat series instead of dividing by zero", () => {
    const pixels = toPixels([{ t: 0, value: 3 }, { t: 5, value: 3 }], 100, 100);
    expect(pixels[0]?.[1]).toBeCloseTo(50, 10); // centered, finite
    expect(pixels[1]?.[0]).toBeCloseTo(100, 10);
  });

  it("returns nothing for an empty series", () => {
    expect(toPixels([], 100, 100)).toEqual([]);
  });
});

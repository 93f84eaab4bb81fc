import { describe, expect, it } from "vitest";

import { makeProjector, networkBounds } from "../src/map.js";
import type { NetworkDoc } from "../src/types.js";

const DOC: NetworkDoc = {
  nodes: [
    { id: "a", position: [0, 0, 10], is_recharge: false },
    { id: "b", position: [100, 50, 12], is_recharge: true },
  ],
  edges: [{ from: "a", to: "b", length3d: 112 }],
  zones: [{ id: "z", region: [[-10, 0], [0, -20], [10, 0]] }],
  params: { corridor_width: 1.2, clearance: 0.5 },
};

describe("bounds", () => {
  it("covers nodes and zones", () => {
    const b = networkBounds(DOC);
    expect(b).toEqual({ minX: -10, minY: -20, maxX: 100, maxY: 50 });
  });
});

describe("projector", () => {
  it("maps the world into the viewport with margin and flipped y", () => {
    const bounds = { minX: 0, minY: 0, maxX: 100, maxY: 100 };
    const project = makeProjector(bounds, 200, 200, 10);
    expect(project(0, 0)).toEqual([10, 190]);
    expect(project(100, 100)).toEqual([190, 10]);
    expect(project(50, 50)).toEqual([100, 100]);
  });

  it("keeps aspect ratio uniform", () => {
    const bounds = { minX: 0, minY: 0, maxX: 200, maxY: 100 };
    const project = makeProjector(bounds, 220, 220, 10);
    const [x0] = project(0, 0);
    const [x1] = project(200, 0);
    const [, y0] = project(0, 0);
    const [, y1] = project(0, 100);
    const scaleX = (x1 - x0) / 200;
    const scaleY = (y0 - y1) / 100;
    expect(scaleX).toBeCloseTo(scaleY, 10);
  });
});

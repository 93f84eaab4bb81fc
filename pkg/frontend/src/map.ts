// Top-down map math: fitting the network into a fixed viewport. The z of a
// node only appears in hover text; rendering is strictly xy.

import type { NetworkDoc } from "./types.js";

export interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function networkBounds(doc: NetworkDoc): Bounds {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const n of doc.nodes) {
    xs.push(n.position[0]);
    ys.push(n.position[1]);
  }
  for (const z of doc.zones) {
    for (const [x, y] of z.region) {
      xs.push(x);
      ys.push(y);
    }
  }
  if (xs.length === 0) return { minX: 0, minY: 0, maxX: 1, maxY: 1 };
  return {
    minX: Math.min(...xs),
    minY: Math.min(...ys),
    maxX: Math.max(...xs),
    maxY: Math.max(...ys),
  };
}

export type Projector = (x: number, y: number) => [number, number];

/**
 * Uniform-scale world-to-viewport projection with a pixel margin, north up
 * (SVG y grows downward, so world y is flipped).
 */
export function makeProjector(
  bounds: Bounds,
  width: number,
  height: number,
  margin = 20,
): Projector {
  const spanX = Math.max(bounds.maxX - bounds.minX, 1e-9);
  const spanY = Math.max(bounds.maxY - bounds.minY, 1e-9);
  const scale = Math.min(
    (width - 2 * margin) / spanX,
    (height - 2 * margin) / spanY,
  );
  const offsetX = (width - scale * spanX) / 2;
  const offsetY = (height - scale * spanY) / 2;
  return (x, y) => [
    offsetX + (x - bounds.minX) * scale,
    height - offsetY - (y - bounds.minY) * scale,
  ];
}

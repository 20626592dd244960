import { describe, expect, it } from "vitest";

import { ViewTransform, distance } from "../src/viewTransform.js";
import type { Point } from "../src/types.js";

/** Deterministic PRNG (mulberry32) so the property runs are reproducible. */
function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("ViewTransform", () => {
  it("is exact at zoom 1 with integer pan", () => {
    const vt = new ViewTransform(1, 40, -17);
    const image: Point = { x: 123, y: 456 };
    const canvas = vt.imageToCanvas(image);
    expect(canvas).toEqual({ x: 163, y: 439 });
    const back = vt.canvasToImage(canvas);
    expect(back.x).toBe(123);
    expect(back.y).toBe(456);
  });

  it("is bit-exact for power-of-two zooms", () => {
    for (const scale of [0.25, 0.5, 2, 4, 8]) {
      const vt = new ViewTransform(scale, 13.5, -7.25);
      const p: Point = { x: 12.5, y: 34.25 };
      const back = vt.canvasToImage(vt.imageToCanvas(p));
      expect(back.x).toBe(p.x);
      expect(back.y).toBe(p.y);
    }
  });

  it("round-trips within 1e-9 for random transforms", () => {
    const rand = rng(20240817);
    for (let i = 0; i < 500; i++) {
      const scale = 0.05 + rand() * 20;
      const vt = new ViewTransform(scale, (rand() - 0.5) * 4000, (rand() - 0.5) * 4000);
      const p: Point = { x: rand() * 1920, y: rand() * 1080 };
      const back = vt.canvasToImage(vt.imageToCanvas(p));
      expect(Math.abs(back.x - p.x)).toBeLessThan(1e-9);
      expect(Math.abs(back.y - p.y)).toBeLessThan(1e-9);
      const c: Point = { x: rand() * 1920, y: rand() * 1080 };
      const there = vt.imageToCanvas(vt.canvasToImage(c));
      expect(Math.abs(there.x - c.x)).toBeLessThan(1e-9);
      expect(Math.abs(there.y - c.y)).toBeLessThan(1e-9);
    }
  });

  it("zoomAt keeps the anchor point stationary", () => {
    const rand = rng(7);
    for (let i = 0; i < 200; i++) {
      const vt = new ViewTransform(0.1 + rand() * 8, rand() * 500 - 250, rand() * 500 - 250);
      const anchor: Point = { x: rand() * 800, y: rand() * 600 };
      const imageUnderAnchor = vt.canvasToImage(anchor);
      const zoomed = vt.zoomAt(anchor, 0.5 + rand() * 3);
      const after = zoomed.imageToCanvas(imageUnderAnchor);
      expect(Math.abs(after.x - anchor.x)).toBeLessThan(1e-9);
      expect(Math.abs(after.y - anchor.y)).toBeLessThan(1e-9);
    }
  });

  it("zoomAt clamps the scale range", () => {
    const vt = new ViewTransform(1, 0, 0);
    expect(vt.zoomAt({ x: 0, y: 0 }, 1e6).scale).toBe(64);
    expect(vt.zoomAt({ x: 0, y: 0 }, 1e-6).scale).toBe(1 / 64);
    expect(vt.zoomAt({ x: 0, y: 0 }, 2, 0.5, 4).scale).toBe(2);
  });

  it("fitToView centers the image and touches the limiting edge", () => {
    const vt = ViewTransform.fitToView(200, 100, 400, 400);
    expect(vt.scale).toBe(2);
    expect(vt.tx).toBe(0);
    expect(vt.ty).toBe(100);
    const topLeft = vt.imageToCanvas({ x: 0, y: 0 });
    const bottomRight = vt.imageToCanvas({ x: 200, y: 100 });
    expect(topLeft).toEqual({ x: 0, y: 100 });
    expect(bottomRight).toEqual({ x: 400, y: 300 });
  });

  it("insideImage matches half-open pixel bounds", () => {
    expect(ViewTransform.insideImage({ x: 0, y: 0 }, 10, 10)).toBe(true);
    expect(ViewTransform.insideImage({ x: 9.999, y: 9.999 }, 10, 10)).toBe(true);
    expect(ViewTransform.insideImage({ x: 10, y: 5 }, 10, 10)).toBe(false);
    expect(ViewTransform.insideImage({ x: -0.001, y: 5 }, 10, 10)).toBe(false);
  });

  it("rejects non-positive or non-finite parameters", () => {
    expect(() => new ViewTransform(0, 0, 0)).toThrow(RangeError);
    expect(() => new ViewTransform(-1, 0, 0)).toThrow(RangeError);
    expect(() => new ViewTransform(NaN, 0, 0)).toThrow(RangeError);
    expect(() => new ViewTransform(1, Infinity, 0)).toThrow(RangeError);
  });

  it("distance is the Euclidean norm", () => {
    expect(distance({ x: 100, y: 200 }, { x: 220, y: 200 })).toBe(120);
    expect(distance({ x: 0, y: 0 }, { x: 3, y: 4 })).toBe(5);
  });
});

/**
 * Canvas <-> image coordinate mapping for the frame viewer.
 *
 * The view shows the image scaled by `scale` and translated by `(tx, ty)`:
 *
 *   canvas = image * scale + t          image = (canvas - t) / scale
 *
 * Stored marks are image pixels, so this pair must be an exact inverse: a
 * click at a canvas position derived from a known image pixel has to store
 * that pixel back, not a neighbour.  Both directions use one multiply and
 * one add each so the round trip is correct to the last few ulps for any
 * finite transform, and bit-exact whenever `scale` is a power of two.
 */

import type { Point } from "./types.js";

export class ViewTransform {
  constructor(
    readonly scale: number,
    readonly tx: number,
    readonly ty: number,
  ) {
    if (!Number.isFinite(scale) || scale <= 0) {
      throw new RangeError(`scale must be a positive finite number, got ${scale}`);
    }
    if (!Number.isFinite(tx) || !Number.isFinite(ty)) {
      throw new RangeError(`translation must be finite, got (${tx}, ${ty})`);
    }
  }

  static identity(): ViewTransform {
    return new ViewTransform(1, 0, 0);
  }

  /** Largest view-filling scale with the image centered. */
  static fitToView(imgW: number, imgH: number, viewW: number, viewH: number): ViewTransform {
    if (imgW <= 0 || imgH <= 0 || viewW <= 0 || viewH <= 0) {
      return ViewTransform.identity();
    }
    const scale = Math.min(viewW / imgW, viewH / imgH);
    const tx = (viewW - imgW * scale) / 2;
    const ty = (viewH - imgH * scale) / 2;
    return new ViewTransform(scale, tx, ty);
  }

  imageToCanvas(p: Point): Point {
    return { x: p.x * this.scale + this.tx, y: p.y * this.scale + this.ty };
  }

  canvasToImage(p: Point): Point {
    return { x: (p.x - this.tx) / this.scale, y: (p.y - this.ty) / this.scale };
  }

  panBy(dx: number, dy: number): ViewTransform {
    return new ViewTransform(this.scale, this.tx + dx, this.ty + dy);
  }

  /**
   * Rescale to `scale * factor`, keeping the image point under `canvasPoint`
   * stationary on screen: t1 = p - (s1/s0) * (p - t0).
   */
  zoomAt(canvasPoint: Point, factor: number, minScale = 1 / 64, maxScale = 64): ViewTransform {
    const target = Math.min(maxScale, Math.max(minScale, this.scale * factor));
    const ratio = target / this.scale;
    return new ViewTransform(
      target,
      canvasPoint.x - ratio * (canvasPoint.x - this.tx),
      canvasPoint.y - ratio * (canvasPoint.y - this.ty),
    );
  }

  /** True when `p` (image coordinates) lies inside a w x h image. */
  static insideImage(p: Point, width: number, height: number): boolean {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
}

export function distance(a: Point, b: Point): number {
  return Math.hypot(b.x - a.x, b.y - a.y);
}

/**
 * Client-side editing model for one project's annotations.
 *
 * The server contract is whole-document: every save PUTs the full annotation
 * list.  This store keeps one entry per frame (the schema allows at most one)
 * and enforces the one-mark-per-object-per-frame invariant locally, so a
 * second click simply moves the mark.  `toPayload()` emits the canonical
 * sorted list with empty frames dropped - the same shape the server persists.
 */

import type { AnnotationJson, EventJson, MarkJson, Point, QuadJson } from "./types.js";
import { distance } from "./viewTransform.js";

interface FrameEntry {
  marks: MarkJson[];
  refWidthPx: number | null;
  events: EventJson[];
}

function emptyEntry(): FrameEntry {
  return { marks: [], refWidthPx: null, events: [] };
}

function isEmpty(e: FrameEntry): boolean {
  return e.marks.length === 0 && e.refWidthPx === null && e.events.length === 0;
}

export class AnnotationStore {
  private byFrame = new Map<number, FrameEntry>();
  private dirtyFlag = false;

  constructor(annotations: AnnotationJson[] = []) {
    for (const a of annotations) {
      this.byFrame.set(a.frame_index, {
        marks: a.marks.map((m) => ({ ...m })),
        refWidthPx: a.ref_width_px,
        events: a.events.map((e) => ({ ...e })),
      });
    }
  }

  get dirty(): boolean {
    return this.dirtyFlag;
  }

  markSaved(): void {
    this.dirtyFlag = false;
  }

  private entryFor(frame: number): FrameEntry {
    let e = this.byFrame.get(frame);
    if (e === undefined) {
      e = emptyEntry();
      this.byFrame.set(frame, e);
    }
    return e;
  }

  markFor(frame: number, objectId: string): MarkJson | null {
    const e = this.byFrame.get(frame);
    return e?.marks.find((m) => m.object_id === objectId) ?? null;
  }

  /** Place or move the object's mark on this frame (one mark per object per frame). */
  setMark(frame: number, objectId: string, p: Point): void {
    const e = this.entryFor(frame);
    const existing = e.marks.find((m) => m.object_id === objectId);
    if (existing) {
      existing.x = p.x;
      existing.y = p.y;
    } else {
      e.marks.push({ object_id: objectId, x: p.x, y: p.y });
    }
    this.dirtyFlag = true;
  }

  clearMark(frame: number, objectId: string): boolean {
    const e = this.byFrame.get(frame);
    if (!e) return false;
    const before = e.marks.length;
    e.marks = e.marks.filter((m) => m.object_id !== objectId);
    if (e.marks.length === before) return false;
    this.dirtyFlag = true;
    return true;
  }

  refWidthFor(frame: number): number | null {
    return this.byFrame.get(frame)?.refWidthPx ?? null;
  }

  /** Store the Euclidean distance between two measurement clicks; re-measuring overwrites. */
  measureRefWidth(frame: number, a: Point, b: Point): number {
    const width = distance(a, b);
    this.entryFor(frame).refWidthPx = width;
    this.dirtyFlag = true;
    return width;
  }

  clearRefWidth(frame: number): void {
    const e = this.byFrame.get(frame);
    if (e && e.refWidthPx !== null) {
      e.refWidthPx = null;
      this.dirtyFlag = true;
    }
  }

  eventsFor(frame: number): EventJson[] {
    return this.byFrame.get(frame)?.events.map((e) => ({ ...e })) ?? [];
  }

  addEvent(frame: number, type: EventJson["type"], note = ""): void {
    this.entryFor(frame).events.push({ type, note });
    this.dirtyFlag = true;
  }

  removeEvent(frame: number, index: number): void {
    const e = this.byFrame.get(frame);
    if (e && index >= 0 && index < e.events.length) {
      e.events.splice(index, 1);
      this.dirtyFlag = true;
    }
  }

  marksFor(frame: number): MarkJson[] {
    return this.byFrame.get(frame)?.marks.map((m) => ({ ...m })) ?? [];
  }

  /** Canonical annotation list: sorted by frame, empty frames omitted. */
  toPayload(): AnnotationJson[] {
    const frames = Array.from(this.byFrame.keys()).sort((a, b) => a - b);
    const out: AnnotationJson[] = [];
    for (const f of frames) {
      const e = this.byFrame.get(f)!;
      if (isEmpty(e)) continue;
      out.push({
        frame_index: f,
        marks: e.marks.map((m) => ({ ...m })),
        ref_width_px: e.refWidthPx,
        events: e.events.map((ev) => ({ ...ev })),
      });
    }
    return out;
  }
}

/** Quad corner editing with undo (corner drags are frequent and fat-fingered). */
export class QuadHistory {
  private quad: QuadJson;
  private undoStack: QuadJson[] = [];
  private readonly limit: number;

  constructor(initial: QuadJson, limit = 100) {
    this.quad = cloneQuad(initial);
    this.limit = limit;
  }

  current(): QuadJson {
    return cloneQuad(this.quad);
  }

  corner(index: number): Point {
    const [x, y] = this.quad[index];
    return { x, y };
  }

  moveCorner(index: number, p: Point): void {
    if (index < 0 || index > 3) {
      throw new RangeError(`corner index must be 0..3, got ${index}`);
    }
    this.undoStack.push(cloneQuad(this.quad));
    if (this.undoStack.length > this.limit) this.undoStack.shift();
    this.quad[index] = [p.x, p.y];
  }

  replace(quad: QuadJson): void {
    this.undoStack.push(cloneQuad(this.quad));
    if (this.undoStack.length > this.limit) this.undoStack.shift();
    this.quad = cloneQuad(quad);
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (prev === undefined) return false;
    this.quad = prev;
    return true;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }
}

function cloneQuad(q: QuadJson): QuadJson {
  return [[...q[0]], [...q[1]], [...q[2]], [...q[3]]];
}

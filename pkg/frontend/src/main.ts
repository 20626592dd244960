/**
 * Annotation UI: frame viewer with zoom/pan, mark/width/corner tools, event
 * tagging, and a live trajectory panel.  All domain math happens server-side;
 * this file only maps between canvas and image pixels and talks HTTP.
 */

import { ApiError, TrajexClient } from "./api.js";
import { AnnotationStore, QuadHistory } from "./state.js";
import { ViewTransform, distance } from "./viewTransform.js";
import type {
  EventJson,
  Point,
  ProjectInfo,
  QuadJson,
  TraceDocument,
} from "./types.js";

type Tool = "mark" | "width" | "corner" | "pan";

const OBJECT_COLORS = ["#e4572e", "#17bebb", "#ffc914", "#76b041", "#b36ae2", "#f45b69"];
const CORNER_HIT_RADIUS = 8;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

class App {
  private client: TrajexClient;

  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private statusEl: HTMLElement;
  private frameLabel: HTMLElement;
  private widthLabel: HTMLElement;
  private objectSelect: HTMLSelectElement;
  private toolButtons = new Map<Tool, HTMLButtonElement>();
  private eventList: HTMLElement;
  private trajectoryHost: HTMLElement;
  private rectifiedToggle: HTMLInputElement;

  private info: ProjectInfo | null = null;
  private store = new AnnotationStore();
  private quadHistory: QuadHistory | null = null;
  private view = ViewTransform.identity();
  private frame = 1;
  private tool: Tool = "mark";
  private frameImage: HTMLImageElement | null = null;

  private widthFirstClick: Point | null = null;
  private draggingCorner = -1;
  private panning = false;
  private lastPointer: Point = { x: 0, y: 0 };

  constructor(root: HTMLElement, baseUrl: string) {
    this.client = new TrajexClient(baseUrl);

    const toolbar = el("div", "toolbar");
    const projectSelect = el("select");
    projectSelect.id = "project-select";
    toolbar.appendChild(projectSelect);

    this.objectSelect = el("select");
    toolbar.appendChild(this.objectSelect);

    for (const tool of ["mark", "width", "corner", "pan"] as Tool[]) {
      const btn = el("button", "tool", tool);
      btn.addEventListener("click", () => this.setTool(tool));
      this.toolButtons.set(tool, btn);
      toolbar.appendChild(btn);
    }

    const prev = el("button", "", "◀ frame");
    prev.addEventListener("click", () => this.gotoFrame(this.frame - 1));
    const next = el("button", "", "frame ▶");
    next.addEventListener("click", () => this.gotoFrame(this.frame + 1));
    this.frameLabel = el("span", "frame-label", "–");
    toolbar.append(prev, this.frameLabel, next);

    this.rectifiedToggle = el("input");
    this.rectifiedToggle.type = "checkbox";
    this.rectifiedToggle.id = "rectified-toggle";
    const rectLabel = el("label", "", "rectified");
    rectLabel.htmlFor = this.rectifiedToggle.id;
    rectLabel.prepend(this.rectifiedToggle);
    this.rectifiedToggle.addEventListener("change", () => void this.loadFrameImage());
    toolbar.appendChild(rectLabel);

    const save = el("button", "primary", "save");
    save.addEventListener("click", () => void this.save());
    const traceBtn = el("button", "", "trace");
    traceBtn.addEventListener("click", () => void this.refreshTrace());
    const undoBtn = el("button", "", "undo corner");
    undoBtn.addEventListener("click", () => void this.undoCorner());
    toolbar.append(save, traceBtn, undoBtn);

    for (const kind of ["horn", "lights", "brake"] as EventJson["type"][]) {
      const btn = el("button", "event", `+${kind}`);
      btn.addEventListener("click", () => {
        this.store.addEvent(this.frame, kind);
        this.renderSidebar();
        this.draw();
      });
      toolbar.appendChild(btn);
    }

    this.statusEl = el("div", "status");
    this.widthLabel = el("span", "width-label");
    toolbar.appendChild(this.widthLabel);

    this.canvas = el("canvas");
    this.canvas.width = 960;
    this.canvas.height = 640;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;

    const main = el("div", "main");
    const viewer = el("div", "viewer");
    viewer.appendChild(this.canvas);
    const sidebar = el("div", "sidebar");
    this.eventList = el("div", "events");
    this.trajectoryHost = el("div", "trajectory");
    sidebar.append(el("h3", "", "events"), this.eventList, el("h3", "", "trajectories"), this.trajectoryHost);
    main.append(viewer, sidebar);
    root.append(toolbar, main, this.statusEl);

    this.canvas.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    this.canvas.addEventListener("pointermove", (e) => this.onPointerMove(e));
    window.addEventListener("pointerup", () => this.onPointerUp());
    this.canvas.addEventListener(
      "wheel",
      (e) => {
        e.preventDefault();
        const p = this.canvasPoint(e);
        this.view = this.view.zoomAt(p, e.deltaY < 0 ? 1.25 : 0.8);
        this.draw();
      },
      { passive: false },
    );
    window.addEventListener("keydown", (e) => {
      if (e.key === "ArrowRight") this.gotoFrame(this.frame + 1);
      else if (e.key === "ArrowLeft") this.gotoFrame(this.frame - 1);
      else if (e.key === "z" && (e.ctrlKey || e.metaKey)) void this.undoCorner();
    });

    projectSelect.addEventListener("change", () => void this.openProject(projectSelect.value));
    void this.bootstrap(projectSelect);
  }

  private setStatus(text: string, isError = false): void {
    this.statusEl.textContent = text;
    this.statusEl.classList.toggle("error", isError);
  }

  private async bootstrap(projectSelect: HTMLSelectElement): Promise<void> {
    try {
      const entries = await this.client.listProjects();
      for (const entry of entries) {
        const opt = el("option", "", entry.status === "ok" ? entry.id : `${entry.id} (broken)`);
        opt.value = entry.id;
        opt.disabled = entry.status !== "ok";
        projectSelect.appendChild(opt);
      }
      const first = entries.find((p) => p.status === "ok");
      if (first) {
        projectSelect.value = first.id;
        await this.openProject(first.id);
      } else {
        this.setStatus("no loadable projects on the server", true);
      }
    } catch (err) {
      this.setStatus(`cannot reach server: ${String(err)}`, true);
    }
  }

  private async openProject(id: string): Promise<void> {
    this.info = await this.client.getProject(id);
    const doc = this.info.document;
    this.store = new AnnotationStore(doc.annotations);
    this.quadHistory = new QuadHistory(
      doc.mode === "surveillance"
        ? doc.rectify_src_quad
        : (doc.reference_track?.per_frame_points[String(this.frame)] ?? doc.rectify_src_quad),
    );
    this.objectSelect.replaceChildren();
    doc.objects.forEach((o, i) => {
      const opt = el("option", "", `${o.id} (${o.kind})`);
      opt.value = o.id;
      opt.style.color = OBJECT_COLORS[i % OBJECT_COLORS.length];
      this.objectSelect.appendChild(opt);
    });
    this.frame = 1;
    this.view = ViewTransform.fitToView(
      this.info.frame_width,
      this.info.frame_height,
      this.canvas.width,
      this.canvas.height,
    );
    this.setStatus(`loaded ${id} (revision ${this.info.revision})`);
    await this.loadFrameImage();
    this.renderSidebar();
    void this.refreshTrace();
  }

  private async loadFrameImage(): Promise<void> {
    if (!this.info) return;
    const url = this.client.frameImageUrl(this.info.id, this.frame, this.rectifiedToggle.checked);
    const img = new Image();
    await new Promise<void>((resolve, reject) => {
      img.onload = () => resolve();
      img.onerror = () => reject(new Error(`failed to load ${url}`));
      img.src = url;
    }).catch((err) => this.setStatus(String(err), true));
    this.frameImage = img;
    this.frameLabel.textContent = `${this.frame} / ${this.info.frame_count}`;
    this.draw();
  }

  private gotoFrame(n: number): void {
    if (!this.info) return;
    const clamped = Math.min(this.info.frame_count, Math.max(1, n));
    if (clamped === this.frame) return;
    this.frame = clamped;
    this.widthFirstClick = null;
    void this.loadFrameImage();
    this.renderSidebar();
  }

  private setTool(tool: Tool): void {
    this.tool = tool;
    this.widthFirstClick = null;
    for (const [name, btn] of this.toolButtons) {
      btn.classList.toggle("active", name === tool);
    }
  }

  private canvasPoint(e: MouseEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private currentQuad(): QuadJson | null {
    return this.quadHistory ? this.quadHistory.current() : null;
  }

  private onPointerDown(e: PointerEvent): void {
    if (!this.info) return;
    const canvasP = this.canvasPoint(e);
    const imageP = this.view.canvasToImage(canvasP);
    this.lastPointer = canvasP;

    if (this.tool === "pan" || e.button === 1) {
      this.panning = true;
      return;
    }

    if (this.tool === "corner") {
      const quad = this.currentQuad();
      if (!quad) return;
      for (let i = 0; i < 4; i++) {
        const cornerCanvas = this.view.imageToCanvas({ x: quad[i][0], y: quad[i][1] });
        if (distance(cornerCanvas, canvasP) <= CORNER_HIT_RADIUS) {
          this.draggingCorner = i;
          return;
        }
      }
      return;
    }

    if (!ViewTransform.insideImage(imageP, this.info.frame_width, this.info.frame_height)) {
      this.setStatus("click outside the image ignored");
      return;
    }

    if (this.tool === "mark") {
      const objectId = this.objectSelect.value;
      if (!objectId) return;
      this.store.setMark(this.frame, objectId, imageP);
      this.setStatus(`marked ${objectId} at (${imageP.x.toFixed(2)}, ${imageP.y.toFixed(2)})`);
      this.draw();
    } else if (this.tool === "width") {
      if (this.widthFirstClick === null) {
        this.widthFirstClick = imageP;
        this.setStatus("width: click the second edge");
      } else {
        const w = this.store.measureRefWidth(this.frame, this.widthFirstClick, imageP);
        this.widthFirstClick = null;
        this.setStatus(`ref width ${w.toFixed(2)} px stored for frame ${this.frame}`);
        this.draw();
      }
    }
  }

  private onPointerMove(e: PointerEvent): void {
    const canvasP = this.canvasPoint(e);
    if (this.panning) {
      this.view = this.view.panBy(canvasP.x - this.lastPointer.x, canvasP.y - this.lastPointer.y);
      this.lastPointer = canvasP;
      this.draw();
      return;
    }
    if (this.draggingCorner >= 0 && this.quadHistory) {
      this.quadHistory.moveCorner(this.draggingCorner, this.view.canvasToImage(canvasP));
      this.draw();
    }
  }

  private onPointerUp(): void {
    const wasDragging = this.draggingCorner >= 0;
    this.panning = false;
    this.draggingCorner = -1;
    if (wasDragging) void this.pushQuad();
  }

  private async pushQuad(): Promise<void> {
    if (!this.info || !this.quadHistory) return;
    const doc = this.info.document;
    try {
      let revision: number;
      if (doc.mode === "surveillance") {
        revision = await this.client.putQuads(
          this.info.id,
          { rectify_src_quad: this.quadHistory.current() },
          this.info.revision,
        );
      } else {
        const track = doc.reference_track;
        if (!track) return;
        const per = { ...track.per_frame_points, [String(this.frame)]: this.quadHistory.current() };
        revision = await this.client.putQuads(
          this.info.id,
          { reference_track: { ...track, per_frame_points: per } },
          this.info.revision,
        );
      }
      this.info.revision = revision;
      this.setStatus(`quad saved (revision ${revision})`);
      if (this.rectifiedToggle.checked) await this.loadFrameImage();
    } catch (err) {
      this.surfaceWriteError(err, "quad rejected");
      this.quadHistory.undo();
      this.draw();
    }
  }

  private async undoCorner(): Promise<void> {
    if (this.quadHistory?.undo()) {
      await this.pushQuad();
      this.draw();
    }
  }

  private async save(): Promise<void> {
    if (!this.info) return;
    try {
      const revision = await this.client.putAnnotations(
        this.info.id,
        this.store.toPayload(),
        this.info.revision,
      );
      this.info.revision = revision;
      this.store.markSaved();
      this.setStatus(`saved (revision ${revision})`);
    } catch (err) {
      this.surfaceWriteError(err, "save rejected");
    }
  }

  private surfaceWriteError(err: unknown, prefix: string): void {
    if (err instanceof ApiError && err.status === 409) {
      this.setStatus(
        `${prefix}: another editor moved the project to revision ${err.currentRevision}; reload to continue`,
        true,
      );
    } else if (err instanceof ApiError) {
      this.setStatus(`${prefix}: ${err.detail}`, true);
    } else {
      this.setStatus(`${prefix}: ${String(err)}`, true);
    }
  }

  private async refreshTrace(): Promise<void> {
    if (!this.info) return;
    try {
      const doc = await this.client.trace(this.info.id);
      this.renderTrajectories(doc);
    } catch (err) {
      if (err instanceof ApiError && err.report) {
        const list = el("ul", "findings");
        for (const f of err.report.findings) {
          list.appendChild(el("li", f.severity, `${f.severity}: ${f.code} - ${f.detail}`));
        }
        this.trajectoryHost.replaceChildren(list);
      } else {
        this.trajectoryHost.replaceChildren(el("p", "error", String(err)));
      }
    }
  }

  private renderTrajectories(doc: TraceDocument): void {
    const width = 280;
    const height = 280;
    const pts = doc.trajectories.flatMap((t) => t.points);
    if (pts.length === 0) {
      this.trajectoryHost.replaceChildren(el("p", "", "no trajectory points"));
      return;
    }
    const xs = pts.map((p) => p.x_m).concat([0]);
    const ys = pts.map((p) => p.y_m).concat([0]);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    const span = Math.max(maxX - minX, maxY - minY, 1e-9);
    const scale = (width - 40) / span;
    const toSvg = (p: { x_m: number; y_m: number }) => ({
      x: 20 + (p.x_m - minX) * scale,
      y: height - 20 - (p.y_m - minY) * scale,
    });

    const ns = "http://www.w3.org/2000/svg";
    const svg = document.createElementNS(ns, "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);

    doc.trajectories.forEach((traj, i) => {
      const path = document.createElementNS(ns, "polyline");
      path.setAttribute(
        "points",
        traj.points.map((p) => { const s = toSvg(p); return `${s.x},${s.y}`; }).join(" "),
      );
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", OBJECT_COLORS[i % OBJECT_COLORS.length]);
      if (traj.approximate) path.setAttribute("stroke-dasharray", "4 3");
      svg.appendChild(path);
    });

    const origin = toSvg({ x_m: 0, y_m: 0 });
    const hit = document.createElementNS(ns, "circle");
    hit.setAttribute("cx", String(origin.x));
    hit.setAttribute("cy", String(origin.y));
    hit.setAttribute("r", "4");
    hit.setAttribute("fill", "#222");
    svg.appendChild(hit);

    const caption = el(
      "p",
      "caption",
      doc.hit_frame === null
        ? "no hit frame"
        : `hit (0, 0) @ frame ${doc.hit_frame}${doc.hit_frame_inferred ? " (inferred)" : ""}`,
    );
    this.trajectoryHost.replaceChildren(svg, caption);
  }

  private renderSidebar(): void {
    this.eventList.replaceChildren();
    const events = this.store.eventsFor(this.frame);
    events.forEach((ev, i) => {
      const row = el("div", "event-row", `${ev.type}${ev.note ? ` — ${ev.note}` : ""}`);
      const del = el("button", "small", "×");
      del.addEventListener("click", () => {
        this.store.removeEvent(this.frame, i);
        this.renderSidebar();
      });
      row.appendChild(del);
      this.eventList.appendChild(row);
    });
    const w = this.store.refWidthFor(this.frame);
    this.widthLabel.textContent = w === null ? "" : `ref width: ${w.toFixed(2)} px`;
  }

  private draw(): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#1b1d21";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.info || !this.frameImage) return;

    ctx.save();
    ctx.imageSmoothingEnabled = this.view.scale < 1;
    ctx.setTransform(this.view.scale, 0, 0, this.view.scale, this.view.tx, this.view.ty);
    ctx.drawImage(this.frameImage, 0, 0);
    ctx.restore();

    if (!this.rectifiedToggle.checked) {
      const quad = this.currentQuad();
      if (quad) this.drawQuad(quad);
      this.drawMarks();
    }
  }

  private drawQuad(quad: QuadJson): void {
    const ctx = this.ctx;
    ctx.strokeStyle = "#ffd166";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    quad.forEach(([x, y], i) => {
      const c = this.view.imageToCanvas({ x, y });
      if (i === 0) ctx.moveTo(c.x, c.y);
      else ctx.lineTo(c.x, c.y);
    });
    ctx.closePath();
    ctx.stroke();
    for (const [x, y] of quad) {
      const c = this.view.imageToCanvas({ x, y });
      ctx.fillStyle = "#ffd166";
      ctx.fillRect(c.x - 3, c.y - 3, 6, 6);
    }
  }

  private drawMarks(): void {
    if (!this.info) return;
    const ctx = this.ctx;
    const ids = this.info.document.objects.map((o) => o.id);
    for (const mark of this.store.marksFor(this.frame)) {
      const c = this.view.imageToCanvas({ x: mark.x, y: mark.y });
      const color = OBJECT_COLORS[Math.max(0, ids.indexOf(mark.object_id)) % OBJECT_COLORS.length];
      ctx.strokeStyle = color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(c.x, c.y, 5, 0, Math.PI * 2);
      ctx.stroke();
      ctx.beginPath();
      ctx.moveTo(c.x - 8, c.y);
      ctx.lineTo(c.x + 8, c.y);
      ctx.moveTo(c.x, c.y - 8);
      ctx.lineTo(c.x, c.y + 8);
      ctx.stroke();
      ctx.fillStyle = color;
      ctx.fillText(mark.object_id, c.x + 10, c.y - 10);
    }
  }
}

const root = document.getElementById("app");
if (root) {
  const base = new URLSearchParams(window.location.search).get("server") ?? "http://127.0.0.1:8000";
  new App(root, base);
}

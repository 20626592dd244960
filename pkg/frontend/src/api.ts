/**
 * Typed client for the trajex annotation server.
 *
 * All writes go through PUT with an `Expected-Revision` header; the server
 * answers 409 with its current revision when the expectation is stale, and
 * 422 with a field path (or a validation report) when the body is invalid.
 * Non-2xx responses surface as `ApiError` so callers can branch on status.
 */

import type {
  AnnotationJson,
  ProjectInfo,
  ProjectListEntry,
  QuadUpdate,
  TraceDocument,
  ValidationReportJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly body: unknown = null,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }

  /** Server's current revision, present on 409 conflict responses. */
  get currentRevision(): number | null {
    const b = this.body;
    if (typeof b === "object" && b !== null && "revision" in b) {
      const rev = (b as { revision: unknown }).revision;
      if (typeof rev === "number") return rev;
    }
    return null;
  }

  /** Validation report attached to 422 trace rejections, if any. */
  get report(): ValidationReportJson | null {
    const b = this.body;
    if (typeof b === "object" && b !== null && "report" in b) {
      return (b as { report: ValidationReportJson }).report;
    }
    return null;
  }
}

async function errorFrom(res: Response): Promise<ApiError> {
  let body: unknown = null;
  let detail = res.statusText || `status ${res.status}`;
  try {
    body = await res.json();
    if (typeof body === "object" && body !== null && "detail" in body) {
      detail = String((body as { detail: unknown }).detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, detail, body);
}

export class TrajexClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`);
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as T;
  }

  private async putJson<T>(path: string, body: unknown, expectedRevision: number): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`, {
      method: "PUT",
      headers: {
        "Content-Type": "application/json",
        "Expected-Revision": String(expectedRevision),
      },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as T;
  }

  async health(): Promise<string> {
    const res = await fetch(`${this.baseUrl}/healthz`);
    if (!res.ok) throw await errorFrom(res);
    return res.text();
  }

  listProjects(): Promise<ProjectListEntry[]> {
    return this.getJson("/projects");
  }

  getProject(id: string): Promise<ProjectInfo> {
    return this.getJson(`/projects/${encodeURIComponent(id)}`);
  }

  frameImageUrl(id: string, frame: number, rectified = false): string {
    const suffix = rectified ? "?rectified=true" : "";
    return `${this.baseUrl}/projects/${encodeURIComponent(id)}/frames/${frame}/image${suffix}`;
  }

  /** Replace the full annotation list; resolves to the new revision. */
  async putAnnotations(
    id: string,
    annotations: AnnotationJson[],
    expectedRevision: number,
  ): Promise<number> {
    const out = await this.putJson<{ revision: number }>(
      `/projects/${encodeURIComponent(id)}/annotations`,
      annotations,
      expectedRevision,
    );
    return out.revision;
  }

  /** Update rectification quads / reference track; resolves to the new revision. */
  async putQuads(id: string, update: QuadUpdate, expectedRevision: number): Promise<number> {
    const out = await this.putJson<{ revision: number }>(
      `/projects/${encodeURIComponent(id)}/quads`,
      update,
      expectedRevision,
    );
    return out.revision;
  }

  async trace(id: string): Promise<TraceDocument> {
    const res = await fetch(`${this.baseUrl}/projects/${encodeURIComponent(id)}/trace`, {
      method: "POST",
    });
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as TraceDocument;
  }
}

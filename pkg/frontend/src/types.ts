/** JSON shapes exchanged with the trajex annotation server. */

export interface Point {
  x: number;
  y: number;
}

/** Wire form of a point inside quads: a two-element [x, y] array. */
export type XY = [number, number];

export type QuadJson = [XY, XY, XY, XY];

export interface MarkJson {
  object_id: string;
  x: number;
  y: number;
}

export interface EventJson {
  type: "horn" | "lights" | "brake";
  note: string;
}

export interface AnnotationJson {
  frame_index: number;
  marks: MarkJson[];
  ref_width_px: number | null;
  events: EventJson[];
}

export interface ObjectJson {
  id: string;
  kind: "vehicle" | "pedestrian" | "other";
  primary_direction: "longitudinal" | "lateral";
}

export interface ReferenceTrackJson {
  target_frame: number;
  target_points: QuadJson;
  per_frame_points: Record<string, QuadJson>;
}

export interface ProjectDocument {
  id: string;
  mode: "surveillance" | "recorder";
  fps: number;
  frame_dir: string;
  real_reference_width_m: number | null;
  real_road_width_m: number | null;
  rectify_src_quad: QuadJson;
  rectify_dst_rect: QuadJson;
  flip_y: boolean;
  objects: ObjectJson[];
  hit: { frame_index: number; object_id: string | null } | null;
  reference_track: ReferenceTrackJson | null;
  annotations: AnnotationJson[];
}

export interface ProjectInfo {
  id: string;
  revision: number;
  frame_count: number;
  frame_width: number;
  frame_height: number;
  document: ProjectDocument;
}

export interface ProjectListEntry {
  id: string;
  status: "ok" | "error";
  mode?: "surveillance" | "recorder";
  frame_count?: number;
  revision?: number;
  detail?: string;
}

export interface QuadUpdate {
  rectify_src_quad?: QuadJson;
  rectify_dst_rect?: QuadJson;
  reference_track?: ReferenceTrackJson;
}

export interface TracePointJson {
  frame_index: number;
  time_s: number;
  x_m: number;
  y_m: number;
  speed_mps: number;
  heading_rad: number;
}

export interface TrajectoryJson {
  object_id: string;
  kind: string;
  primary_direction: string;
  approximate: boolean;
  points: TracePointJson[];
}

export interface TraceDocument {
  project_id: string;
  mode: string;
  fps: number;
  hit_frame: number | null;
  hit_frame_inferred: boolean;
  hit_object_id: string | null;
  ratio_model: { r1: number; q: number; n_frames: number } | null;
  lateral_ratio_m_per_px: number | null;
  events: { frame_index: number; type: string; note: string }[];
  trajectories: TrajectoryJson[];
}

export interface ValidationReportJson {
  findings: { severity: string; code: string; detail: string }[];
}

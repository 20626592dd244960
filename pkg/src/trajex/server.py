"""Annotation HTTP service.

Serves frames and rectified previews, accepts whole-document annotation
writes guarded by an optimistic revision check, and computes trajectories on
demand.  Every accepted write is saved durably (atomic replace) before the
2xx response, so a restart reproduces the written state.  Writes are
serialized per project; the revision counter strictly increases and is the
concurrency contract for clients.
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .errors import TrajexError
from .project import (
    FrameSequence,
    Project,
    _parse_reference_track,
    _quad,
    ingest_frames,
    load_project,
    parse_annotations,
    project_document,
    save_project,
)
from .stabilize import register_to_target_frame
from .trace import run_trace, trace_json_bytes
from .warp import (
    Image,
    RectifySpec,
    canvas_for_quad,
    rectification_from_lane_quad,
    rectify_image,
)

_PREVIEW_CACHE_MAX = 64


class ProjectState:
    """One served project: document, annotations, frames, revision, lock."""

    def __init__(self, project, annotations, sequence: FrameSequence, path: Path):
        self.lock = threading.Lock()
        self.revision = 1
        self.project = project
        self.annotations = list(annotations)
        self.sequence = sequence
        self.path = path
        self.preview_cache: OrderedDict[tuple, bytes] = OrderedDict()

    def snapshot(self):
        with self.lock:
            return self.project, list(self.annotations), self.revision


def _scan_projects(root: Path) -> tuple[dict[str, ProjectState], dict[str, str]]:
    states: dict[str, ProjectState] = {}
    errors: dict[str, str] = {}
    candidates: list[Path]
    if (root / "project.json").is_file():
        candidates = [root / "project.json"]
    elif root.is_dir():
        candidates = sorted(
            child / "project.json" for child in root.iterdir() if child.is_dir()
        )
    else:
        candidates = []
    for path in candidates:
        if not path.is_file():
            continue
        name = path.parent.name
        try:
            project, annotations = load_project(path)
            sequence = ingest_frames(project.resolved_frame_dir())
        except Exception as e:  # listed, not fatal: one bad project must not sink the rest
            errors[name] = str(e)
            continue
        if project.id in states:
            errors[name] = f"duplicate project id {project.id!r}"
            continue
        states[project.id] = ProjectState(project, annotations, sequence, path)
    return states, errors


def _quad_key(project: Project) -> tuple:
    if project.mode == "surveillance":
        return (
            tuple((p.x, p.y) for p in project.rectify_src_quad),
            tuple((p.x, p.y) for p in project.rectify_dst_rect),
        )
    rt = project.reference_track
    return (
        rt.target_frame,
        tuple((p.x, p.y) for p in rt.target_points),
        tuple(
            (f, tuple((p.x, p.y) for p in quad))
            for f, quad in sorted(rt.per_frame_points.items())
        ),
    )


def create_app(project_dir: str | Path, cors_origins: str = "*") -> FastAPI:
    root = Path(project_dir)
    states, load_errors = _scan_projects(root)

    app = FastAPI(title="trajex annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origins] if cors_origins else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["*"],
    )
    app.state.projects = states
    app.state.load_errors = load_errors

    def _get_state(pid: str) -> ProjectState | None:
        return states.get(pid)

    @app.get("/healthz")
    def healthz():
        return PlainTextResponse("ok")

    @app.get("/projects")
    def list_projects():
        entries = []
        for pid in sorted(states):
            st = states[pid]
            project, _, revision = st.snapshot()
            entries.append(
                {
                    "id": pid,
                    "status": "ok",
                    "mode": project.mode,
                    "frame_count": len(st.sequence),
                    "revision": revision,
                }
            )
        for name in sorted(load_errors):
            entries.append({"id": name, "status": "error", "detail": load_errors[name]})
        return JSONResponse(entries)

    @app.get("/projects/{pid}")
    def get_project(pid: str):
        st = _get_state(pid)
        if st is None:
            return JSONResponse({"detail": f"unknown project {pid!r}"}, status_code=404)
        project, annotations, revision = st.snapshot()
        return JSONResponse(
            {
                "id": pid,
                "revision": revision,
                "frame_count": len(st.sequence),
                "frame_width": st.sequence.width,
                "frame_height": st.sequence.height,
                "document": project_document(project, annotations),
            }
        )

    @app.get("/projects/{pid}/frames/{n}/image")
    def get_frame_image(pid: str, n: int, rectified: bool = False):
        st = _get_state(pid)
        if st is None:
            return JSONResponse({"detail": f"unknown project {pid!r}"}, status_code=404)
        if not 1 <= n <= len(st.sequence):
            return JSONResponse({"detail": f"unknown frame {n}"}, status_code=404)
        raw = st.sequence.path_for(n).read_bytes()
        if not rectified:
            return Response(content=raw, media_type="image/png")

        project, _, revision = st.snapshot()
        try:
            if project.mode == "surveillance":
                h = rectification_from_lane_quad(
                    project.rectify_src_quad, project.rectify_dst_rect
                )
                out_w, out_h = canvas_for_quad(project.rectify_dst_rect)
            else:
                registrations = register_to_target_frame(project.reference_track)
                if n not in registrations:
                    return JSONResponse(
                        {"detail": f"frame {n} has no reference points"}, status_code=409
                    )
                h = registrations[n]
                out_w, out_h = st.sequence.width, st.sequence.height
        except TrajexError as e:
            return JSONResponse({"detail": str(e)}, status_code=409)

        if h.is_identity() and (out_w, out_h) == (st.sequence.width, st.sequence.height):
            return Response(content=raw, media_type="image/png")

        key = (revision, n, _quad_key(project))
        with st.lock:
            cached = st.preview_cache.get(key)
        if cached is None:
            img = Image.load(st.sequence.path_for(n))
            spec = RectifySpec(h=h, out_width=out_w, out_height=out_h, fill=0)
            cached = rectify_image(img, spec).png_bytes()
            with st.lock:
                st.preview_cache[key] = cached
                while len(st.preview_cache) > _PREVIEW_CACHE_MAX:
                    st.preview_cache.popitem(last=False)
        return Response(content=cached, media_type="image/png")

    @app.put("/projects/{pid}/annotations")
    async def put_annotations(pid: str, request: Request):
        st = _get_state(pid)
        if st is None:
            return JSONResponse({"detail": f"unknown project {pid!r}"}, status_code=404)
        expected = request.headers.get("Expected-Revision")
        if expected is None or not expected.isdigit():
            return JSONResponse(
                {"detail": "Expected-Revision header (integer) required"},
                status_code=400,
            )
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as e:
            return JSONResponse({"detail": f"body is not valid JSON: {e}"}, status_code=422)
        try:
            annotations = parse_annotations(payload)
        except TrajexError as e:
            return JSONResponse({"detail": str(e)}, status_code=422)

        with st.lock:
            if int(expected) != st.revision:
                return JSONResponse(
                    {
                        "detail": f"revision mismatch: expected {expected}, "
                        f"current {st.revision}",
                        "revision": st.revision,
                    },
                    status_code=409,
                )
            try:
                save_project(st.project, annotations, st.path)
            except OSError as e:
                return JSONResponse({"detail": f"save failed: {e}"}, status_code=500)
            st.annotations = list(annotations)
            st.revision += 1
            return JSONResponse({"revision": st.revision})

    @app.put("/projects/{pid}/quads")
    async def put_quads(pid: str, request: Request):
        st = _get_state(pid)
        if st is None:
            return JSONResponse({"detail": f"unknown project {pid!r}"}, status_code=404)
        expected = request.headers.get("Expected-Revision")
        if expected is None or not expected.isdigit():
            return JSONResponse(
                {"detail": "Expected-Revision header (integer) required"},
                status_code=400,
            )
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as e:
            return JSONResponse({"detail": f"body is not valid JSON: {e}"}, status_code=422)
        if not isinstance(payload, dict):
            return JSONResponse({"detail": "body must be an object"}, status_code=422)

        try:
            updates = {}
            if "rectify_src_quad" in payload:
                updates["rectify_src_quad"] = _quad(
                    payload["rectify_src_quad"], "rectify_src_quad"
                )
            if "rectify_dst_rect" in payload:
                updates["rectify_dst_rect"] = _quad(
                    payload["rectify_dst_rect"], "rectify_dst_rect"
                )
            if "reference_track" in payload:
                updates["reference_track"] = _parse_reference_track(
                    payload["reference_track"], "reference_track"
                )
            if not updates:
                return JSONResponse({"detail": "no quad fields in body"}, status_code=422)
            with st.lock:
                if int(expected) != st.revision:
                    return JSONResponse(
                        {
                            "detail": f"revision mismatch: expected {expected}, "
                            f"current {st.revision}",
                            "revision": st.revision,
                        },
                        status_code=409,
                    )
                updated = replace(st.project, **updates)
                save_project(updated, st.annotations, st.path)
                st.project = updated
                st.revision += 1
                return JSONResponse({"revision": st.revision})
        except TrajexError as e:
            return JSONResponse({"detail": str(e)}, status_code=422)
        except OSError as e:
            return JSONResponse({"detail": f"save failed: {e}"}, status_code=500)

    @app.post("/projects/{pid}/trace")
    def post_trace(pid: str):
        st = _get_state(pid)
        if st is None:
            return JSONResponse({"detail": f"unknown project {pid!r}"}, status_code=404)
        project, annotations, _ = st.snapshot()
        try:
            report, result = run_trace(project, annotations, st.sequence)
        except TrajexError as e:
            return JSONResponse({"detail": str(e)}, status_code=422)
        if result is None:
            return JSONResponse(
                {"detail": "validation failed", "report": report.to_json()},
                status_code=422,
            )
        return Response(content=trace_json_bytes(result), media_type="application/json")

    return app

"""Batch command-line pipeline.

Subcommands: rectify (warp frames to the working view), trace (compute and
write trajectory JSON), export (trajectory JSON to CSV), plot (trajectory
JSON to SVG), serve (run the annotation HTTP service).

Exit codes: 0 success, 1 validation/domain error, 2 I/O or environment error.
Log verbosity comes from the TRAJEX_LOG environment variable
(error|warn|info|debug, default warn).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import socket
import sys
from pathlib import Path

from .errors import ParseError, TrajexError
from .plotting import STYLES, trace_svg
from .project import (
    FrameSequence,
    Project,
    frame_file_name,
    ingest_frames,
    load_project,
)
from .stabilize import register_to_target_frame
from .trace import run_trace, trace_document_to_csv, trace_json_bytes
from .warp import (
    Image,
    RectifySpec,
    canvas_for_quad,
    rectification_from_lane_quad,
    rectify_image,
)

log = logging.getLogger("trajex")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_RANGE_RE = re.compile(r"^(\d+)\.\.(\d+)$")


def _parse_frame_range(text: str) -> tuple[int, int]:
    m = _RANGE_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(
            f"frame range must look like A..B, got {text!r}"
        )
    a, b = int(m.group(1)), int(m.group(2))
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError(f"invalid frame range {text!r}")
    return a, b


def _parse_bind(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(
            f"bind address must look like HOST:PORT, got {text!r}"
        )
    return host or "127.0.0.1", int(port)


def configure_logging(env: dict | None = None) -> None:
    env = os.environ if env is None else env
    name = env.get("TRAJEX_LOG", "warn").lower()
    level = _LOG_LEVELS.get(name)
    if level is None:
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger("trajex").setLevel(level)
    if name not in _LOG_LEVELS and name != "warn":
        log.warning("unknown TRAJEX_LOG value %r; using warn", name)


def dst_rect_canvas(project: Project) -> tuple[int, int]:
    """Output canvas (width, height) covering the rectified destination rect."""
    return canvas_for_quad(project.rectify_dst_rect)


def _load_sequence(project: Project) -> FrameSequence:
    return ingest_frames(project.resolved_frame_dir())


def cmd_rectify(args) -> int:
    project, _ = load_project(args.project)
    sequence = _load_sequence(project)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lo, hi = args.frames if args.frames else (1, len(sequence))
    hi = min(hi, len(sequence))
    if lo > len(sequence):
        raise TrajexError(
            f"frame range starts at {lo} but sequence has {len(sequence)} frames"
        )

    if project.mode == "surveillance":
        h = rectification_from_lane_quad(project.rectify_src_quad, project.rectify_dst_rect)
        out_w, out_h = dst_rect_canvas(project)
        per_frame = {i: h for i in range(lo, hi + 1)}
    else:
        registrations = register_to_target_frame(project.reference_track)
        out_w, out_h = sequence.width, sequence.height
        per_frame = {}
        for i in range(lo, hi + 1):
            if i in registrations:
                per_frame[i] = registrations[i]
            else:
                log.warning("frame %d has no reference points; skipping", i)

    written = 0
    for i in range(lo, hi + 1):
        if i not in per_frame:
            continue
        src_path = sequence.path_for(i)
        dst_path = out_dir / frame_file_name(i)
        h = per_frame[i]
        if h.is_identity() and (out_w, out_h) == (sequence.width, sequence.height):
            dst_path.write_bytes(src_path.read_bytes())
        else:
            img = Image.load(src_path)
            spec = RectifySpec(h=h, out_width=out_w, out_height=out_h, fill=args.fill)
            rectify_image(img, spec, workers=args.workers).save_png(dst_path)
        written += 1
        log.info("rectified %s -> %s", src_path.name, dst_path)
    log.info("wrote %d frames to %s", written, out_dir)
    return 0


def cmd_trace(args) -> int:
    project, annotations = load_project(args.project)
    sequence = _load_sequence(project)
    report, result = run_trace(project, annotations, sequence)
    for line in report.render().splitlines():
        print(line, file=sys.stderr)
    if result is None:
        return 1
    Path(args.out).write_bytes(trace_json_bytes(result))
    log.info("wrote trajectories for %d objects to %s", len(result.trajectories), args.out)
    return 0


def _read_trace_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(doc, dict) or "trajectories" not in doc:
        raise ParseError(f"{path}: not a trajectory document")
    return doc


def cmd_export(args) -> int:
    doc = _read_trace_document(args.trace)
    Path(args.out).write_text(trace_document_to_csv(doc), encoding="utf-8")
    return 0


def cmd_plot(args) -> int:
    doc = _read_trace_document(args.trace)
    Path(args.out).write_text(trace_svg(doc, style=args.style), encoding="utf-8")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    host, port = args.bind
    # probe the bind address up front so an occupied port is a clean exit 2
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as e:
        print(f"error: cannot bind {host}:{port}: {e}", file=sys.stderr)
        return 2
    finally:
        probe.close()

    app = create_app(args.project_dir, cors_origins=args.cors)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as e:
        print(f"error: server failed: {e}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajex",
        description="Trajectory reconstruction from annotated traffic footage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rectify", help="warp frames into the working (rectified) view")
    p.add_argument("project", help="path to project.json")
    p.add_argument("out_dir", help="directory for rectified frames")
    p.add_argument("--frames", type=_parse_frame_range, default=None, metavar="A..B",
                   help="inclusive frame range (default: all)")
    p.add_argument("--fill", type=int, default=0, help="fill value for unmapped pixels")
    p.add_argument("--workers", type=int, default=1, help="worker threads per frame")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("trace", help="compute trajectories and write trajectory JSON")
    p.add_argument("project", help="path to project.json")
    p.add_argument("out", help="output trajectory JSON path")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("export", help="convert trajectory JSON to CSV")
    p.add_argument("trace", help="trajectory JSON path")
    p.add_argument("out", help="output CSV path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("plot", help="render trajectory JSON to SVG")
    p.add_argument("trace", help="trajectory JSON path")
    p.add_argument("out", help="output SVG path")
    p.add_argument("--style", choices=STYLES, default="points")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("project_dir", help="directory containing project subdirectories")
    p.add_argument("--bind", type=_parse_bind, default=("127.0.0.1", 8765),
                   metavar="HOST:PORT")
    p.add_argument("--cors", default="*", help="allowed CORS origin (default: any)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrajexError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()

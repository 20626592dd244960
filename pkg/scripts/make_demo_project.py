#!/usr/bin/env python3
"""Generate synthetic demo projects for manual exploration.

Writes one subdirectory per scene (frames plus project.json with
programmatic annotations), ready for the CLI or the annotation server:

    python3 scripts/make_demo_project.py demo/
    trajex trace demo/fronto/project.json demo/fronto_trace.json
    trajex serve demo/ --bind 127.0.0.1:8765
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from trajex.synthetic import make_fronto_scene, make_oblique_scene, make_recorder_scene


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", help="directory to create the demo projects in")
    parser.add_argument(
        "--scenes",
        nargs="+",
        choices=("fronto", "oblique", "recorder"),
        default=["fronto", "oblique", "recorder"],
        help="which scenes to generate (default: all)",
    )
    parser.add_argument("--frames", type=int, default=60, help="frames per scene")
    parser.add_argument(
        "--tilt", type=float, default=45.0, help="camera tilt for the oblique scene"
    )
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.scenes:
        if name == "fronto":
            scene = make_fronto_scene(out / "fronto", n_frames=args.frames, with_events=True)
        elif name == "oblique":
            scene = make_oblique_scene(out / "oblique", tilt_deg=args.tilt, n_frames=args.frames)
        else:
            scene = make_recorder_scene(out / "recorder", n_frames=min(args.frames, 40))
        objects = ", ".join(sorted(scene.truth)) if scene.truth else "pixel-space objects"
        print(f"{scene.project_path}  ({objects}; hit frame {scene.hit_frame})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

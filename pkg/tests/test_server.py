"""Annotation HTTP service: serving, revision-checked writes, tracing."""

import json

import pytest
from fastapi.testclient import TestClient

from trajex.cli import main as cli_main
from trajex.project import frame_file_name, load_project, parse_project_document
from trajex.server import create_app
from trajex.synthetic import make_fronto_scene, make_recorder_scene

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def build_root(tmp, *, with_errors=False):
    fronto = make_fronto_scene(tmp / "fronto", n_frames=12)
    recorder = make_recorder_scene(tmp / "recorder", n_frames=8)
    if with_errors:
        broken = tmp / "broken"
        broken.mkdir()
        (broken / "project.json").write_text("{not json")
        (tmp / "no_project_here").mkdir()
        dup = tmp / "zz_duplicate"
        dup.mkdir()
        doc = json.loads(fronto.project_path.read_text())
        doc["frame_dir"] = str(fronto.root / "frames")
        (dup / "project.json").write_text(json.dumps(doc))
    return fronto, recorder


@pytest.fixture(scope="module")
def ro(tmp_path_factory):
    """Read-only client over a multi-project root; no test may write to it."""
    tmp = tmp_path_factory.mktemp("server_ro")
    fronto, recorder = build_root(tmp, with_errors=True)
    client = TestClient(create_app(tmp))
    return client, fronto, recorder


@pytest.fixture()
def rw(tmp_path):
    """Fresh writable root per test."""
    fronto, recorder = build_root(tmp_path)
    client = TestClient(create_app(tmp_path))
    return client, fronto, recorder, tmp_path


# ---------------------------------------------------------------------------
# listing and reading


def test_healthz(ro):
    client, _, _ = ro
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.text == "ok"


def test_projects_listing_includes_errors(ro):
    client, _, _ = ro
    r = client.get("/projects")
    assert r.status_code == 200
    entries = {e["id"]: e for e in r.json()}
    assert entries["fronto"]["status"] == "ok"
    assert entries["fronto"]["mode"] == "surveillance"
    assert entries["fronto"]["frame_count"] == 12
    assert entries["fronto"]["revision"] == 1
    assert entries["recorder"]["mode"] == "recorder"
    assert entries["broken"]["status"] == "error"
    assert "JSON" in entries["broken"]["detail"]
    assert entries["zz_duplicate"]["status"] == "error"
    assert "duplicate" in entries["zz_duplicate"]["detail"]
    assert "no_project_here" not in entries


def test_single_project_root_is_served(tmp_path):
    scene = make_fronto_scene(tmp_path / "only", n_frames=3)
    client = TestClient(create_app(scene.root))
    ids = [e["id"] for e in client.get("/projects").json()]
    assert ids == ["fronto"]


def test_get_project_document(ro):
    client, fronto, _ = ro
    r = client.get("/projects/fronto")
    assert r.status_code == 200
    body = r.json()
    assert body["revision"] == 1
    assert body["frame_count"] == 12
    assert (body["frame_width"], body["frame_height"]) == (160, 200)
    # the embedded document is itself a loadable project document
    project, annotations = parse_project_document(body["document"])
    assert project.id == "fronto"
    assert len(annotations) == 12


def test_get_unknown_project_404(ro):
    client, _, _ = ro
    assert client.get("/projects/nope").status_code == 404
    assert client.put("/projects/nope/annotations", content="[]").status_code == 404
    assert client.post("/projects/nope/trace").status_code == 404


def test_raw_frame_image_bytes(ro):
    client, fronto, _ = ro
    r = client.get("/projects/fronto/frames/3/image")
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"
    expected = (fronto.root / "frames" / frame_file_name(3)).read_bytes()
    assert r.content == expected


def test_frame_image_out_of_range_404(ro):
    client, _, _ = ro
    assert client.get("/projects/fronto/frames/0/image").status_code == 404
    assert client.get("/projects/fronto/frames/13/image").status_code == 404


def test_rectified_identity_returns_raw_bytes(ro):
    client, fronto, _ = ro
    raw = client.get("/projects/fronto/frames/2/image").content
    rect = client.get("/projects/fronto/frames/2/image", params={"rectified": "true"})
    assert rect.status_code == 200
    assert rect.content == raw  # identity rectification short-circuits


def test_rectified_recorder_preview(ro):
    client, _, recorder = ro
    target = client.get(
        "/projects/recorder/frames/8/image", params={"rectified": "true"}
    )
    raw_target = client.get("/projects/recorder/frames/8/image").content
    assert target.content == raw_target  # target frame registers to identity

    moved = client.get("/projects/recorder/frames/2/image", params={"rectified": "true"})
    assert moved.status_code == 200
    assert moved.content.startswith(PNG_MAGIC)
    assert moved.content != client.get("/projects/recorder/frames/2/image").content
    again = client.get("/projects/recorder/frames/2/image", params={"rectified": "true"})
    assert again.content == moved.content


def test_preview_cache_reuses_entries(rw):
    client, _, recorder, _ = rw
    state = client.app.state.projects["recorder"]
    assert len(state.preview_cache) == 0
    client.get("/projects/recorder/frames/2/image", params={"rectified": "true"})
    assert len(state.preview_cache) == 1
    client.get("/projects/recorder/frames/2/image", params={"rectified": "true"})
    assert len(state.preview_cache) == 1
    client.get("/projects/recorder/frames/3/image", params={"rectified": "true"})
    assert len(state.preview_cache) == 2


# ---------------------------------------------------------------------------
# annotation writes


def get_annotations(client, pid):
    return client.get(f"/projects/{pid}").json()["document"]["annotations"]


def test_put_annotations_requires_revision_header(rw):
    client, _, _, _ = rw
    r = client.put("/projects/fronto/annotations", content="[]")
    assert r.status_code == 400
    r = client.put(
        "/projects/fronto/annotations",
        content="[]",
        headers={"Expected-Revision": "soon"},
    )
    assert r.status_code == 400


def test_put_annotations_revision_conflict(rw):
    client, _, _, _ = rw
    r = client.put(
        "/projects/fronto/annotations",
        content="[]",
        headers={"Expected-Revision": "7"},
    )
    assert r.status_code == 409
    assert r.json()["revision"] == 1
    # still at the original annotations
    assert len(get_annotations(client, "fronto")) == 12


def test_put_annotations_rejects_bad_payloads(rw):
    client, _, _, _ = rw
    r = client.put(
        "/projects/fronto/annotations",
        content="{oops",
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 422
    r = client.put(
        "/projects/fronto/annotations",
        content=json.dumps([{"frame_index": 1, "ref_width_px": -3}]),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 422
    assert "annotations[0]" in r.json()["detail"]


def test_put_annotations_round_trip_and_durability(rw):
    client, fronto, _, root = rw
    new_annotations = [
        {
            "frame_index": 1,
            "marks": [{"object_id": "car", "x": 12.5, "y": 30.25}],
            "ref_width_px": 8.0,
            "events": [{"type": "horn", "note": "test"}],
        },
        {
            "frame_index": 2,
            "marks": [{"object_id": "car", "x": 13.5, "y": 28.0}],
        },
    ]
    r = client.put(
        "/projects/fronto/annotations",
        content=json.dumps(new_annotations),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 200
    assert r.json() == {"revision": 2}

    stored = get_annotations(client, "fronto")
    assert len(stored) == 2
    assert stored[0]["marks"][0] == {"object_id": "car", "x": 12.5, "y": 30.25}
    assert stored[0]["events"] == [{"type": "horn", "note": "test"}]

    # sequential write now needs revision 2
    r = client.put(
        "/projects/fronto/annotations",
        content=json.dumps(new_annotations),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 409

    # the write hit the disk before the 2xx: a fresh scan reproduces it
    restarted = TestClient(create_app(root))
    assert get_annotations(restarted, "fronto") == stored
    assert restarted.get("/projects/fronto").json()["revision"] == 1


# ---------------------------------------------------------------------------
# quad writes


def test_put_quads_updates_rectification(rw):
    client, _, _, _ = rw
    r = client.put(
        "/projects/fronto/quads",
        content=json.dumps(
            {"rectify_dst_rect": [[0, 0], [100, 0], [100, 150], [0, 150]]}
        ),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 200
    assert r.json() == {"revision": 2}
    doc = client.get("/projects/fronto").json()["document"]
    assert doc["rectify_dst_rect"] == [[0, 0], [100, 0], [100, 150], [0, 150]]


def test_put_quads_rejects_degenerate(rw):
    client, _, _, _ = rw
    r = client.put(
        "/projects/fronto/quads",
        content=json.dumps({"rectify_src_quad": [[0, 0], [1, 1], [2, 2], [3, 3]]}),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 422
    r = client.put(
        "/projects/fronto/quads",
        content=json.dumps({"unrelated": 1}),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 422


def test_put_reference_track_and_preview_409(rw):
    client, _, _, _ = rw
    track = client.get("/projects/recorder").json()["document"]["reference_track"]
    del track["per_frame_points"]["3"]
    r = client.put(
        "/projects/recorder/quads",
        content=json.dumps({"reference_track": track}),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 200
    r = client.get("/projects/recorder/frames/3/image", params={"rectified": "true"})
    assert r.status_code == 409
    assert "reference points" in r.json()["detail"]


# ---------------------------------------------------------------------------
# tracing


def test_post_trace_matches_cli_bytes(rw, tmp_path):
    client, fronto, _, _ = rw
    r = client.post("/projects/fronto/trace")
    assert r.status_code == 200
    assert r.headers["content-type"] == "application/json"
    out = tmp_path / "cli_trace.json"
    assert cli_main(["trace", str(fronto.project_path), str(out)]) == 0
    assert r.content == out.read_bytes()
    # and stable across calls
    assert client.post("/projects/fronto/trace").content == r.content


def test_post_trace_validation_failure_422(rw):
    client, _, _, _ = rw
    # strip every ratio anchor, leaving consistent but untraceable annotations
    anns = get_annotations(client, "fronto")
    for a in anns:
        a["ref_width_px"] = None
    r = client.put(
        "/projects/fronto/annotations",
        content=json.dumps(anns),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 200
    r = client.post("/projects/fronto/trace")
    assert r.status_code == 422
    body = r.json()
    assert body["detail"] == "validation failed"
    codes = [f["code"] for f in body["report"]["findings"]]
    assert "no_ratio_anchor" in codes


def test_trace_sees_latest_annotations(rw):
    client, _, _, _ = rw
    before = client.post("/projects/fronto/trace").content
    anns = get_annotations(client, "fronto")
    anns[0]["marks"][0]["x"] += 1.0
    r = client.put(
        "/projects/fronto/annotations",
        content=json.dumps(anns),
        headers={"Expected-Revision": "1"},
    )
    assert r.status_code == 200
    after = client.post("/projects/fronto/trace").content
    assert before != after

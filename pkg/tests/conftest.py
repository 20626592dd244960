import pytest

from trajex.synthetic import make_fronto_scene, make_oblique_scene, make_recorder_scene


@pytest.fixture(scope="session")
def fronto_scene(tmp_path_factory):
    return make_fronto_scene(tmp_path_factory.mktemp("fronto"), n_frames=60)


@pytest.fixture(scope="session")
def fronto_scene_no_hit(tmp_path_factory):
    return make_fronto_scene(
        tmp_path_factory.mktemp("fronto_nohit"), n_frames=60, with_hit=False
    )


@pytest.fixture(scope="session")
def oblique_scene(tmp_path_factory):
    return make_oblique_scene(tmp_path_factory.mktemp("oblique"), tilt_deg=45.0, n_frames=40)


@pytest.fixture(scope="session")
def recorder_scene(tmp_path_factory):
    return make_recorder_scene(tmp_path_factory.mktemp("recorder"), n_frames=30)

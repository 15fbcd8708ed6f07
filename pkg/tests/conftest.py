import pytest

from pointmanip.deploy.cameras import front_camera, look_at

look_at_camera = look_at


@pytest.fixture(name="front_camera")
def front_camera_fixture():
    return front_camera()

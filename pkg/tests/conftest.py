import pytest

from homoglab.lab import Lab, Settings


@pytest.fixture(autouse=True)
def bind_settings():
    Lab.current.bind(Settings())
    yield
    Lab.current.bind(Settings())


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"

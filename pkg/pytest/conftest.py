""" pytest configuration """
from contextlib import contextmanager
import numpy as np
import pytest
import ssclab as ssc


def pytest_addoption(parser):
    """ Add command line options """
    parser.addoption("--seed",
                     action="store",
                     type=int,
                     default=42,
                     help="Seed of the randomized tests")


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


@contextmanager
def ssc_logger_scope():
    """Enables logger in the context"""
    try:
        ssc.log.init('logger::default', {'stream': 'stderr', 'color': False})
        yield
    finally:
        ssc.log.shutdown()


@pytest.fixture
def logger_scope():
    with ssc_logger_scope():
        yield


@pytest.fixture
def small_spec():
    """16 x 16 x 8 grid of 0.2 m voxels"""
    return ssc.voxel.GridSpec(origin=(0.0, -1.6, -0.8), extent=(3.2, 3.2, 1.6), dims=(16, 16, 8))


@pytest.fixture
def synthetic_scene(small_spec):
    """A car moving one voxel-width per frame past a static wall, over three frames"""
    script = ssc.synthgen.SceneScript(
        objects=(
            ssc.synthgen.SceneObject(1, 1, (0.6, 0.4, 0.4), (0.2, -1.0, -0.6), (0.2, 0.0, 0.0)),
            ssc.synthgen.SceneObject(13, 100, (2.4, 0.2, 0.8), (0.2, 0.6, -0.8)),
        ),
        frame_count=3, points_per_face=2, seed=7)
    return ssc.synthgen.generate(script, small_spec)

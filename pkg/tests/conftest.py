import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lowlight_forge.synthetic import color_chart, demo_corpus, gradient_ramp

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def random_image(rng):
    return rng.random((40, 56, 3))


@pytest.fixture
def chart():
    return color_chart(size=96, seed=0)


@pytest.fixture
def ramp():
    return gradient_ramp(size=128)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """A small deterministic corpus shared by pipeline and CLI tests."""
    dest = tmp_path_factory.mktemp("corpus")
    # size 96 keeps the engineered blur frame below the sharpness threshold
    demo_corpus(dest, count=8, size=96, seed=7)
    return dest

import random

import pytest

from timeboost import ScoreParams


@pytest.fixture
def params() -> ScoreParams:
    return ScoreParams(g=0.5, c=1.0)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_part_scores(rng, n, integer=False, span=5):
    """Three random signed tracks; integer-valued when exact sums matter."""
    from temploc import PartScores

    if integer:
        draw = lambda: rng.integers(-span, span + 1, size=n).astype(float)
    else:
        draw = lambda: rng.uniform(-span, span, size=n)
    return PartScores(draw(), draw(), draw())

import numpy as np
import pytest

from driftseg.pwq import PiecewiseQuadratic, min_of_two


def random_pwq(rng: np.random.Generator, max_knots: int = 20) -> PiecewiseQuadratic:
    """A random valid piecewise quadratic built as a minimum of convex pieces.

    Mimics how the solver's cost functionals arise, so every invariant
    (continuity, downward kinks) holds by construction.
    """
    target = int(rng.integers(1, max_knots + 1)) + 1
    a = float(rng.uniform(0.05, 3.0))
    v = float(rng.uniform(-8.0, 8.0))
    h = float(rng.uniform(0.0, 40.0))
    f = PiecewiseQuadratic.from_quadratic((a, -2.0 * a * v, a * v * v + h))
    for _ in range(200):
        if f.piece_count >= target:
            break
        a = float(rng.uniform(0.05, 3.0))
        v = float(rng.uniform(-8.0, 8.0))
        h = float(rng.uniform(0.0, 40.0))
        g = PiecewiseQuadratic.from_quadratic((a, -2.0 * a * v, a * v * v + h))
        f = min_of_two(f, g)
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)

import numpy as np
import pytest

from fieldscape.cubical import ScalarField


@pytest.fixture
def ring_field() -> ScalarField:
    """3x3 ring: boundary valued 1..8 cyclically, center 10.

    The loop closes at 8 and all four faces enter at 10.
    """
    return ScalarField(3, 3, np.array([[1, 2, 3], [8, 10, 4], [7, 6, 5]], dtype=float))


def random_field(rng: np.random.Generator, max_rows: int = 6, max_cols: int = 6,
                 ties: bool = False) -> ScalarField:
    rows = int(rng.integers(1, max_rows + 1))
    cols = int(rng.integers(1, max_cols + 1))
    if ties:
        vals = rng.integers(0, 4, (rows, cols)).astype(float)
    else:
        vals = rng.standard_normal((rows, cols))
    return ScalarField(rows, cols, vals)

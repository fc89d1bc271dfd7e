from pathlib import Path

import pytest

from hyperkappa.curve import curve_from_roots
from hyperkappa.lambda_exact import integer_table
from hyperkappa.periods import compute_periods

DATA = Path(__file__).resolve().parent.parent / "data"

G2_ROOTS = [-3, -2, -1, 1, 2, 3]
G3_ROOTS = [-7, -5, -2, -1, 1, 3, 4, 8]


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def g2_curve():
    return curve_from_roots(G2_ROOTS)


@pytest.fixture(scope="session")
def g2_periods(g2_curve):
    return compute_periods(g2_curve)


@pytest.fixture(scope="session")
def g3_curve():
    return curve_from_roots(G3_ROOTS)


@pytest.fixture(scope="session")
def g3_periods(g3_curve):
    return compute_periods(g3_curve)


@pytest.fixture(scope="session")
def tables():
    """Float-path integer tables, keyed by genus."""
    return {g: integer_table(g, 0, exact=False) for g in range(1, 7)}

import numpy as np
import pytest

import leraydec as ld


@pytest.fixture(scope="session")
def grid8():
    return ld.Grid(8)


@pytest.fixture(scope="session")
def grid16():
    return ld.Grid(16)


@pytest.fixture(scope="session")
def grid32():
    return ld.Grid(32)


@pytest.fixture()
def rand16(grid16):
    return ld.random_solenoidal(grid16, seed=11)


@pytest.fixture()
def tg16(grid16):
    return ld.taylor_green(grid16)


def rel_l2(a, b):
    """Relative L2 distance between two spectral fields on the same grid."""
    diff = a.with_coeffs(a.coeffs - b.coeffs)
    denom = ld.hs_norm(b, 0)
    return ld.hs_norm(diff, 0) / denom if denom else ld.hs_norm(diff, 0)

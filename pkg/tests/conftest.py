import numpy as np
import pytest

import susyqm as sq


@pytest.fixture(scope="session")
def grid40():
    """Default working grid."""
    return sq.make_grid(1e-3, 40.0, 16001)


@pytest.fixture(scope="session")
def grid60():
    """Extended grid for spectra (the n=4 tail is not asymptotic at 40)."""
    return sq.make_grid(1e-3, 60.0, 24001)


@pytest.fixture(scope="session")
def grid12():
    """Short grid where generic (exponentially growing) seeds stay moderate."""
    return sq.make_grid(1e-3, 12.0, 4801)


@pytest.fixture(scope="session")
def coulomb_l0(grid40):
    return sq.coulomb_potential(sq.CoulombParams(l=0, eps=-1.0, w0=0.0), grid40)


@pytest.fixture(scope="session")
def seed_l0n1(grid40):
    return sq.coulomb_seed(sq.CoulombParams.bound(0, 1, 0.0), grid40)


@pytest.fixture(scope="session")
def seed_l0n2(grid40):
    return sq.coulomb_seed(sq.CoulombParams.bound(0, 2, 0.0), grid40)


def l2_norm(values, h):
    v = np.where(np.isfinite(values), values, 0.0)
    return float(np.sqrt(np.sum(v * v) * h))

import pytest

from ictasim.circuit import FrequencyGrid, IctaParams, build_icta, frankenstein_matrix


@pytest.fixture(scope="session")
def coarse_grid():
    # 16 MHz spacing keeps the FFTs small while leaving f_dc = 12 GHz
    # under the f_max / 2 = 16.384 GHz idler limit.
    return FrequencyGrid(spacing=16e6, size=2048)


@pytest.fixture(scope="session")
def canonical_net():
    return build_icta(IctaParams())


@pytest.fixture(scope="session")
def canonical_f(canonical_net, coarse_grid):
    return frankenstein_matrix(canonical_net, coarse_grid)

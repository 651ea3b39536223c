import numpy as np
import pytest

from fracfem import Kernel, assemble_1d, assemble_2d, make_disk_mesh, make_interval_mesh

_GRAM_CACHE = {}


@pytest.fixture(scope="session")
def gram_1d():
    """Cached 1D Gram pairs keyed by (s, nodes, v_const)."""

    def factory(s, nodes=128, v_const=0.0):
        key = (1, s, nodes, v_const)
        if key not in _GRAM_CACHE:
            mesh = make_interval_mesh(-1.0, 1.0, nodes)
            _GRAM_CACHE[key] = assemble_1d(
                mesh, Kernel(1, s), v_const if v_const else None
            )
        return _GRAM_CACHE[key]

    return factory


@pytest.fixture(scope="session")
def gram_disk():
    """Cached 2D Gram pairs keyed by (s, level)."""

    def factory(s, level=1):
        key = (2, s, level)
        if key not in _GRAM_CACHE:
            mesh = make_disk_mesh(1.0, level)
            _GRAM_CACHE[key] = assemble_2d(mesh, Kernel(2, s))
        return _GRAM_CACHE[key]

    return factory


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)

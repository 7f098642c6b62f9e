import numpy as np
import pytest

from adaptquant.noise import STANDARD_SHAPES, NoiseModel
from adaptquant.quantizer import design_uniform


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240815)


_DESIGN_CACHE = {}


@pytest.fixture(scope="session")
def cached_design():
    """design(family, beta, nbits, delta=1) with session-wide caching.

    The c_delta grid search is the expensive part; several test modules
    need the same handful of designs.
    """

    def _get(family, beta, nbits, delta=1.0):
        key = (family, beta, nbits, delta)
        if key not in _DESIGN_CACHE:
            model = NoiseModel(family, beta, delta)
            spec, design = design_uniform(model, 2**nbits)
            _DESIGN_CACHE[key] = (model, spec, design)
        return _DESIGN_CACHE[key]

    return _get


@pytest.fixture(scope="session")
def seven_noises():
    return [NoiseModel(fam, beta) for fam, beta in STANDARD_SHAPES]

import os

import numpy as np
import pytest

from librado.tests.utils import make_dataset


@pytest.fixture(autouse=True)
def single_worker(mocker):
    mocker.patch.dict(os.environ, {'LIBRADO_THREADS': '1'})


@pytest.fixture
def two_points():
    # x1=(1,3) positive, x2=(4,0) negative
    return make_dataset([[1.0, 3.0], [4.0, 0.0]], [1, -1])


@pytest.fixture
def small_dataset():
    stream = np.random.default_rng(7)
    features = stream.normal(size=(8, 3))
    labels = np.where(stream.uniform(size=8) < 0.5, -1, 1)
    labels[:2] = (-1, 1)
    return make_dataset(features, labels)

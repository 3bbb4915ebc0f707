import numpy as np

from librado.core import Dataset
from librado.rados import Provenance, RadoMode, RadoSet


def make_dataset(features, labels, names=None):
    features = np.asarray(features, dtype=np.float64)
    names = names or tuple(f'x{k}' for k in range(features.shape[1]))
    return Dataset(features, np.asarray(labels), names, ('neg', 'pos'))


def make_rados(rados, mode=RadoMode.PlainRandom, source_m=None):
    """
    Wraps a matrix into a RadoSet with a placeholder provenance.
    """
    rados = np.asarray(rados, dtype=np.float64)
    if rados.ndim == 1:
        rados = rados[:, None]
    return RadoSet(rados, Provenance(mode, source_m or rados.shape[0]))


def random_rados(n, d, seed, low=-1.0, high=1.0):
    stream = np.random.default_rng(seed)
    return make_rados(stream.uniform(low, high, size=(n, d)))


def positive_rados(n, d, seed, low=1.0, high=2.0):
    """
    Rados with every coordinate in [low, high], so each feature has an
    edge of at least low / high under any weights
    """
    return random_rados(n, d, seed, low, high)

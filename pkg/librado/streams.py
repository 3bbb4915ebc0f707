from enum import IntEnum

import numpy as np


class StreamTag(IntEnum):
    """
    Purposes a keyed random stream can be drawn for. The tag is part of the
    stream key so that, for example, rado j of a plain sample and noise for
    rado j never share randomness.
    """
    PlainRado = 1
    ClassWiseRado = 2
    LaplaceNoise = 3
    Folds = 4
    Synthetic = 5
    GapTrials = 6
    ExampleSample = 7


def keyed_stream(seed, tag, *key):
    """
    Returns an independent numpy Generator keyed by (seed, tag, *key).

    Streams are derived with SeedSequence spawn keys, so the stream for a
    given key does not depend on how many other streams were drawn before it
    or on which thread draws it.
    """
    if seed is None or int(seed) < 0:
        raise ValueError(f'seed must be a nonnegative integer, got {seed}')
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(tag), *[int(k) for k in key])
    )
    return np.random.default_rng(sequence)

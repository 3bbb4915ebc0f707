"""
Loading labeled examples from CSV, cross-validation folds, optional min-max
scaling and the small synthetic domains used for desk-scale runs.
"""
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd

from librado.core import Dataset
from librado.exceptions import (
    LabelError, MissingValueError, ParseError, StratificationError,
    UsageError
)
from librado.streams import StreamTag, keyed_stream

logger = logging.getLogger(__name__)

MISSING_TOKENS = ('', '?', 'na', 'nan', 'null')
SYNTHETIC_PREFIX = 'synthetic:'


def _numeric_features(frame, names, path):
    cells = frame[names].apply(lambda column: column.str.strip())
    missing = cells.apply(lambda column: column.str.lower()).isin(
        MISSING_TOKENS
    )
    values = cells.apply(pd.to_numeric, errors='coerce')
    rows, columns = np.nonzero((missing | values.isna()).to_numpy())
    if rows.size:
        # first offending cell in reading order
        row, column = int(rows[0]), names[columns[0]]
        if missing.iat[row, columns[0]]:
            raise MissingValueError(
                f'{path}: missing value in row {row}, column {column!r}'
            )
        raise ParseError(
            f'{path}: not a number in row {row}, column {column!r}: '
            f'{cells.iat[row, columns[0]]!r}'
        )
    return values.to_numpy(dtype=np.float64)


def _label_map(tokens, positive_token=None):
    distinct = sorted(set(tokens))
    if len(distinct) > 2:
        raise LabelError(
            f'expected two label tokens, found {len(distinct)}: '
            f'{", ".join(distinct[:5])}'
        )
    if positive_token is not None:
        positive_token = str(positive_token)
        if positive_token not in distinct and len(distinct) == 2:
            raise LabelError(
                f'positive token {positive_token!r} is not one of {distinct}'
            )
        negatives = [t for t in distinct if t != positive_token]
        negative_token = negatives[0] if negatives else None
        return negative_token, positive_token
    if len(distinct) < 2:
        raise LabelError(
            f'a single label token {distinct[0]!r} cannot be oriented, '
            f'give the positive token explicitly'
        )
    return distinct[0], distinct[1]


def _read_frame(path):
    try:
        return pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError,
            UnicodeDecodeError) as error:
        raise ParseError(f'{path}: {error}')


def load_csv(path, label_column=None, positive_token=None):
    """
    Reads a headed CSV into a Dataset. The label column (name or position,
    the last column by default) must hold exactly two distinct tokens: the
    lexicographically smaller one becomes -1 unless `positive_token` names
    the +1 class. Every other column must be numeric.
    """
    frame = _read_frame(path)
    if frame.shape[1] < 2:
        raise ParseError(f'{path}: need a label column and a feature column')
    if label_column is None:
        label_name = frame.columns[-1]
    elif str(label_column) in frame.columns:
        label_name = str(label_column)
    else:
        try:
            label_name = frame.columns[int(label_column)]
        except (ValueError, IndexError):
            raise ParseError(f'{path}: no label column {label_column!r}')

    tokens = [token.strip() for token in frame[label_name]]
    for row, token in enumerate(tokens):
        if token.lower() in MISSING_TOKENS:
            raise MissingValueError(f'{path}: missing label in row {row}')
    negative_token, positive_token = _label_map(tokens, positive_token)
    labels = np.array([1 if t == positive_token else -1 for t in tokens])

    names = [column for column in frame.columns if column != label_name]
    features = _numeric_features(frame, names, path)
    logger.info('%s: %d examples, %d features', path, *features.shape)
    return Dataset(
        features, labels, tuple(names), (negative_token, positive_token)
    )


def write_csv(dataset, path, label_column='label'):
    """Writes a Dataset back as CSV with the label tokens it was read with"""
    negative, positive = dataset.label_tokens or ('-1', '1')
    frame = pd.DataFrame(dataset.features, columns=dataset.feature_names)
    frame[label_column] = np.where(dataset.labels == 1, positive, negative)
    frame.to_csv(path, index=False, float_format='%.17g')


def kfold(dataset, k, seed=0, stratified=True):
    """
    Splits the examples into k folds and returns k (train, test) index
    pairs. Examples are shuffled with a keyed stream, then dealt round robin;
    when stratified, the negatives are dealt before the positives so every
    fold gets each class within one example of its share.
    """
    m = dataset.m
    if int(k) != k or k < 2:
        raise UsageError(f'need at least 2 folds, got {k}')
    if k > m:
        raise UsageError(f'cannot make {k} folds out of {m} examples')

    if stratified:
        order = []
        for position, label in enumerate((-1, 1)):
            members = dataset.class_indices(label)
            if members.size < k:
                raise StratificationError(
                    f'class {label:+d} has {members.size} examples, fewer '
                    f'than {k} folds'
                )
            stream = keyed_stream(seed, StreamTag.Folds, position)
            order.append(stream.permutation(members))
        order = np.concatenate(order)
    else:
        order = keyed_stream(seed, StreamTag.Folds, 2).permutation(m)

    assignment = np.empty(m, dtype=np.int64)
    assignment[order] = np.arange(m) % k
    return [
        (np.flatnonzero(assignment != fold),
         np.flatnonzero(assignment == fold))
        for fold in range(k)
    ]


@dataclass(frozen=True)
class MinMaxScaling:
    """Maps every feature to [0, 1] using the range seen at fit time"""
    low: tuple
    high: tuple

    @staticmethod
    def fit(dataset):
        return MinMaxScaling(
            tuple(np.min(dataset.features, axis=0).tolist()),
            tuple(np.max(dataset.features, axis=0).tolist()),
        )

    def apply_features(self, features):
        low, high = np.asarray(self.low), np.asarray(self.high)
        span = high - low
        safe = np.where(span > 0, span, 1.0)
        scaled = np.where(span > 0, (features - low) / safe, 0.0)
        return scaled

    def apply(self, dataset):
        return Dataset(
            self.apply_features(dataset.features), dataset.labels,
            dataset.feature_names, dataset.label_tokens
        )

    def serialize(self):
        return {'kind': 'minmax', 'low': list(self.low),
                'high': list(self.high)}

    @staticmethod
    def deserialize(doc):
        if doc.get('kind') != 'minmax':
            raise ParseError(f'unknown scaling {doc.get("kind")!r}')
        return MinMaxScaling(tuple(doc['low']), tuple(doc['high']))


def make_gauss_nlin(m, seed=0):
    """
    Two dimensional Gaussian domain that is not linearly separable: the
    positives form one blob, the negatives a blob plus a small satellite
    cluster on the far side of the positives.
    """
    if m < 2:
        raise UsageError(f'need at least 2 examples, got {m}')
    stream = keyed_stream(seed, StreamTag.Synthetic, 1, m)
    labels = np.where(np.arange(m) % 2 == 0, 1, -1)
    stream.shuffle(labels)
    centers = np.where(labels[:, None] == 1, 1.0, -1.0) * np.ones((m, 2))
    satellite = (labels == -1) & (stream.uniform(size=m) < 0.1)
    centers[satellite] = (3.0, 3.0)
    features = centers + 0.6 * stream.standard_normal((m, 2))
    return Dataset(features, labels, ('x0', 'x1'), ('neg', 'pos'))


def make_separable(m, d=3, seed=0):
    """
    Linearly separable domain: the first feature is the label with a margin
    of 1, the others are uniform noise on [-1, 1].
    """
    if m < 2 or d < 1:
        raise UsageError(f'need m >= 2 and d >= 1, got m={m}, d={d}')
    stream = keyed_stream(seed, StreamTag.Synthetic, 2, m, d)
    labels = np.where(np.arange(m) % 2 == 0, 1, -1)
    stream.shuffle(labels)
    features = stream.uniform(-1.0, 1.0, size=(m, d))
    features[:, 0] = labels * (1.0 + stream.uniform(size=m))
    names = tuple(f'x{k}' for k in range(d))
    return Dataset(features, labels, names, ('neg', 'pos'))


SYNTHETIC_DOMAINS = {
    'gauss_nlin': make_gauss_nlin,
    'separable': make_separable,
}


def load_dataset(path, label_column=None, positive_token=None, seed=0):
    """
    load_csv, or one of the synthetic domains when `path` reads
    `synthetic:<name>:<m>`.
    """
    path = str(path)
    if not path.startswith(SYNTHETIC_PREFIX):
        return load_csv(path, label_column, positive_token)
    try:
        _, name, m = path.split(':')
        m = int(m)
    except ValueError:
        raise UsageError(f'expected synthetic:<name>:<m>, got {path!r}')
    if name not in SYNTHETIC_DOMAINS:
        raise UsageError(
            f'unknown synthetic domain in {path!r}, expected one of '
            f'{", ".join(sorted(SYNTHETIC_DOMAINS))}'
        )
    return SYNTHETIC_DOMAINS[name](m, seed=seed)

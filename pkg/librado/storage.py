"""
Files written and read by the command line: rado sets (CSV plus a JSON
sidecar), model documents and experiment results.
"""
import logging
import os

import numpy as np
import pandas as pd

from librado.exceptions import DataError, ParseError, UsageError
from librado.experiment import RESULTS_COLUMNS
from librado.parser import RadoDocumentParser
from librado.rados import RadoSet

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = '.meta.json'
FLOAT_FORMAT = '%.17g'


def sidecar_path(path):
    return f'{path}{SIDECAR_SUFFIX}'


def check_writable(*paths, force=False):
    """Refuses to overwrite existing files unless `force` is set"""
    if force:
        return
    for path in paths:
        if os.path.exists(path):
            raise UsageError(f'{path} exists, pass --force to overwrite')


def _write_text(path, text):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(text)
        if not text.endswith('\n'):
            handle.write('\n')


def _read_text(path):
    with open(path, encoding='utf-8') as handle:
        return handle.read()


def write_rados(rado_set, path, force=False):
    meta = sidecar_path(path)
    check_writable(path, meta, force=force)
    frame = pd.DataFrame(rado_set.rados, columns=rado_set.feature_names)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    _write_text(meta, RadoDocumentParser.dumps(
        RadoDocumentParser.serialize_rado_meta(rado_set)
    ))
    logger.info('wrote %d rados to %s', rado_set.n, path)


def read_rados(path):
    meta = sidecar_path(path)
    if not os.path.exists(meta):
        raise DataError(f'{path}: rado metadata {meta} is missing')
    n, d, names, provenance = RadoDocumentParser.deserialize_rado_meta(
        RadoDocumentParser.loads(_read_text(meta))
    )
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ParseError(f'{path}: {error}')
    if frame.shape != (n, d):
        raise DataError(
            f'{path}: metadata announces {n}x{d} rados, file holds '
            f'{frame.shape[0]}x{frame.shape[1]}'
        )
    try:
        rados = frame.to_numpy(dtype=np.float64)
    except ValueError as error:
        raise ParseError(f'{path}: {error}')
    return RadoSet(rados, provenance, names)


def write_model(model, path, force=False):
    check_writable(path, force=force)
    text = RadoDocumentParser.dumps(RadoDocumentParser.serialize_model(model))
    _write_text(path, text)


def read_model(path):
    return RadoDocumentParser.deserialize_model(
        RadoDocumentParser.loads(_read_text(path))
    )


def write_results(rows, path, force=False):
    check_writable(path, force=force)
    frame = pd.DataFrame(
        [row.serialize() for row in rows], columns=RESULTS_COLUMNS
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)

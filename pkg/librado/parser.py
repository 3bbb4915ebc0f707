import json

from librado import MODEL_FORMAT_VERSION, RADO_FORMAT_VERSION
from librado.core import IterationRecord, LinearModel
from librado.exceptions import CorruptDocumentError, DocumentError
from librado.rados import Provenance
from librado.regularizers import RegularizerSpec
from librado.versions import FormatVersion

MODEL_DOCUMENT = 'librado.model'
RADO_DOCUMENT = 'librado.rados'


class RadoDocumentParser:
    """
    Converts models and rado set metadata to and from JSON documents.

    Floats are written with their shortest round-trip representation, so
    reading a document back gives bit-identical values.
    """
    @staticmethod
    def dumps(doc):
        try:
            return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
        except ValueError as error:
            raise DocumentError(f'document holds a non-finite value: {error}')

    @staticmethod
    def loads(text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as error:
            raise CorruptDocumentError(f'not a JSON document: {error}')
        if not isinstance(doc, dict):
            raise CorruptDocumentError('document root must be an object')
        return doc

    @staticmethod
    def check_header(doc, kind, reader_version):
        if doc.get('document') != kind:
            raise CorruptDocumentError(
                f'expected a {kind} document, got {doc.get("document")!r}'
            )
        version = FormatVersion.deserialize(doc.get('format_version'))
        version.check_readable_by(FormatVersion.deserialize(reader_version))
        return version

    @staticmethod
    def serialize_model(model):
        if not model.history:
            raise DocumentError('refusing to write a model with no iterations')
        return {
            'document': MODEL_DOCUMENT,
            'format_version': MODEL_FORMAT_VERSION,
            'feature_names': list(model.feature_names),
            'theta': [float(x) for x in model.theta],
            'regularizer': model.regularizer.serialize(),
            'iterations_run': model.iterations_run,
            'selected_iteration': model.selected_iteration,
            'config': model.config,
            'scaling': model.scaling,
            'history': [record.serialize() for record in model.history],
        }

    @staticmethod
    def deserialize_model(doc):
        RadoDocumentParser.check_header(
            doc, MODEL_DOCUMENT, MODEL_FORMAT_VERSION
        )
        try:
            return LinearModel(
                theta=[float(x) for x in doc['theta']],
                history=tuple(
                    IterationRecord.deserialize(record)
                    for record in doc['history']
                ),
                regularizer=RegularizerSpec.deserialize(doc['regularizer']),
                iterations_run=int(doc['iterations_run']),
                feature_names=tuple(doc['feature_names']),
                selected_iteration=doc.get('selected_iteration'),
                config=doc.get('config') or {},
                scaling=doc.get('scaling'),
            )
        except (KeyError, TypeError, ValueError) as error:
            raise CorruptDocumentError(f'malformed model document: {error!r}')

    @staticmethod
    def serialize_rado_meta(rado_set):
        return {
            'document': RADO_DOCUMENT,
            'format_version': RADO_FORMAT_VERSION,
            'n': rado_set.n,
            'd': rado_set.d,
            'feature_names': list(rado_set.feature_names),
            'provenance': rado_set.provenance.serialize(),
        }

    @staticmethod
    def deserialize_rado_meta(doc):
        """Returns (n, d, feature names, provenance)"""
        RadoDocumentParser.check_header(
            doc, RADO_DOCUMENT, RADO_FORMAT_VERSION
        )
        try:
            return (
                int(doc['n']), int(doc['d']), tuple(doc['feature_names']),
                Provenance.deserialize(doc['provenance']),
            )
        except (KeyError, TypeError, ValueError) as error:
            raise CorruptDocumentError(f'malformed rado metadata: {error!r}')

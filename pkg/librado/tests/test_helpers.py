import pytest

from librado.core import GameKind
from librado.exceptions import (
    CorruptDocumentError, CouplingError, DeadFeaturesError,
    EnumerationCapError, LabelError, UsageError, VersionError
)
from librado.helpers import (
    format_percent, format_scientific, parse_bool, parse_float_list,
    split_list
)
from librado.status import ExitStatus, is_failure, status_for_error
from librado.verify import PairReport, verify
from librado.versions import FormatVersion


@pytest.mark.parametrize(
    ('value', 'digits', 'expected'),
    [
        (1.0050117e-3, 5, '1.00501e-3'),
        (0.0, 1, '0.0e0'),
        (-2.5e12, 2, '-2.50e12'),
        (float('inf'), 3, 'inf'),
    ]
)
def test_format_scientific(value, digits, expected):
    assert format_scientific(value, digits) == expected


def test_format_percent():
    assert format_percent(12.3456) == '12.35%'


@pytest.mark.parametrize(
    ('text', 'expected'),
    [('yes', True), ('True', True), ('1', True), ('no', False), ('', False)]
)
def test_parse_bool(text, expected):
    assert parse_bool(text) is expected


def test_parse_bool_rejects():
    with pytest.raises(ValueError):
        parse_bool('maybe')


def test_lists():
    assert split_list(' ridge, lasso ,,') == ['ridge', 'lasso']
    assert parse_float_list('1e-5, 0.5') == [1e-5, 0.5]
    assert parse_float_list('') == []


@pytest.mark.parametrize(
    ('error', 'status'),
    [
        (UsageError('bad flag'), ExitStatus.Usage),
        (CouplingError('mu'), ExitStatus.Usage),
        (ValueError('bad value'), ExitStatus.Usage),
        (LabelError('three tokens'), ExitStatus.Data),
        (EnumerationCapError(30, 20), ExitStatus.Data),
        (CorruptDocumentError('truncated'), ExitStatus.Data),
        (FileNotFoundError('missing'), ExitStatus.Data),
        (DeadFeaturesError('all zero'), ExitStatus.Numeric),
    ]
)
def test_status_for_error(error, status):
    assert status_for_error(error) == status


def test_status_for_unknown_error_reraises():
    with pytest.raises(KeyError):
        status_for_error(KeyError('x'))


def test_is_failure():
    assert not is_failure(ExitStatus.Success)
    assert is_failure(3)


@pytest.mark.parametrize(
    ('document', 'reader', 'readable'),
    [('1.0', '1.0', True), ('1.0', '1.2', True), ('1.3', '1.2', False),
     ('2.0', '1.0', False)]
)
def test_format_version(document, reader, readable):
    document = FormatVersion.deserialize(document)
    reader = FormatVersion.deserialize(reader)
    if readable:
        document.check_readable_by(reader)
    else:
        with pytest.raises(VersionError):
            document.check_readable_by(reader)


@pytest.mark.parametrize('text', (None, '1', 'a.b', '1.0.0'))
def test_malformed_format_version(text):
    with pytest.raises(CorruptDocumentError):
        FormatVersion.deserialize(text)


def test_format_version_text():
    assert FormatVersion(1, 4).serialize() == '1.4'
    assert repr(FormatVersion()) == '1.0'


def test_verify_all_pairs():
    reports = verify('all', m=4, trials=20, seed=2)
    assert [report.kind for report in reports] == list(GameKind)
    assert all(report.passed for report in reports)


def test_failed_report_lines():
    report = PairReport(GameKind.Relu, 3, 10, 0.0, 1.0, 0.5)
    assert not report.passed
    assert report.lines()[-1] == '  FAILED'

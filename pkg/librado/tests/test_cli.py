import os

import pytest

from cli import cli
from librado.core import zero_one_error
from librado.datasets import MinMaxScaling, load_dataset
from librado.helpers import format_percent
from librado.rados import RadoMode
from librado.storage import read_model, read_rados, write_rados
from librado.tests.utils import make_rados

DATA = (
    'age,nodes,survived\n'
    '30,1,yes\n45,0,yes\n62,7,no\n51,3,no\n38,2,yes\n70,12,no\n'
    '44,0,yes\n59,5,no\n'
)


@pytest.fixture
def data_path(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text(DATA)
    return str(path)


@pytest.fixture
def clean_environment(mocker):
    mocker.patch.dict(os.environ, {'LIBRADO_THREADS': '1'})


def run(*argv):
    return cli([str(arg) for arg in argv])


def test_dp_budget(capsys):
    assert run('dp-budget', '--epsilon', 1, '--n', 100, '--m', 1000) == 0
    assert capsys.readouterr().out.strip() == '1.00501e-3'


def test_verify_relu(capsys):
    status = run('verify', '--pair', 'relu', '--m', 6, '--trials', 50)
    assert status == 0
    out = capsys.readouterr().out
    assert 'max residual 0.0e0' in out
    assert 'FAILED' not in out


@pytest.mark.parametrize(
    'argv',
    [
        ('train', '--out', 'model.json'),
        ('bogus',),
        (),
        ('dp-budget', '--epsilon', '1', '--n', '0', '--m', '3'),
        ('verify', '--pair', 'hinge'),
    ]
)
def test_usage_errors(argv):
    assert run(*argv) == 1


def test_missing_rados_are_a_data_error(tmp_path):
    status = run('train', '--rados', tmp_path / 'none.csv',
                 '--out', tmp_path / 'model.json')
    assert status == 2


def test_infinite_step_is_numeric(tmp_path, clean_environment):
    rados = tmp_path / 'rados.csv'
    write_rados(make_rados([[2.0], [2.0]]), str(rados))
    status = run('train', '--rados', rados, '--reg', 'lasso', '--T', 1,
                 '--out', tmp_path / 'model.json')
    assert status == 3
    assert not (tmp_path / 'model.json').exists()


def test_pipeline(tmp_path, data_path, capsys, clean_environment):
    rados, again = tmp_path / 'rados.csv', tmp_path / 'again.csv'
    model = tmp_path / 'model.json'
    gen = ('gen', '--data', data_path, '--n', 30, '--seed', 3)
    assert run(*gen, '--out', rados) == 0
    assert run('--threads', 4, *gen, '--out', again) == 0
    assert rados.read_bytes() == again.read_bytes()

    assert run('train', '--rados', rados, '--reg', 'slope:0.1',
               '--omega', 0.01, '--T', 25, '--select', 'best',
               '--out', model) == 0
    assert read_model(str(model)).iterations_run == 25

    capsys.readouterr()
    assert run('eval', '--model', model, '--data', data_path) == 0
    assert capsys.readouterr().out.startswith('m=8 error ')


def test_outputs_are_not_overwritten(tmp_path, data_path, clean_environment):
    rados = tmp_path / 'rados.csv'
    gen = ('gen', '--data', data_path, '--mode', 'full', '--out', rados)
    assert run(*gen) == 0
    assert run(*gen) == 1
    assert run(*gen, '--force') == 0
    assert read_rados(str(rados)).n == 2 ** 8


def test_protect(tmp_path, data_path, clean_environment):
    rados, protected = tmp_path / 'rados.csv', tmp_path / 'dp.csv'
    assert run('gen', '--data', data_path, '--out', rados) == 0
    assert run('protect', '--rados', rados, '--epsilon', 1,
               '--out', protected) == 1
    assert run('protect', '--rados', rados, '--epsilon', 1,
               '--data', data_path, '--seed', 5, '--out', protected) == 0
    restored = read_rados(str(protected))
    assert restored.provenance.mode == RadoMode.Protected
    assert restored.provenance.seed is None


def test_experiment(tmp_path, capsys, clean_environment):
    config = tmp_path / 'experiment.env'
    results = tmp_path / 'results.csv'
    config.write_text(
        'DATASET_PATH=synthetic:separable:20\n'
        'DOMAIN=separable\n'
        'FOLDS=2\n'
        'REGULARIZERS=lasso\n'
        'T=3\n'
        'SELECT=last\n'
    )
    assert run('experiment', '--config', config, '--out', results) == 0
    assert results.read_text().startswith('domain,learner,regularizer,')
    assert 'separable rados lasso' in capsys.readouterr().out
    assert run('experiment', '--config', config, '--out', results) == 1


def test_minmax_scaling_reaches_the_model(tmp_path, data_path, capsys,
                                          clean_environment):
    rados, model_path = tmp_path / 'rados.csv', tmp_path / 'model.json'
    assert run('gen', '--data', data_path, '--minmax-scale', '--seed', 2,
               '--out', rados) == 0
    dataset = load_dataset(data_path)
    scaling = MinMaxScaling.fit(dataset)
    assert read_rados(str(rados)).provenance.scaling == scaling.serialize()

    assert run('train', '--rados', rados, '--T', 10,
               '--out', model_path) == 0
    model = read_model(str(model_path))
    assert model.scaling == scaling.serialize()

    capsys.readouterr()
    assert run('eval', '--model', model_path, '--data', data_path) == 0
    scaled = scaling.apply(dataset)
    expected = format_percent(zero_one_error(model, scaled))
    assert capsys.readouterr().out.startswith(f'm=8 error {expected} ')


def test_usage_errors_print_usage(caplog):
    assert run('gen', '--data') == 1
    assert 'usage: cli.py gen' in caplog.text

"""
Cross-validated evaluation of rado boosting over a grid of regularizers,
with optional example-boosting and differential-privacy comparisons.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple
import logging
import os

from dotenv import dotenv_values
import numpy as np

from librado import settings
from librado.boost import (
    BoostConfig, Selection, WeakLearnerMode, baseline_example_boost, boost,
    replay_theta
)
from librado.core import (
    LinearModel, edge_vectors, support_percent, zero_one_error
)
from librado.datasets import MinMaxScaling, kfold, load_dataset
from librado.exceptions import UsageError
from librado.helpers import parse_bool, parse_float_list, split_list
from librado.privacy import (
    DpParams, dp_protect, dp_protect_edges, resolve_r_e
)
from librado.rados import (
    RadoMode, enumerate_rados, sample_classwise, sample_plain
)
from librado.regularizers import parse_regularizer
from librado.streams import StreamTag, keyed_stream

logger = logging.getLogger(__name__)

RESULTS_COLUMNS = (
    'domain', 'learner', 'regularizer', 'omega', 'select', 'epsilon',
    'test_error_mean', 'test_error_std', 'support_mean', 'support_std',
)

CONFIG_KEYS = (
    'DATASET_PATH', 'DOMAIN', 'LABEL_COLUMN', 'POSITIVE_TOKEN', 'FOLDS',
    'STRATIFIED', 'RADO_MODE', 'N_RADOS', 'REGULARIZERS', 'OMEGAS', 'T',
    'CLAMP_GAMMA', 'WL_MODE', 'SELECT', 'SEED', 'MINMAX_SCALE', 'BASELINE',
    'EPSILONS', 'DP_N_RADOS', 'OUTPUT_PATH',
)


class Learner:
    Rados = 'rados'
    Examples = 'examples'
    ProtectedRados = 'rados-dp'
    ProtectedExamples = 'examples-dp'


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    domain: str = ''
    label_column: Optional[str] = None
    positive_token: Optional[str] = None
    folds: int = 10
    stratified: bool = True
    rado_mode: RadoMode = RadoMode.PlainRandom
    n_rados: Optional[int] = None
    regularizers: Tuple[str, ...] = ('ridge',)
    omegas: Tuple[float, ...] = (0.0,)
    T: int = 1000
    clamp_gamma: float = 0.98
    wl_mode: WeakLearnerMode = WeakLearnerMode.PreferenceOrder
    selects: Tuple[Selection, ...] = (Selection.BestOnTraining,)
    seed: int = 0
    minmax_scale: bool = False
    baseline: bool = False
    epsilons: Tuple[float, ...] = ()
    dp_n_rados: Optional[int] = None
    output_path: Optional[str] = None
    grid: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.folds < 2:
            raise UsageError(f'need at least 2 folds, got {self.folds}')
        if not self.regularizers or not self.omegas:
            raise UsageError('the regularizer grid is empty')
        if not self.selects:
            raise UsageError('select at least one of last, best')
        if self.rado_mode not in (
            RadoMode.PlainRandom, RadoMode.ClassWise, RadoMode.Full
        ):
            raise UsageError(f'cannot train on {self.rado_mode.value} rados')
        if any(not eps > 0 for eps in self.epsilons):
            raise UsageError('every epsilon must be positive')
        grid = tuple(
            parse_regularizer(text, omega)
            for text in self.regularizers for omega in self.omegas
        )
        object.__setattr__(self, 'grid', grid)
        if not self.domain:
            name = os.path.splitext(os.path.basename(self.dataset_path))[0]
            object.__setattr__(self, 'domain', name)

    @staticmethod
    def from_mapping(values):
        unknown = sorted(set(values) - set(CONFIG_KEYS))
        if unknown:
            raise UsageError(
                f'unknown configuration keys: {", ".join(unknown)}'
            )
        if not values.get('DATASET_PATH'):
            raise UsageError('DATASET_PATH is required')

        def optional(key, convert=str):
            value = values.get(key)
            return convert(value) if value not in (None, '') else None

        try:
            return ExperimentConfig(
                dataset_path=values['DATASET_PATH'],
                domain=values.get('DOMAIN') or '',
                label_column=optional('LABEL_COLUMN'),
                positive_token=optional('POSITIVE_TOKEN'),
                folds=int(values.get('FOLDS') or 10),
                stratified=parse_bool(values.get('STRATIFIED', 'true')),
                rado_mode=RadoMode(values.get('RADO_MODE') or 'plain'),
                n_rados=optional('N_RADOS', int),
                regularizers=tuple(
                    split_list(values.get('REGULARIZERS') or 'ridge')
                ),
                omegas=tuple(parse_float_list(values.get('OMEGAS') or '0')),
                T=int(values.get('T') or 1000),
                clamp_gamma=float(values.get('CLAMP_GAMMA') or 0.98),
                wl_mode=WeakLearnerMode(values.get('WL_MODE') or 'preference'),
                selects=tuple(
                    Selection(s)
                    for s in split_list(values.get('SELECT') or 'best')
                ),
                seed=int(values.get('SEED') or 0),
                minmax_scale=parse_bool(values.get('MINMAX_SCALE', 'false')),
                baseline=parse_bool(values.get('BASELINE', 'false')),
                epsilons=tuple(parse_float_list(values.get('EPSILONS') or '')),
                dp_n_rados=optional('DP_N_RADOS', int),
                output_path=optional('OUTPUT_PATH'),
            )
        except UsageError:
            raise
        except ValueError as error:
            raise UsageError(f'invalid experiment configuration: {error}')

    @staticmethod
    def from_file(path):
        if not os.path.exists(path):
            raise UsageError(f'configuration file {path} does not exist')
        return ExperimentConfig.from_mapping(dotenv_values(path))


@dataclass(frozen=True)
class ResultsRow:
    domain: str
    learner: str
    regularizer: str
    omega: float
    select: str
    epsilon: Optional[float]
    test_error_mean: float
    test_error_std: float
    support_mean: float
    support_std: float

    def serialize(self):
        return {column: getattr(self, column) for column in RESULTS_COLUMNS}


@dataclass(frozen=True)
class FoldOutcome:
    """Test error and support of one trained model on one fold"""
    key: tuple
    test_error: float
    support: float


def _fold_seed(seed, fold):
    return int(keyed_stream(seed, StreamTag.Folds, 3, fold).integers(2 ** 62))


def _make_rados(config, train, seed, threads=1):
    n = config.n_rados or train.m
    if config.rado_mode == RadoMode.Full:
        return enumerate_rados(train)
    if config.rado_mode == RadoMode.ClassWise:
        return sample_classwise(train, n, seed, threads)
    return sample_plain(train, n, seed, threads)


def _evaluate(key, theta, test):
    model = LinearModel(theta, (), None, 0, test.feature_names)
    return FoldOutcome(
        key, zero_one_error(model, test), support_percent(theta)
    )


def _select_outcomes(key, model, selects, test):
    outcomes = []
    for select in selects:
        theta = model.theta if select == Selection.BestOnTraining else \
            replay_theta(model)
        outcomes.append(_evaluate((*key, select.value), theta, test))
    return outcomes


def _sample_examples(train, n, seed):
    stream = keyed_stream(seed, StreamTag.ExampleSample, n)
    return stream.choice(train.m, size=n, replace=n > train.m)


def _run_fold(config, dataset, fold, indices):
    train_indices, test_indices = indices
    train = dataset.subset(train_indices)
    test = dataset.subset(test_indices)
    if config.minmax_scale:
        scaling = MinMaxScaling.fit(train)
        train, test = scaling.apply(train), scaling.apply(test)
    seed = _fold_seed(config.seed, fold)
    logger.info('%s: fold %d, %d train / %d test examples',
                config.domain, fold + 1, train.m, test.m)

    # best-on-training keeps the full history, so last is replayed from it
    select = Selection.BestOnTraining \
        if Selection.BestOnTraining in config.selects else Selection.Last

    def boost_config(spec, select=select):
        return BoostConfig(
            config.T, spec, config.clamp_gamma, config.wl_mode, select, seed
        )

    outcomes = []
    rados = _make_rados(config, train, seed)
    for spec in config.grid:
        model = boost(rados, boost_config(spec))
        key = (Learner.Rados, spec.label, spec.omega)
        outcomes += _select_outcomes(key, model, config.selects, test)
    if config.baseline:
        for spec in config.grid:
            model = baseline_example_boost(train, boost_config(spec))
            key = (Learner.Examples, spec.label, spec.omega)
            outcomes += _select_outcomes(key, model, config.selects, test)

    if config.epsilons:
        spec = config.grid[0].with_omega(0.0)
        n = config.dp_n_rados or train.m
        plain = sample_plain(train, n, seed)
        sample = _sample_examples(train, n, seed)
        edges = edge_vectors(train)[sample]
        r_e = resolve_r_e(train)
        for epsilon in config.epsilons:
            params = DpParams(epsilon, r_e, seed)
            for learner, protected in (
                (Learner.ProtectedRados, dp_protect(plain, params)),
                (Learner.ProtectedExamples, dp_protect_edges(
                    edges, params, train.feature_names
                )),
            ):
                model = boost(protected, boost_config(spec, Selection.Last))
                outcomes.append(_evaluate(
                    (learner, spec.label, 0.0, epsilon, Selection.Last.value),
                    model.theta, test
                ))
    return outcomes


def _row(domain, key, outcomes):
    learner, regularizer, omega = key[:3]
    epsilon = key[3] if len(key) == 5 else None
    errors = np.array([outcome.test_error for outcome in outcomes])
    supports = np.array([outcome.support for outcome in outcomes])
    return ResultsRow(
        domain=domain,
        learner=learner,
        regularizer=regularizer,
        omega=omega,
        select=key[-1],
        epsilon=epsilon,
        test_error_mean=float(np.mean(errors)),
        test_error_std=float(np.std(errors, ddof=1)),
        support_mean=float(np.mean(supports)),
        support_std=float(np.std(supports, ddof=1)),
    )


def run_experiment(config, threads=None):
    """
    Runs the k-fold protocol and returns one ResultsRow per (learner,
    regularizer, omega, select[, epsilon]), in the order the cells are
    trained. Folds run on up to `threads` workers; results do not depend
    on the worker count.
    """
    threads = settings.threads() if threads is None else threads
    dataset = load_dataset(
        config.dataset_path, config.label_column, config.positive_token,
        config.seed
    )
    folds = kfold(dataset, config.folds, config.seed, config.stratified)

    def run(fold):
        return _run_fold(config, dataset, fold, folds[fold])

    if threads <= 1:
        per_fold = [run(fold) for fold in range(len(folds))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_fold = list(pool.map(run, range(len(folds))))

    keys = [outcome.key for outcome in per_fold[0]]
    grouped = {key: [] for key in keys}
    for outcomes in per_fold:
        for outcome in outcomes:
            grouped[outcome.key].append(outcome)
    return [_row(config.domain, key, grouped[key]) for key in keys]

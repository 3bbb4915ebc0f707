import argparse
import logging
import sys

from dotenv import load_dotenv

from librado import settings
from librado.boost import BoostConfig, Selection, WeakLearnerMode, boost
from librado.core import predict_many, support_percent, zero_one_error
from librado.datasets import MinMaxScaling, load_dataset
from librado.exceptions import LibradoError, UsageError
from librado.experiment import ExperimentConfig, run_experiment
from librado.helpers import format_percent, format_scientific
from librado.privacy import DpParams, dp_protect, epsilon_a, resolve_r_e
from librado.rados import enumerate_rados, sample_classwise, sample_plain
from librado.regularizers import parse_regularizer
from librado.status import ExitStatus, status_for_error
from librado.storage import (
    check_writable, read_model, read_rados, write_model, write_rados,
    write_results
)
from librado.verify import verify

logger = logging.getLogger('librado.cli')

GEN_MODES = ('plain', 'classwise', 'full')
PAIRS = ('all', 'log', 'square', 'relu', 'unhinged')


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2"""
    def error(self, message):
        raise UsageError(f'{self.format_usage()}{self.prog}: {message}')


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(
            f'expected a positive integer: {text}'
        )
    return value


def gen(args):
    dataset = load_dataset(
        args.data, args.label_column, args.positive_token, args.seed
    )
    scaling = None
    if args.minmax_scale:
        scaling = MinMaxScaling.fit(dataset)
        dataset = scaling.apply(dataset)
    n = args.n or dataset.m
    if args.mode == 'full':
        rados = enumerate_rados(dataset)
    elif args.mode == 'classwise':
        rados = sample_classwise(dataset, n, args.seed, args.threads)
    else:
        rados = sample_plain(dataset, n, args.seed, args.threads)
    if scaling:
        rados = rados.with_rados(rados.rados, scaling=scaling.serialize())
    write_rados(rados, args.out, args.force)
    print(f'{rados.n} {rados.provenance.mode.value} rados, d={rados.d}')


def protect(args):
    rados = read_rados(args.rados)
    if args.r_e is None and args.data is None:
        raise UsageError('give --r-e, or --data to derive it')
    if args.data is not None:
        dataset = load_dataset(args.data, args.label_column,
                               args.positive_token, args.seed)
        r_e = resolve_r_e(dataset, args.r_e)
    else:
        r_e = args.r_e
    params = DpParams(args.epsilon, r_e, args.seed)
    protected = dp_protect(rados, params, args.threads)
    write_rados(protected, args.out, args.force)
    print(
        f'{protected.n} rados protected at epsilon={args.epsilon:g}, '
        f'laplace scale {params.noise_scale(protected.n):g}'
    )


def train(args):
    rados = read_rados(args.rados)
    config = BoostConfig(
        T=args.T,
        regularizer=parse_regularizer(args.reg, args.omega),
        clamp_gamma=args.gamma,
        wl_mode=WeakLearnerMode(args.wl),
        select=Selection(args.select),
        seed=args.seed,
    )
    model = boost(rados, config)
    write_model(model, args.out, args.force)
    print(
        f'{model.iterations_run} iterations, kept iteration '
        f'{model.selected_iteration}, support '
        f'{format_percent(support_percent(model.theta))}'
    )


def evaluate(args):
    model = read_model(args.model)
    dataset = load_dataset(
        args.data, args.label_column, args.positive_token, args.seed
    )
    if model.scaling:
        dataset = MinMaxScaling.deserialize(model.scaling).apply(dataset)
    scores, _ = predict_many(model, dataset.features)
    print(
        f'm={dataset.m} error {format_percent(zero_one_error(model, dataset))}'
        f' support {format_percent(support_percent(model.theta))}'
        f' mean margin {format_scientific(float(scores.mean()))}'
    )


def verify_pairs(args):
    reports = verify(args.pair, args.m, args.trials, args.seed)
    for report in reports:
        print('\n'.join(report.lines()))
    if not all(report.passed for report in reports):
        return ExitStatus.Numeric
    return ExitStatus.Success


def experiment(args):
    config = ExperimentConfig.from_file(args.config)
    out = args.out or config.output_path
    if out:
        check_writable(out, force=args.force)
    rows = run_experiment(config, args.threads)
    if out:
        write_results(rows, out, args.force)
    for row in rows:
        epsilon = '' if row.epsilon is None else f' eps={row.epsilon:g}'
        print(
            f'{row.domain} {row.learner} {row.regularizer} '
            f'omega={row.omega:g} {row.select}{epsilon}: error '
            f'{row.test_error_mean:.2f}+-{row.test_error_std:.2f} support '
            f'{row.support_mean:.2f}+-{row.support_std:.2f}'
        )


def dp_budget(args):
    print(format_scientific(epsilon_a(args.epsilon, args.n, args.m)))


def build_parser():
    parser = ArgumentParser(
        prog='cli.py', description='Boosting with Rademacher observations'
    )
    parser.add_argument('--threads', type=positive_int, default=None)
    parser.add_argument('--log-level', default=None)
    commands = parser.add_subparsers(
        dest='command', parser_class=ArgumentParser
    )
    commands.required = True

    def data_flags(command, required=True):
        command.add_argument('--data', required=required)
        command.add_argument('--label-column', default=None)
        command.add_argument('--positive-token', default=None)

    def artifact_flags(command):
        command.add_argument('--out', required=True)
        command.add_argument('--force', action='store_true')
        command.add_argument('--seed', type=int, default=0)

    command = commands.add_parser('gen', help='generate rados from a CSV')
    data_flags(command)
    command.add_argument('--n', type=positive_int, default=None)
    command.add_argument('--mode', choices=GEN_MODES, default='plain')
    command.add_argument('--minmax-scale', action='store_true')
    artifact_flags(command)
    command.set_defaults(handler=gen)

    command = commands.add_parser('protect', help='private rados')
    command.add_argument('--rados', required=True)
    command.add_argument('--epsilon', type=float, required=True)
    command.add_argument('--r-e', type=float, default=None)
    data_flags(command, required=False)
    artifact_flags(command)
    command.set_defaults(handler=protect)

    command = commands.add_parser('train', help='boost a linear model')
    command.add_argument('--rados', required=True)
    command.add_argument('--reg', default='ridge')
    command.add_argument('--omega', type=float, default=0.0)
    command.add_argument('--T', type=positive_int, default=1000)
    command.add_argument('--gamma', type=float, default=0.98)
    command.add_argument('--select', choices=('last', 'best'), default='last')
    command.add_argument(
        '--wl', choices=('first', 'preference'), default='preference'
    )
    artifact_flags(command)
    command.set_defaults(handler=train)

    command = commands.add_parser('eval', help='test a model on a CSV')
    command.add_argument('--model', required=True)
    data_flags(command)
    command.add_argument('--seed', type=int, default=0)
    command.set_defaults(handler=evaluate)

    command = commands.add_parser('verify', help='check the loss pairs')
    command.add_argument('--pair', choices=PAIRS, default='all')
    command.add_argument('--m', type=positive_int, default=6)
    command.add_argument('--trials', type=positive_int, default=100)
    command.add_argument('--seed', type=int, default=0)
    command.set_defaults(handler=verify_pairs)

    command = commands.add_parser('experiment', help='cross-validated grid')
    command.add_argument('--config', required=True)
    command.add_argument('--out', default=None)
    command.add_argument('--force', action='store_true')
    command.set_defaults(handler=experiment)

    command = commands.add_parser('dp-budget', help='print epsilon_a')
    command.add_argument('--epsilon', type=float, required=True)
    command.add_argument('--n', type=positive_int, required=True)
    command.add_argument('--m', type=positive_int, required=True)
    command.set_defaults(handler=dp_budget)
    return parser


def cli(argv=None):
    logging.basicConfig(
        stream=sys.stderr,
        level=settings.log_level(),
        format='%(levelname)s %(name)s: %(message)s',
    )
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            logging.getLogger().setLevel(args.log_level.upper())
        if args.threads is None:
            args.threads = settings.threads()
        status = args.handler(args)
        return int(status or ExitStatus.Success)
    except (LibradoError, ValueError, OSError) as error:
        logger.error('%s', error)
        return int(status_for_error(error))


if __name__ == '__main__':
    load_dotenv()
    sys.exit(cli())

# -*- coding: utf-8 -*-
import argparse
import logging
import sys

import numpy as np

from . import __version__
from .config import RunConfig, validate_metadata
from .exceptions import (BudgetExhausted, ClientException, ExpressionError, LoggedException, SamplingException,
                         ValidationFailed)
from .expression import VarOrder, parse
from .integrator import convergence_study, integrate_direct, integrate_screened
from .model import BOUND_SAFETY, SAFETY_FACTOR, ScalarField, TargetSpec, build_piecewise_proposal, parse_box, validate_target
from .samplers import default_grid, grid_maximum, grmc_sample, principle_trace, srmc_sample
from .stats import chi_square_box, ks_test_1d, summarize
from .plot import principle_svg, scatter_svg
from .writers import read_json, write_csv, write_json

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_VALIDATION = 4

# Options whose values may start with a minus sign, e.g. --box "-5:5,-5:5" or --density "-x^2+1"
EXPRESSION_OPTIONS = ('--box', '--density', '--integrand', '--region', '--cdf', '--reference')


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write('{}: error: {}\n'.format(self.prog, message))
        raise UsageError(message)


def attach_values(args):
    """Rewrites `--box -5:5` as `--box=-5:5` so argparse does not read the value as an option."""
    result = []
    index = 0
    while index < len(args):
        arg = args[index]
        value = args[index + 1] if index + 1 < len(args) else ''
        if arg in EXPRESSION_OPTIONS and value.startswith('-') and not value.startswith('--'):
            result.append('{}={}'.format(arg, value))
            index += 2
            continue
        result.append(arg)
        index += 1
    return result


def exit_code(ex):
    if isinstance(ex, ExpressionError):
        return EXIT_PARSE
    if isinstance(ex, BudgetExhausted):
        return EXIT_BUDGET
    if isinstance(ex, ValidationFailed):
        return EXIT_VALIDATION
    return EXIT_USAGE


def envelope(config, seed, status='ok', error=None, record_timing=False, **fields):
    """
    Creates the metadata document of a run.

    :param config: the RunConfig, echoed in full
    :param seed: the seed actually used
    :param fields: command specific entries; a SampleBatch under "batch" is expanded
    """
    batch = fields.pop('batch', None)
    document = {
        'schema_version': SCHEMA_VERSION,
        'command': config.command,
        'status': status,
        'config': config.to_dict(),
        'seed': seed,
        'wall_time_ms': None,
    }
    if error is not None:
        document['error'] = str(error)
    if batch is not None:
        meta = batch.meta
        document.update({
            'proposals_drawn': meta.proposals_drawn,
            'accepted': meta.accepted,
            'acceptance_rate': meta.acceptance_rate,
            'bound_c': meta.bound_c,
        })
        if record_timing:
            document['wall_time_ms'] = meta.wall_time_ms
    document.update(fields)
    return document


class CLI(object):
    """
    Command line interface of the rejection Monte Carlo toolkit.

    Commands:
     - sample:    draw samples of a density on a box, write CSV + metadata JSON (+ SVG scatter for d = 2)
     - integrate: estimate the integral of a nonnegative integrand over a region inside a box
     - validate:  sample, then run KS (d = 1, needs --cdf) or chi-square (d >= 2); exit 4 on failure
     - bound:     estimate the envelope constant on a grid and report where the maximum sits
     - demo:      SVG of accepted and rejected proposals for a one-dimensional density
     - rerun:     execute a run again from its metadata JSON

    Exit codes: 0 success, 1 usage error, 2 expression parse error, 3 sampling budget exhausted,
    4 validation failure.
    """

    def __init__(self, args=None):
        self.args = attach_values(sys.argv[1:] if args is None else list(args))

    @staticmethod
    def observer(proposals, accepted):
        logger.debug('Progress: %d proposals, %d accepted', proposals, accepted)

    def load(self, config):
        """Parses the shared model inputs of a config."""
        config.validate()
        names = VarOrder.parse(config.vars)
        box = parse_box(config.box)
        if box.dims != names.dims:
            raise ClientException('--vars names {} variable(s) but --box has {} dimension(s)'.format(
                names.dims, box.dims))
        return names, box

    def draw(self, config, names, box):
        """Validates the target and samples from it as the config asks."""
        field = ScalarField.parse(config.density, names)
        target = validate_target(field, box, config.bound_c, check_truncation=config.check_truncation,
                                 grid_per_dim=config.grid, safety=config.safety or BOUND_SAFETY)
        seed = config.seed_value
        if config.proposal_bins:
            proposal = build_piecewise_proposal(field, box, config.proposal_bins,
                                                safety=config.safety or SAFETY_FACTOR)
            batch = grmc_sample(field, proposal, config.n, seed, observer=self.observer)
        else:
            batch = srmc_sample(target, config.n, seed, observer=self.observer)
        return target, batch

    def failed(self, config, ex):
        output = envelope(config, config.seed_value, status='error', error=ex)
        if isinstance(ex, BudgetExhausted):
            output.update({'proposals_drawn': ex.proposals_drawn, 'accepted': ex.accepted,
                           'acceptance_rate': ex.acceptance_rate})
        return LoggedException(ex, output)

    def sample(self, config):
        names, box = self.load(config)
        try:
            target, batch = self.draw(config, names, box)
        except (SamplingException, ClientException) as e:
            raise self.failed(config, e)

        output = envelope(config, config.seed_value, batch=batch, record_timing=config.record_timing,
                          truncation_mass=target.truncation_mass)
        if box.dims >= 2 and config.n >= 2:
            output['summary'] = summarize(batch).to_dict()
        if config.samples_path:
            write_csv(config.samples_path, names.names, batch.points)
        if config.plot_path:
            if box.dims == 2:
                scatter_svg(config.plot_path, batch.points, box, names.names)
            else:
                logger.warning('Scatter plots need two variables; skipping %s', config.plot_path)
        print('Accepted {} of {} proposals (acceptance rate {:.6f})'.format(
            batch.meta.accepted, batch.meta.proposals_drawn, batch.meta.acceptance_rate))
        return output

    def integrate(self, config):
        names, box = self.load(config)
        g = ScalarField.parse(config.integrand, names)
        region = parse(config.region, names)
        seed = config.seed_value
        try:
            if config.sizes:
                rows = convergence_study(g, region, box, config.sizes, config.reps, seed, config.exact)
                study = [row.to_dict() for row in rows]
                if not config.record_timing:
                    for row in study:
                        row['wall_time_ms'] = None
                output = envelope(config, seed, study=study)
                print('{:>10}  {:>22}  {:>12}  {:>12}'.format('n', 'value', 'std_error', 'deviation'))
                for row in rows:
                    deviation = '' if row.deviation is None else '{:.6g}'.format(row.deviation)
                    print('{:>10}  {:>22}  {:>12.6g}  {:>12}'.format(row.n, repr(row.value), row.std_error, deviation))
                return output

            if config.method == 'direct':
                estimate = integrate_direct(g, region, box, config.n, config.reps, seed)
            else:
                estimate = integrate_screened(g, region, box, config.n, config.reps, seed)
        except (SamplingException, ClientException) as e:
            raise self.failed(config, e)

        output = envelope(config, seed, estimate=estimate.to_dict(), bound_c=estimate.bound_c,
                          per_replication_values=estimate.per_replication_values)
        if config.record_timing:
            output['wall_time_ms'] = estimate.wall_time_ms
        print('{!r} +/- {!r}'.format(estimate.value, estimate.std_error))

        if config.method == 'both':
            direct = integrate_direct(g, region, box, config.n, config.reps, seed)
            output['direct'] = direct.to_dict()
            combined = float(np.hypot(estimate.std_error, direct.std_error))
            print('direct: {!r} +/- {!r} (difference {:.3g} combined standard errors)'.format(
                direct.value, direct.std_error, abs(estimate.value - direct.value) / combined if combined else 0.0))
        return output

    def validate(self, config):
        names, box = self.load(config)
        if box.dims == 1 and not (config.cdf and config.cdf.strip()):
            raise ClientException('--cdf is required to validate a one-dimensional density')
        try:
            target, batch = self.draw(config, names, box)
        except (SamplingException, ClientException) as e:
            raise self.failed(config, e)

        if box.dims == 1:
            cdf = parse(config.cdf, names)
            samples = np.sort(batch.points[:, 0])
            report = ks_test_1d(samples, lambda xs: cdf.eval_many(xs.reshape(-1, 1)), config.alpha)
        else:
            reference = target
            if config.reference:
                reference = TargetSpec(ScalarField.parse(config.reference, names), box, target.bound_c)
            report = chi_square_box(batch, reference, config.bins)

        output = envelope(config, config.seed_value, batch=batch, record_timing=config.record_timing,
                          gof=report.to_dict())
        if config.samples_path:
            write_csv(config.samples_path, names.names, batch.points)
        print('{}: statistic {!r}, threshold {!r}{} -> {}'.format(
            report.kind, report.statistic, report.threshold,
            ', dof {}'.format(report.dof) if report.dof is not None else '', 'pass' if report.passed else 'fail'))
        if not report.passed:
            output['status'] = 'error'
            output['error'] = str(ValidationFailed(report))
            raise LoggedException(ValidationFailed(report), output)
        return output

    def bound(self, config):
        names, box = self.load(config)
        field = ScalarField.parse(config.density, names)
        grid = config.grid or default_grid(box.dims)
        safety = config.safety or BOUND_SAFETY
        if safety < 1:
            raise ClientException('--safety must be >= 1')
        maximum, point = grid_maximum(field, box, grid)
        bound_c = safety * maximum
        print('c = {!r} (grid maximum {!r} at {}, safety {!r})'.format(
            bound_c, maximum, ', '.join('{}={!r}'.format(n, v) for n, v in zip(names, point)), safety))
        return envelope(config, config.seed_value, bound_c=bound_c,
                        maximum={'value': maximum, 'point': list(point), 'grid_per_dim': grid})

    def demo(self, config):
        names, box = self.load(config)
        if box.dims != 1:
            raise ClientException('the principle demonstration needs a one-dimensional density')
        field = ScalarField.parse(config.density, names)
        target = validate_target(field, box, config.bound_c, grid_per_dim=config.grid,
                                 safety=config.safety or BOUND_SAFETY)
        trace = principle_trace(target, config.n, config.seed_value)
        accepted = int(np.count_nonzero(trace.accepted))
        principle_svg(config.plot_path or 'demo.svg', trace, target, names.names[0])
        print('Accepted {} of {} proposals'.format(accepted, config.n))
        return envelope(config, config.seed_value, proposals_drawn=config.n, accepted=accepted,
                        acceptance_rate=accepted / config.n, bound_c=target.bound_c)

    def execute(self, config):
        """Runs one command and persists its metadata, including for failed runs."""
        handler = getattr(self, config.command)
        exception = None
        try:
            output = handler(config)
        except LoggedException as e:
            output = e.output
            exception = e.ex

        if output and config.metadata_path:
            validate_metadata(output)
            write_json(config.metadata_path, output)

        if exception:
            raise exception
        return output

    def rerun(self, args):
        document = read_json(args.metadata)
        if 'config' not in document:
            raise ClientException('"{}" has no config echo'.format(args.metadata))
        config = RunConfig.from_dict(document['config'])
        if args.metadata_path:
            config.metadata_path = args.metadata_path
        return self.execute(config)

    def setup_logging(self, debug):
        package_logger = logging.getLogger('rmc')
        for handler in [h for h in package_logger.handlers if getattr(h, 'rmc_cli', False)]:
            package_logger.removeHandler(handler)
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
        handler.rmc_cli = True
        package_logger.addHandler(handler)
        package_logger.setLevel('DEBUG' if debug else 'INFO')

    def build_parser(self):
        parser = _ArgumentParser(prog='rmc', description='Rejection Monte Carlo sampling and integration.')
        parser.add_argument('--version', action='store_true', help='Show version', default=False)
        parser.add_argument('--debug', action='store_true', help='Log debug events to stderr', default=False)

        subparsers = parser.add_subparsers(dest='command', help='Commands')

        def common(sub, n_default=1000):
            sub.add_argument('--vars', required=True, help='comma-separated variable names, e.g. x,y')
            sub.add_argument('--box', required=True, help='support box "lo:hi,lo:hi,..." in variable order')
            sub.add_argument('--n', type=int, default=n_default, help='number of samples (default %(default)s)')
            sub.add_argument('--seed', default='0', help='decimal or 0x-prefixed 64-bit seed (default 0)')
            sub.add_argument('--auto-seed', dest='auto_seed', action='store_true',
                             help='draw the seed from the OS; it is recorded in the metadata')
            sub.add_argument('--metadata', dest='metadata_path', default='run.json', help='metadata JSON path')
            sub.add_argument('--record-timing', dest='record_timing', action='store_true',
                             help='write wall time into the metadata (makes it run dependent)')

        def envelope_flags(sub):
            sub.add_argument('--density', required=True, help='density expression f')
            sub.add_argument('--bound-c', dest='bound_c', type=float, help='envelope constant c >= max f')
            sub.add_argument('--grid', type=int, help='grid points per dimension for bound estimation')
            sub.add_argument('--safety', type=float,
                             help='safety factor on grid maxima (default 1 for c, 1.2 for proposal cells)')

        sample_command = subparsers.add_parser('sample', help='Draw samples of a density.')
        common(sample_command)
        envelope_flags(sample_command)
        sample_command.add_argument('--proposal-bins', dest='proposal_bins', type=int,
                                    help='use a piecewise-uniform proposal with this many bins per dimension')
        sample_command.add_argument('--truncation-check', dest='check_truncation', action='store_true',
                                    help='estimate the density mass outside the box')
        sample_command.add_argument('--out', dest='samples_path', default='samples.csv', help='samples CSV path')
        sample_command.add_argument('--plot', dest='plot_path', nargs='?', const='samples.svg',
                                    help='write an SVG scatter (d = 2)')

        integrate_command = subparsers.add_parser('integrate', help='Integrate over a region by screening.')
        common(integrate_command, n_default=100000)
        integrate_command.add_argument('--integrand', required=True, help='nonnegative integrand g')
        integrate_command.add_argument('--region', required=True, help='region indicator, e.g. "y^2 <= x"')
        integrate_command.add_argument('--reps', type=int, default=10, help='replications (default %(default)s)')
        integrate_command.add_argument('--method', choices=['screened', 'direct', 'both'], default='screened')
        integrate_command.add_argument('--sizes', type=lambda s: [int(v) for v in s.split(',')],
                                       help='comma-separated sample sizes for a convergence table')
        integrate_command.add_argument('--exact', type=float, help='exact value for the convergence table')

        validate_command = subparsers.add_parser('validate', help='Sample and run a goodness-of-fit test.')
        common(validate_command)
        envelope_flags(validate_command)
        validate_command.add_argument('--cdf', help='CDF expression for the KS test (d = 1)')
        validate_command.add_argument('--reference', help='expected density for chi-square (default --density)')
        validate_command.add_argument('--bins', type=int, default=8, help='chi-square bins per dimension')
        validate_command.add_argument('--alpha', type=float, choices=[0.05, 0.01], default=0.01)
        validate_command.add_argument('--proposal-bins', dest='proposal_bins', type=int,
                                      help='use a piecewise-uniform proposal with this many bins per dimension')
        validate_command.add_argument('--out', dest='samples_path', default=None, help='optional samples CSV path')

        bound_command = subparsers.add_parser('bound', help='Estimate the envelope constant on a grid.')
        common(bound_command)
        envelope_flags(bound_command)

        demo_command = subparsers.add_parser('demo', help='SVG of accepted and rejected proposals (d = 1).')
        common(demo_command, n_default=500)
        envelope_flags(demo_command)
        demo_command.add_argument('--plot', dest='plot_path', default='demo.svg', help='SVG path')

        rerun_command = subparsers.add_parser('rerun', help='Execute a run again from its metadata JSON.')
        rerun_command.add_argument('metadata', help='metadata JSON of an earlier run')
        rerun_command.add_argument('--metadata', dest='metadata_path', help='write the new metadata here')

        return parser

    def run(self):
        """Run the CLI tool; returns the exit code."""
        parser = self.build_parser()
        try:
            args = parser.parse_args(self.args)
        except UsageError:
            return EXIT_USAGE

        self.setup_logging(args.debug)

        if args.version:
            print(__version__)
            return EXIT_OK

        if not args.command:
            parser.print_help()
            return EXIT_USAGE

        try:
            if args.command == 'rerun':
                self.rerun(args)
            else:
                config = RunConfig.from_args(args)
                config.samples_path = getattr(args, 'samples_path', None)
                self.execute(config)
        except (ClientException, SamplingException, ValidationFailed) as e:
            code = exit_code(e)
            if code == EXIT_USAGE:
                parser.print_usage(sys.stderr)
            logger.error('%s', e)
            return code
        except ValueError as e:
            parser.print_usage(sys.stderr)
            logger.error('%s', e)
            return EXIT_USAGE
        return EXIT_OK


def main():
    sys.exit(CLI().run())

"""
Config-driven experiment runner. Every mode writes CSV reports into the output directory, each report starts with
the resolved config as ``# `` comment lines; run timestamps are written only to ``metadata.csv``.
"""
import logging
import math
import os
import time

import numpy as np

from django.utils import timezone

from pdldp.converters import get_converter
from pdldp.exception import ConfigInvalidException, InvalidParameterException
from pdldp.forms import ExperimentMode, McMethod, clean_config
from pdldp.rate import min_rate_event, rate_of_path
from pdldp.simulation import simulate_batch
from pdldp.simulation.noise import brownian_batch
from pdldp.skeleton import solve_skeleton
from pdldp.small_time import delta_method_rate, rescale_problem, small_time_rate
from pdldp.verify import (
    EstimateMethod, best_estimate, estimate_event_prob, estimate_schedule, importance_estimate, ldp_slope,
    terminal_moments
)
from pdldp.version import get_version


logger = logging.getLogger(__name__)


ESTIMATE_COLUMNS = ('epsilon', 'theta', 'n', 'n_hits', 'p_hat', 'std_err', 'theta_sq_log_p', 'method', 'upper_bound')
RATE_COLUMNS = ('value', 'infinite', 'iterations', 'final_gradient_norm', 'feasibility_residual', 'converged')


def load_config(path, mode=None, seed=None, output_dir=None):
    """
    Reads and validates a JSON experiment file.
    """
    with open(path, encoding='utf-8') as f:
        data = get_converter('json').decode(f.read())
    if not isinstance(data, dict):
        raise ConfigInvalidException({'config': ['Must be an object.']})
    return clean_config(data, mode=mode, seed=seed, output_dir=output_dir)


def path_header(dim):
    return ['t'] + ['x_{}'.format(i + 1) for i in range(dim)]


def path_rows(path, prefix=()):
    return (list(prefix) + [t] + list(row) for t, row in zip(path.grid.times.tolist(), path.values.tolist()))


class ReportWriter:

    def __init__(self, output_dir, resolved):
        self.output_dir = output_dir
        self.preamble = [get_converter('json').encode(resolved)]
        self.reports = []
        os.makedirs(output_dir, exist_ok=True)

    def write(self, name, header, rows, preamble=True):
        file_path = os.path.join(self.output_dir, name)
        with open(file_path, 'w', encoding='utf-8', newline='') as f:
            get_converter('csv').encode_to_stream(f, {
                'header': header,
                'rows': rows,
                'preamble': self.preamble if preamble else None,
            })
        self.reports.append(file_path)
        logger.info('Report {} written'.format(file_path))
        return file_path


class Experiment:
    """
    Runs one validated ExperimentConfig, the handler of every mode is the method ``run_<mode>``.
    """

    def __init__(self, config):
        self.config = config
        self.writer = ReportWriter(config.output_dir or '.', config.resolved)

    def _get_methods(self):
        method = self.config.mc['method']
        if method == McMethod.BOTH:
            return (EstimateMethod.PLAIN, EstimateMethod.IMPORTANCE)
        return (EstimateMethod(method),)

    def _write_rate_summary(self, result, name='rate_summary.csv'):
        summary = result.to_dict()
        self.writer.write(name, RATE_COLUMNS, [[summary[column] for column in RATE_COLUMNS]])

    def _write_estimates(self, estimates):
        self.writer.write('estimates.csv', ESTIMATE_COLUMNS, (
            [estimate.to_dict()[column] for column in ESTIMATE_COLUMNS] for estimate in estimates
        ))

    def _write_slope_fit(self, schedule, chosen, theory):
        fit = ldp_slope(schedule, chosen, theory)
        logger.info('Slope fit {!r}'.format(fit))
        rows = []
        values = iter(fit.per_point_values)
        for (epsilon, theta), estimate in zip(schedule, chosen):
            if estimate.p_hat > 0:
                rows.append([
                    epsilon, theta, theta ** 2, math.log(estimate.p_hat), next(values), str(estimate.method),
                    fit.fitted_limit, fit.theory_value, fit.rel_gap, fit.degree
                ])
        self.writer.write('slope_fit.csv', (
            'epsilon', 'theta', 'theta_sq', 'log_p_hat', 'theta_sq_log_p', 'method', 'fitted_limit', 'theory_value',
            'rel_gap', 'degree'
        ), rows)
        return fit

    def run_simulate(self):
        config, spec = self.config, self.config.spec
        rows = []
        streams = range(config.n_paths)
        for epsilon, theta in config.schedule:
            increments = brownian_batch(config.grid, spec.dim_noise, config.seed, streams)
            bundle = simulate_batch(
                spec.at_epsilon(epsilon), spec.initial_value(config.x0, epsilon), theta, config.grid, increments
            )
            for i, path in enumerate(bundle):
                rows.extend(path_rows(path, (epsilon, theta, i)))
        self.writer.write('sample_paths.csv', ['epsilon', 'theta', 'path'] + path_header(spec.dim_state), rows)

    def run_skeleton(self):
        config = self.config
        control = config.control(config.grid) if config.control else None
        path = solve_skeleton(config.spec, config.x0, control, config.grid)
        self.writer.write('skeleton.csv', path_header(path.dim), path_rows(path))

    def run_rate(self):
        config = self.config
        result = min_rate_event(config.spec, config.x0, config.event, config.grid, config.optimizer)
        self._write_rate_summary(result)
        self.writer.write('minimizer_path.csv', path_header(config.spec.dim_state), path_rows(result.minimizer_path))
        if config.target:
            target = config.target.build(config.grid, config.x0)
            self.writer.write('target_rate.csv', ('target_rate',), [[rate_of_path(config.spec, config.x0, target)]])
        return result

    def run_verify(self):
        config = self.config
        result = self.run_rate()
        rows = estimate_schedule(
            config.spec, config.x0, config.event, config.grid, config.schedule, config.mc['n_samples'], config.seed,
            self._get_methods(), result.minimizer_control
        )
        self._write_estimates([estimate for row in rows for estimate in row.values()])
        self._write_slope_fit(config.schedule, [best_estimate(row) for row in rows], result)

    def run_smalltime(self):
        config, spec, grid = self.config, self.config.spec, self.config.grid
        n, seed = config.mc['n_samples'], config.seed
        moments, estimates = [], []
        theory = None
        if config.event is not None:
            theory = min_rate_event(spec.without_drift(), config.x0, config.event, grid, config.optimizer)
            self._write_rate_summary(theory)
        methods = self._get_methods()

        for epsilon, _ in config.schedule:
            problem = rescale_problem(spec, config.x0, epsilon, grid)
            mean, variance = terminal_moments(problem.spec, problem.x0, problem.theta, grid, n, seed)
            for i in range(spec.dim_state):
                moments.append([epsilon, problem.theta, n, i + 1, mean[i].item(), variance[i].item()])
            if theory is not None:
                row = {}
                if EstimateMethod.PLAIN in methods:
                    row[EstimateMethod.PLAIN] = estimate_event_prob(
                        problem.spec, problem.x0, problem.theta, config.event, grid, n, seed, epsilon
                    )
                if EstimateMethod.IMPORTANCE in methods:
                    row[EstimateMethod.IMPORTANCE] = importance_estimate(
                        problem.spec, problem.x0, problem.theta, config.event, grid, theory.minimizer_control, n,
                        seed, epsilon
                    )
                estimates.append(row)

        self.writer.write(
            'small_time_moments.csv', ('epsilon', 'theta', 'n', 'component', 'mean', 'variance'), moments
        )
        target_rate = None
        if config.target:
            target_rate = small_time_rate(spec, config.x0, config.target.build(grid, config.x0))
        self.writer.write('small_time_rate.csv', ('event_rate', 'event_rate_infinite', 'target_rate'), [[
            None if theory is None else theory.value, None if theory is None else theory.infinite, target_rate
        ]])
        if theory is not None:
            self._write_estimates([estimate for row in estimates for estimate in row.values()])
            chosen = [best_estimate(row) for row in estimates]
            self._write_slope_fit([(estimate.epsilon, estimate.theta) for estimate in chosen], chosen, theory)

    def run_delta(self):
        config, fspec = self.config, self.config.functional
        jacobian_check = fspec.check_jacobian(config.x0)
        if jacobian_check is False:
            logger.warning('Declared Jacobian does not match finite differences of the functional')
        target = config.target.build(config.grid, np.zeros(fspec.output_dim))
        rate = delta_method_rate(fspec, config.spec, config.x0, target)
        self.writer.write('delta_rate.csv', ('delta_rate', 'infinite', 'jacobian_check'), [
            [rate, rate == np.inf, jacobian_check]
        ])

    def run(self):
        started, clock = timezone.now(), time.monotonic()
        handler = getattr(self, 'run_{}'.format(self.config.mode), None)
        if handler is None:
            raise InvalidParameterException('Unknown mode "{}"'.format(self.config.mode))
        logger.info('Running experiment in mode {}'.format(self.config.mode))
        handler()
        reports = list(self.writer.reports)
        self.writer.write('metadata.csv', ('key', 'value'), [
            ['version', get_version()],
            ['mode', str(self.config.mode)],
            ['seed', self.config.seed],
            ['started_at', started.isoformat()],
            ['finished_at', timezone.now().isoformat()],
            ['elapsed_seconds', time.monotonic() - clock],
            ['reports', ';'.join(os.path.basename(report) for report in reports)],
        ], preamble=False)
        return self.writer.reports


def run_experiment(config):
    """
    :param config: validated ExperimentConfig.
    :return: paths of the written reports.
    """
    if config.mode not in set(ExperimentMode):
        raise InvalidParameterException('Unknown mode "{}"'.format(config.mode))
    return Experiment(config).run()

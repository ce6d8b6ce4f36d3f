"""
Monte Carlo verification of the large deviation limit theta^2 log P(X in event) -> -inf I.

Sample i always uses noise stream i and samples are processed in chunks of ``MC_CHUNK_SIZE`` in stream order, so
estimates are bit-identical for a given seed however the chunks are scheduled.
"""
import logging
import math

import numpy as np

from scipy.stats import beta

from pdldp.conf import settings
from pdldp.exception import InvalidParameterException, SlopeFitException
from pdldp.simulation import simulate_batch, girsanov_log_weights
from pdldp.simulation.noise import brownian_batch
from pdldp.utils import StrEnum


logger = logging.getLogger(__name__)


class EstimateMethod(StrEnum):

    PLAIN = 'plain'
    IMPORTANCE = 'importance'


class ProbEstimate:

    def __init__(self, epsilon, theta, p_hat, std_err, n_samples, n_hits, method, upper_bound=None):
        self.epsilon = epsilon
        self.theta = theta
        self.p_hat = p_hat
        self.std_err = std_err
        self.n_samples = n_samples
        self.n_hits = n_hits
        self.method = EstimateMethod(method)
        self.upper_bound = upper_bound

    @property
    def theta_sq_log_p(self):
        return self.theta ** 2 * math.log(self.p_hat) if self.p_hat > 0 else None

    @property
    def relative_error(self):
        return self.std_err / self.p_hat if self.p_hat > 0 else math.inf

    def to_dict(self):
        return {
            'epsilon': self.epsilon,
            'theta': self.theta,
            'n': self.n_samples,
            'n_hits': self.n_hits,
            'p_hat': self.p_hat,
            'std_err': self.std_err,
            'theta_sq_log_p': self.theta_sq_log_p,
            'method': str(self.method),
            'upper_bound': self.upper_bound,
        }

    def __repr__(self):
        return '<ProbEstimate {} theta={!r} p_hat={!r} std_err={!r}>'.format(
            self.method, self.theta, self.p_hat, self.std_err
        )


class SlopeFit:

    def __init__(self, points, fitted_limit, per_point_values, theory_value, degree):
        self.points = points
        self.fitted_limit = fitted_limit
        self.per_point_values = per_point_values
        self.theory_value = theory_value
        self.degree = degree

    @property
    def rel_gap(self):
        if not math.isfinite(self.theory_value):
            return math.inf
        return abs(self.fitted_limit - self.theory_value) / max(abs(self.theory_value), 1e-12)

    def __repr__(self):
        return '<SlopeFit fitted_limit={!r} theory_value={!r} rel_gap={!r}>'.format(
            self.fitted_limit, self.theory_value, self.rel_gap
        )


def clopper_pearson_upper(n_hits, n, level=None):
    """One-sided upper confidence limit of a binomial proportion."""
    level = settings.CONFIDENCE_LEVEL if level is None else level
    if n_hits >= n:
        return 1.0
    return float(beta.ppf(1.0 - level, n_hits + 1, n - n_hits))


def _check_samples(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameterException('number of samples must be a positive integer')
    return int(n)


def _chunks(n):
    size = settings.MC_CHUNK_SIZE
    for start in range(0, n, size):
        yield range(start, min(start + size, n))


def estimate_event_prob(spec, x0, theta, event, grid, n, seed, epsilon=None):
    """
    Plain Monte Carlo: fraction of n simulated paths inside the event.

    :return: ProbEstimate with binomial standard error and Clopper-Pearson upper bound.
    """
    n = _check_samples(n)
    event.check_dim(spec.dim_state)
    n_hits = 0
    for streams in _chunks(n):
        increments = brownian_batch(grid, spec.dim_noise, seed, streams)
        bundle = simulate_batch(spec, x0, theta, grid, increments)
        n_hits += int(np.count_nonzero(event.contains(bundle.values)))
        logger.debug('Plain estimate theta={!r}: {} of {} samples done'.format(theta, streams.stop, n))

    p_hat = n_hits / n
    estimate = ProbEstimate(
        theta ** 2 if epsilon is None else epsilon, theta, p_hat, math.sqrt(p_hat * (1.0 - p_hat) / n), n, n_hits,
        EstimateMethod.PLAIN, clopper_pearson_upper(n_hits, n)
    )
    if n_hits == 0:
        logger.warning('No sample hit {} at theta={!r}, p <= {!r} at level {!r}'.format(
            event, theta, estimate.upper_bound, settings.CONFIDENCE_LEVEL
        ))
    return estimate


def importance_estimate(spec, x0, theta, event, grid, tilt, n, seed, epsilon=None):
    """
    Importance sampling with the deterministic tilt nu: paths follow the controlled equation and every hit is
    weighted by the Girsanov density exp(-(1 / theta) sum nu dW - (1 / (2 theta^2)) sum |nu|^2 dt).
    """
    if not theta > 0:
        raise InvalidParameterException('importance sampling needs theta > 0')
    if tilt.grid != grid:
        raise InvalidParameterException('tilt grid {!r} does not match {!r}'.format(tilt.grid, grid))
    n = _check_samples(n)
    event.check_dim(spec.dim_state)
    total, total_sq, n_hits = 0.0, 0.0, 0
    for streams in _chunks(n):
        increments = brownian_batch(grid, spec.dim_noise, seed, streams)
        bundle = simulate_batch(spec, x0, theta, grid, increments, nu=tilt)
        hits = event.contains(bundle.values)
        weights = np.where(hits, np.exp(girsanov_log_weights(tilt.values, theta, increments, grid.dt)), 0.0)
        total += float(np.sum(weights))
        total_sq += float(np.sum(weights ** 2))
        n_hits += int(np.count_nonzero(hits))
        logger.debug('Importance estimate theta={!r}: {} of {} samples done'.format(theta, streams.stop, n))

    p_hat = total / n
    variance = max(total_sq / n - p_hat ** 2, 0.0)
    return ProbEstimate(
        theta ** 2 if epsilon is None else epsilon, theta, p_hat, math.sqrt(variance / n), n, n_hits,
        EstimateMethod.IMPORTANCE
    )


def ldp_slope(schedule, estimates, theory):
    """
    Extrapolates theta^2 log p_hat to theta -> 0 with a least-squares polynomial in theta of degree
    min(SLOPE_FIT_DEGREE, points - 1) and compares the intercept with -inf I.

    :param schedule: SmallNoiseSchedule matching the estimates.
    :param estimates: one ProbEstimate per schedule entry.
    :param theory: RateResult of the event or the rate value itself.
    """
    if len(estimates) != len(schedule):
        raise InvalidParameterException('one estimate per schedule entry is required')
    points = [
        (theta ** 2, math.log(estimate.p_hat), theta)
        for (_, theta), estimate in zip(schedule, estimates) if estimate.p_hat > 0
    ]
    if len(points) < 2:
        raise SlopeFitException()

    thetas = np.array([theta for _, _, theta in points])
    values = np.array([theta_sq * log_p for theta_sq, log_p, _ in points])
    degree = min(settings.SLOPE_FIT_DEGREE, len(points) - 1)
    coefficients = np.polynomial.polynomial.polyfit(thetas, values, degree)
    theory_value = -(theory.value if hasattr(theory, 'value') else float(theory))
    return SlopeFit(
        [(theta_sq, log_p) for theta_sq, log_p, _ in points], float(coefficients[0]), values.tolist(), theory_value,
        degree
    )


def estimate_schedule(spec, x0, event, grid, schedule, n, seed, methods=(EstimateMethod.PLAIN,), tilt=None):
    """
    Estimates along the schedule with the epsilon family (b_eps, sigma_eps, X_0^eps) of every entry.

    :return: list of dicts method -> ProbEstimate, one per entry.
    """
    methods = [EstimateMethod(method) for method in methods]
    if EstimateMethod.IMPORTANCE in methods and tilt is None:
        raise InvalidParameterException('importance sampling needs a tilt')
    rows = []
    for epsilon, theta in schedule:
        concrete = spec.at_epsilon(epsilon)
        start = spec.initial_value(x0, epsilon)
        row = {}
        if EstimateMethod.PLAIN in methods:
            row[EstimateMethod.PLAIN] = estimate_event_prob(concrete, start, theta, event, grid, n, seed, epsilon)
        if EstimateMethod.IMPORTANCE in methods:
            row[EstimateMethod.IMPORTANCE] = importance_estimate(
                concrete, start, theta, event, grid, tilt, n, seed, epsilon
            )
        for estimate in row.values():
            logger.info('Schedule point epsilon={!r}: {!r}'.format(epsilon, estimate))
        rows.append(row)
    return rows


def best_estimate(row):
    """Estimate with the smallest relative standard error, plain first on ties."""
    return min(row.values(), key=lambda estimate: (estimate.relative_error, estimate.method != EstimateMethod.PLAIN))


def terminal_moments(spec, x0, theta, grid, n, seed):
    """
    Empirical mean and unbiased variance of every component of X(T) over n simulated paths.
    """
    n = _check_samples(n)
    if n < 2:
        raise InvalidParameterException('moments need at least two samples')
    total = np.zeros(spec.dim_state)
    total_sq = np.zeros(spec.dim_state)
    for streams in _chunks(n):
        increments = brownian_batch(grid, spec.dim_noise, seed, streams)
        terminal = simulate_batch(spec, x0, theta, grid, increments).terminal
        total += np.sum(terminal, axis=0)
        total_sq += np.sum(terminal ** 2, axis=0)
    mean = total / n
    variance = (total_sq - n * mean ** 2) / (n - 1)
    return mean, variance

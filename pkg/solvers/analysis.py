"""Analysis-LASSO solvers: smoothing (SFISTA), decomposition (DFISTA) and continuation.

Problem:  min_x  1/2 ||A x - b||^2 + lam ||D* x||_1

SFISTA runs MFISTA on the envelope-smoothed objective with no nonsmooth part.
DFISTA splits z = D* x into a penalized copy and runs MFISTA on the joint
vector w = [x; z], applying the l1 prox on z only.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from misc.errors import DimensionError
from misc.utils import relative_error
from operators.linops import lipschitz_factor
from solvers.mfista import CompositeProblem, IterateTrace, mfista
from solvers.prox import EnvelopeParams, envelope_gradient, envelope_value, soft_threshold

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisProblem:
    A: object
    b: np.ndarray = field(repr=False, compare=False)
    frame: object
    lam: float

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, 'b', b)
        if b.shape != (self.A.out_dim,):
            raise DimensionError('b has shape {}, A has {} rows'.format(b.shape, self.A.out_dim))
        if self.A.in_dim != self.frame.n:
            raise DimensionError('A acts on R^{} but the frame on R^{}'.format(self.A.in_dim, self.frame.n))
        if not self.lam > 0:
            raise ValueError('lambda must be > 0, got {}'.format(self.lam))

    @property
    def n(self):
        return self.frame.n

    @property
    def p(self):
        return self.frame.p


@dataclass(frozen=True)
class SolverConfig:
    mu: Optional[float] = None
    rho: Optional[float] = None
    max_iters: int = 3000
    x0: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    z0: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    objective_tol: float = 0.0
    seed: int = 0
    monotone: bool = True
    printed_gradient: bool = False
    spectral_iters: int = 200
    record_seconds: bool = True
    log_every: int = 0

    def __post_init__(self):
        if (self.mu is None) == (self.rho is None):
            raise ValueError('exactly one of mu and rho must be set')
        for name in ('mu', 'rho'):
            value = getattr(self, name)
            if value is not None and not (value > 0 and math.isfinite(value)):
                raise ValueError('{} must be a finite positive number, got {}'.format(name, value))
        if self.max_iters < 1:
            raise ValueError('max_iters must be >= 1, got {}'.format(self.max_iters))
        if self.objective_tol < 0:
            raise ValueError('objective_tol must be >= 0, got {}'.format(self.objective_tol))


def operator_norms(problem, iters=200, seed=0):
    """(1.01 sigma(A), ||D||) where ||D|| is exactly 1 for a tight frame."""
    norm_a = lipschitz_factor(problem.A, iters=iters, seed=seed)
    if problem.frame.is_tight:
        norm_d = 1.0
    else:
        norm_d = lipschitz_factor(problem.frame.d_star, iters=iters, seed=seed)
    return norm_a, norm_d


def _residual(problem, x):
    return problem.A.apply(x) - problem.b


def alasso_objective(problem, x):
    r = _residual(problem, x)
    return 0.5 * float(np.dot(r, r)) + problem.lam * float(np.sum(np.abs(problem.frame.d_star.apply(x))))


def ralasso_objective(problem, x, z, rho):
    r = _residual(problem, x)
    gap = problem.frame.d_star.apply(x) - np.asarray(z, dtype=float)
    return (0.5 * float(np.dot(r, r)) + problem.lam * float(np.sum(np.abs(z)))
            + 0.5 * rho * float(np.dot(gap, gap)))


def smoothed_objective(problem, x, mu):
    """H_mu(x) = 1/2 ||Ax - b||^2 + g_mu(D* x)."""
    r = _residual(problem, x)
    params = EnvelopeParams(problem.lam, mu)
    return 0.5 * float(np.dot(r, r)) + envelope_value(problem.frame.d_star.apply(x), params)


def smoothed_gradient(problem, x, mu):
    params = EnvelopeParams(problem.lam, mu)
    d_star = problem.frame.d_star
    return (problem.A.apply_adjoint(_residual(problem, x))
            + d_star.apply_adjoint(envelope_gradient(d_star.apply(x), params)))


def lipschitz_g(lam, p):
    """Lipschitz constant of lam*||.||_1 on R^p w.r.t. the Euclidean norm."""
    return lam * math.sqrt(p)


def feasibility_bound(problem, x0, rho):
    """sqrt(2 H(x0) / rho), valid for DFISTA started at z0 = D* x0."""
    return math.sqrt(2.0 * alasso_objective(problem, x0) / rho)


def _monitor(problem, x_true, n=None):
    def monitor(w):
        x = w if n is None else w[:n]
        out = {'true_objective': alasso_objective(problem, x)}
        if x_true is not None:
            out['rel_error'] = relative_error(x, x_true)
        if n is not None:
            out['residual'] = float(np.linalg.norm(w[n:] - problem.frame.d_star.apply(x)))
        return out
    return monitor


def _initial_x(problem, config):
    if config.x0 is None:
        return np.zeros(problem.n)
    x0 = np.asarray(config.x0, dtype=float)
    if x0.shape != (problem.n,):
        raise DimensionError('x0 has shape {}, expected ({},)'.format(x0.shape, problem.n))
    return x0


def _finish(trace, config):
    if not config.record_seconds:
        trace.seconds = [0.0] * len(trace)
    return trace


def sfista(problem, config, x_true=None):
    """MFISTA on the smoothed objective H_mu with G = 0."""
    if config.mu is None:
        raise ValueError('sfista needs config.mu')
    mu = config.mu
    norm_a, norm_d = operator_norms(problem, config.spectral_iters, config.seed)
    lipschitz = norm_a ** 2 + norm_d ** 2 / mu
    params = EnvelopeParams(problem.lam, mu)
    d_star = problem.frame.d_star

    def value(x):
        return smoothed_objective(problem, x, mu)

    def grad(x):
        return smoothed_gradient(problem, x, mu)

    mixed = None
    if config.printed_gradient:
        # envelope gradient taken at the incumbent instead of the extrapolated point
        def mixed(y, x_prev):
            return (problem.A.apply_adjoint(_residual(problem, y))
                    + d_star.apply_adjoint(envelope_gradient(d_star.apply(x_prev), params)))

    logger.info('[SFISTA] n=%d p=%d lam=%.3e mu=%.3e L=%.4e', problem.n, problem.p, problem.lam, mu, lipschitz)
    composite = CompositeProblem.smooth_only(value, grad, lipschitz)
    trace = mfista(composite, _initial_x(problem, config), config.max_iters, monotone=config.monotone,
                   monitor=_monitor(problem, x_true), objective_tol=config.objective_tol,
                   mixed_gradient=mixed, log_every=config.log_every, label='SFISTA')
    trace.method = 'sfista'
    trace.stage_params = [mu]
    return _finish(trace, config)


def dfista(problem, config, x_true=None):
    """MFISTA on G_rho(x, z) over the joint vector [x; z]; prox acts on z only."""
    if config.rho is None:
        raise ValueError('dfista needs config.rho')
    rho = config.rho
    n, lam = problem.n, problem.lam
    d_star = problem.frame.d_star
    norm_a, norm_d = operator_norms(problem, config.spectral_iters, config.seed)
    lipschitz = norm_a ** 2 + rho * (1.0 + norm_d ** 2)

    x0 = _initial_x(problem, config)
    if config.z0 is None:
        z0 = d_star.apply(x0)
    else:
        z0 = np.asarray(config.z0, dtype=float)
        if z0.shape != (problem.p,):
            raise DimensionError('z0 has shape {}, expected ({},)'.format(z0.shape, problem.p))

    def value(w):
        x, z = w[:n], w[n:]
        r = _residual(problem, x)
        gap = d_star.apply(x) - z
        return 0.5 * float(np.dot(r, r)) + 0.5 * rho * float(np.dot(gap, gap))

    def grad(w):
        x, z = w[:n], w[n:]
        gap = d_star.apply(x) - z
        gx = problem.A.apply_adjoint(_residual(problem, x)) + rho * d_star.apply_adjoint(gap)
        return np.concatenate([gx, -rho * gap])

    def prox(w, step):
        return np.concatenate([w[:n], soft_threshold(w[n:], lam * step)])

    def nonsmooth(w):
        return lam * float(np.sum(np.abs(w[n:])))

    logger.info('[DFISTA] n=%d p=%d lam=%.3e rho=%.3e L=%.4e', n, problem.p, lam, rho, lipschitz)
    composite = CompositeProblem(value, grad, prox, nonsmooth, lipschitz)
    trace = mfista(composite, np.concatenate([x0, z0]), config.max_iters, monotone=config.monotone,
                   monitor=_monitor(problem, x_true, n=n), objective_tol=config.objective_tol,
                   log_every=config.log_every, label='DFISTA')
    w = trace.x
    trace.x, trace.z = w[:n], w[n:]
    trace.method = 'dfista'
    trace.stage_params = [rho]
    return _finish(trace, config)


def continuation_schedule(mu0, muf, gamma):
    """mu0, mu0/gamma, ... while above muf, then muf itself."""
    if not (muf > 0 and mu0 >= muf):
        raise ValueError('continuation needs mu0 >= muf > 0, got mu0={}, muf={}'.format(mu0, muf))
    if not gamma > 1:
        raise ValueError('continuation needs gamma > 1, got {}'.format(gamma))
    mus = []
    mu = float(mu0)
    # relative slack absorbs rounding in repeated division
    while mu > muf * (1.0 + 1e-12):
        mus.append(mu)
        mu /= gamma
    mus.append(float(muf))
    return mus


def continuation(problem, mu0, muf, gamma, inner_iters, method='sfista', x_true=None, x0=None,
                 **config_kwargs):
    """Warm-started stages over a decreasing mu schedule.

    inner_iters is one iteration count for every stage or one per stage.
    method='dfista' runs the same schedule in rho = 1/mu, restarting each
    stage from z0 = D* x of the previous stage.
    """
    if method not in ('sfista', 'dfista'):
        raise ValueError("method must be 'sfista' or 'dfista', got {!r}".format(method))
    schedule = continuation_schedule(mu0, muf, gamma)
    if np.ndim(inner_iters) == 0:
        stage_iters = [int(inner_iters)] * len(schedule)
    else:
        stage_iters = [int(k) for k in inner_iters]
        if len(stage_iters) != len(schedule):
            raise ValueError('got {} stage iteration counts for a {}-stage schedule'.format(
                len(stage_iters), len(schedule)))
    x = np.zeros(problem.n) if x0 is None else np.asarray(x0, dtype=float)
    combined = IterateTrace(method='continuation-' + method)
    for stage, (mu, iters) in enumerate(zip(schedule, stage_iters)):
        if method == 'sfista':
            config = SolverConfig(mu=mu, max_iters=iters, x0=x, **config_kwargs)
            trace = sfista(problem, config, x_true=x_true)
            combined.stage_params.append(mu)
        else:
            config = SolverConfig(rho=1.0 / mu, max_iters=iters, x0=x, **config_kwargs)
            trace = dfista(problem, config, x_true=x_true)
            combined.stage_params.append(1.0 / mu)
        if stage == 0:
            combined.initial_objective = trace.initial_objective
        combined.extend(trace, stage)
        x = trace.x
        logger.info('[Stage %d/%d] [param: %.3e] [objective: %.6e]', stage + 1, len(schedule),
                    combined.stage_params[-1], trace.objective[-1])
    return combined

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from misc.utils import check_finite

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['iter', 'objective', 'true_objective', 'rel_error', 't_k', 'seconds']
# consecutive small relative changes needed before an early stop
PATIENCE = 10


@dataclass(frozen=True)
class CompositeProblem:
    """min F(x) + G(x) with F smooth (gradient Lipschitz <= lipschitz_bound)."""
    smooth_value: Callable
    smooth_grad: Callable
    prox_nonsmooth: Callable
    nonsmooth_value: Callable
    lipschitz_bound: float

    def __post_init__(self):
        if not self.lipschitz_bound > 0:
            raise ValueError('lipschitz_bound must be > 0, got {}'.format(self.lipschitz_bound))

    @classmethod
    def smooth_only(cls, value, grad, lipschitz_bound):
        return cls(value, grad, lambda x, step: x, lambda x: 0.0, lipschitz_bound)

    def objective(self, x):
        return float(self.smooth_value(x)) + float(self.nonsmooth_value(x))


@dataclass
class IterateTrace:
    objective: List[float] = field(default_factory=list)
    true_objective: List[float] = field(default_factory=list)
    rel_error: List[float] = field(default_factory=list)
    t_k: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    stage: List[int] = field(default_factory=list)
    residual: List[float] = field(default_factory=list)
    stage_params: List[float] = field(default_factory=list)
    initial_objective: float = math.nan
    x: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    method: str = ''

    def __len__(self):
        return len(self.objective)

    def record(self, objective, t_k, seconds, true_objective=math.nan, rel_error=math.nan,
               residual=math.nan, stage=0):
        self.objective.append(float(objective))
        self.true_objective.append(float(true_objective))
        self.rel_error.append(float(rel_error))
        self.t_k.append(float(t_k))
        self.seconds.append(float(seconds))
        self.residual.append(float(residual))
        self.stage.append(int(stage))

    def extend(self, other, stage):
        """Append another run as stage `stage`; seconds keep accumulating."""
        offset = self.seconds[-1] if self.seconds else 0.0
        for k in range(len(other)):
            self.record(other.objective[k], other.t_k[k], offset + other.seconds[k],
                        other.true_objective[k], other.rel_error[k], other.residual[k], stage)
        self.x, self.z = other.x, other.z

    def column(self, name):
        return np.asarray(getattr(self, name), dtype=float)

    @property
    def num_stages(self):
        return len(set(self.stage)) if self.stage else 0

    def stage_boundaries(self):
        # first iteration index (0-based) of each stage
        return [k for k in range(len(self.stage)) if k == 0 or self.stage[k] != self.stage[k - 1]]

    def is_monotone(self, rtol=0.0):
        obj = self.column('objective')
        stages = np.asarray(self.stage)
        for s in np.unique(stages):
            seg = obj[stages == s]
            if np.any(np.diff(seg) > rtol * np.maximum(np.abs(seg[:-1]), 1e-300)):
                return False
        return True

    def write_csv(self, path, include_seconds=True):
        columns = list(TRACE_COLUMNS)
        with_stage = self.num_stages > 1
        with_residual = not np.all(np.isnan(self.column('residual'))) if len(self) else False
        if with_stage:
            columns.append('stage')
        if with_residual:
            columns.append('residual')
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            for k in range(len(self)):
                row = [k + 1, repr(self.objective[k]), repr(self.true_objective[k]), repr(self.rel_error[k]),
                       repr(self.t_k[k]), repr(self.seconds[k] if include_seconds else 0.0)]
                if with_stage:
                    row.append(self.stage[k])
                if with_residual:
                    row.append(repr(self.residual[k]))
                writer.writerow(row)

    @classmethod
    def read_csv(cls, path):
        trace = cls()
        with open(path, newline='') as f:
            for row in csv.DictReader(f):
                trace.record(float(row['objective']), float(row['t_k']), float(row['seconds']),
                             float(row['true_objective']), float(row['rel_error']),
                             float(row.get('residual', 'nan')), int(row.get('stage', 0)))
        return trace


def next_momentum(t):
    return (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0


def mfista_rate_bound(lipschitz, x0, x_hat, k):
    """2 L ||x0 - x_hat||^2 / (k+1)^2."""
    diff = np.asarray(x0, dtype=float) - np.asarray(x_hat, dtype=float)
    return 2.0 * lipschitz * float(np.dot(diff, diff)) / (k + 1) ** 2


class _Stopper(object):
    def __init__(self, tol):
        self.tol = tol
        self.count = 0

    def update(self, f_old, f_new):
        if self.tol <= 0:
            return False
        change = abs(f_old - f_new) / max(abs(f_old), 1e-300)
        self.count = self.count + 1 if change < self.tol else 0
        return self.count >= PATIENCE


def _log_progress(label, k, iters, objective, extra):
    msg = '[{} {}/{}] [objective: {:.6e}]'.format(label, k, iters, objective)
    if extra.get('true_objective') is not None:
        msg += ' [true: {:.6e}]'.format(extra['true_objective'])
    if extra.get('rel_error') is not None and not math.isnan(extra['rel_error']):
        msg += ' [rel err: {:.4e}]'.format(extra['rel_error'])
    return msg


def proximal_gradient(problem, x0, iters, monitor=None, objective_tol=0.0, log_every=0, label='PG'):
    """x_k = prox_{G/L}(x_{k-1} - grad F(x_{k-1}) / L)."""
    L = float(problem.lipschitz_bound)
    x = np.array(x0, dtype=float)
    trace = IterateTrace(method='proximal_gradient', initial_objective=problem.objective(x))
    f_prev = trace.initial_objective
    stopper = _Stopper(objective_tol)
    start = time.perf_counter()
    for k in range(1, iters + 1):
        x = problem.prox_nonsmooth(x - problem.smooth_grad(x) / L, 1.0 / L)
        f_x = problem.objective(x)
        check_finite(k, x, f_x)
        extra = monitor(x) if monitor else {}
        trace.record(f_x, 1.0, time.perf_counter() - start, **extra)
        if log_every and k % log_every == 0:
            logger.debug(_log_progress(label, k, iters, f_x, extra))
        if stopper.update(f_prev, f_x):
            logger.info('[%s] early stop at iteration %d', label, k)
            break
        f_prev = f_x
    trace.x = x
    logger.info(_log_progress(label, len(trace), iters, trace.objective[-1], {}))
    return trace


def mfista(problem, x0, iters, monotone=True, monitor=None, objective_tol=0.0, mixed_gradient=None,
           log_every=0, label='MFISTA'):
    """Monotone FISTA; monotone=False gives the plain FISTA recursion.

    mixed_gradient(y, x_prev), when given, replaces grad F(y); it exists to
    reproduce variants that evaluate part of the gradient at the incumbent.
    """
    L = float(problem.lipschitz_bound)
    x_prev = np.array(x0, dtype=float)
    y = x_prev.copy()
    t = 1.0
    f_prev = problem.objective(x_prev)
    trace = IterateTrace(method='mfista' if monotone else 'fista', initial_objective=f_prev)
    stopper = _Stopper(objective_tol)
    start = time.perf_counter()
    for k in range(1, iters + 1):
        grad = problem.smooth_grad(y) if mixed_gradient is None else mixed_gradient(y, x_prev)
        z = problem.prox_nonsmooth(y - grad / L, 1.0 / L)
        t_next = next_momentum(t)
        f_z = problem.objective(z)
        check_finite(k, z, f_z)
        if monotone:
            # argmin{F+G : x = z_k, x_{k-1}}
            if f_z <= f_prev:
                x, f_x = z, f_z
            else:
                x, f_x = x_prev, f_prev
            y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev)
        else:
            x, f_x = z, f_z
            y = x + ((t - 1.0) / t_next) * (x - x_prev)
        extra = monitor(x) if monitor else {}
        trace.record(f_x, t, time.perf_counter() - start, **extra)
        if log_every and k % log_every == 0:
            logger.debug(_log_progress(label, k, iters, f_x, extra))
        # candidate against incumbent: a rejected step is not a stall
        done = stopper.update(f_prev, f_z)
        x_prev, f_prev, t = x, f_x, t_next
        if done:
            logger.info('[%s] early stop at iteration %d', label, k)
            break
    trace.x = x_prev
    logger.info(_log_progress(label, len(trace), iters, f_prev, {}))
    return trace

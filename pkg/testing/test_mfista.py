import math

import numpy as np
import pytest

from misc.errors import SolverDivergence
from solvers.mfista import (CompositeProblem, IterateTrace, mfista, mfista_rate_bound, next_momentum,
                            proximal_gradient)
from solvers.prox import soft_threshold


def _quadratic(c, lipschitz=1.0):
    c = np.asarray(c, dtype=float)
    return CompositeProblem.smooth_only(lambda x: 0.5 * float(np.sum((x - c) ** 2)), lambda x: x - c, lipschitz)


def _lasso(m, n, lam, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    return CompositeProblem(
        lambda x: 0.5 * float(np.sum((a.dot(x) - b) ** 2)),
        lambda x: a.T.dot(a.dot(x) - b),
        lambda x, step: soft_threshold(x, lam * step),
        lambda x: lam * float(np.sum(np.abs(x))),
        np.linalg.norm(a, 2) ** 2)


def _scalar_lasso(lipschitz):
    # min 1/2 (x-3)^2 + |x|, minimizer 2
    return CompositeProblem(lambda x: 0.5 * float((x[0] - 3.0) ** 2), lambda x: x - 3.0,
                            lambda x, step: soft_threshold(x, step), lambda x: float(abs(x[0])), lipschitz)


def test_momentum_sequence():
    t2 = next_momentum(1.0)
    assert abs(t2 - (1 + math.sqrt(5)) / 2) < 1e-15
    t3 = next_momentum(t2)
    assert t3 == (1 + math.sqrt(1 + 4 * t2 * t2)) / 2
    assert abs(t3 - 2.193527) < 1e-6


def test_gradient_step_solves_quadratic():
    c = np.array([1.0, -2.0, 0.5])
    trace = proximal_gradient(_quadratic(c), np.zeros(3), 1)
    np.testing.assert_array_equal(trace.x, c)


def test_single_step_is_pure_prox():
    tau, lipschitz = 0.7, 2.0
    problem = CompositeProblem(lambda x: 0.0, np.zeros_like, lambda x, step: soft_threshold(x, tau * step),
                               lambda x: tau * float(np.sum(np.abs(x))), lipschitz)
    x0 = np.array([2.0, -0.1, 0.35, -1.0])
    trace = proximal_gradient(problem, x0, 1)
    np.testing.assert_array_equal(trace.x, soft_threshold(x0, tau / lipschitz))


@pytest.mark.parametrize('solve', [proximal_gradient, mfista])
def test_scalar_lasso_fixed_point(solve):
    trace = solve(_scalar_lasso(1.5), np.array([0.0]), 200)
    assert abs(trace.x[0] - 2.0) < 1e-8


def test_objective_nonincreasing():
    problem = _lasso(30, 50, 0.5, seed=0)
    trace = mfista(problem, np.zeros(50), 300)
    assert trace.is_monotone()
    obj = trace.column('objective')
    assert np.all(np.diff(obj) <= 0)
    assert obj[0] <= trace.initial_objective


def test_plain_fista_reaches_same_optimum():
    problem = _lasso(30, 20, 0.3, seed=1)
    monotone = mfista(problem, np.zeros(20), 3000)
    plain = mfista(problem, np.zeros(20), 3000, monotone=False)
    assert plain.method == 'fista'
    assert abs(monotone.objective[-1] - plain.objective[-1]) < 1e-8 * max(1.0, abs(monotone.objective[-1]))


def test_rate_bound_on_quadratic():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((40, 25))
    b = rng.standard_normal(40)
    x_hat = np.linalg.lstsq(a, b, rcond=None)[0]
    lipschitz = np.linalg.norm(a, 2) ** 2
    problem = CompositeProblem.smooth_only(lambda x: 0.5 * float(np.sum((a.dot(x) - b) ** 2)),
                                           lambda x: a.T.dot(a.dot(x) - b), lipschitz)
    x0 = np.zeros(25)
    optimum = problem.objective(x_hat)
    trace = mfista(problem, x0, 200)
    for k, value in enumerate(trace.objective, start=1):
        assert value - optimum <= mfista_rate_bound(lipschitz, x0, x_hat, k) + 1e-10


@pytest.mark.parametrize('seed', range(5))
def test_rate_bound_on_lasso(seed):
    problem = _lasso(40, 60, 0.5, seed=seed)
    x0 = np.zeros(60)
    reference = mfista(problem, x0, 3000)
    optimum, x_hat = reference.objective[-1], reference.x
    trace = mfista(problem, x0, 300)
    for k, value in enumerate(trace.objective, start=1):
        bound = mfista_rate_bound(problem.lipschitz_bound, x0, x_hat, k)
        assert value - optimum <= bound + 1e-8 * abs(optimum)


def test_rate_bound_formula():
    assert mfista_rate_bound(2.0, np.array([1.0, 1.0]), np.zeros(2), 1) == 2.0


def test_non_finite_gradient_aborts_with_iteration():
    problem = CompositeProblem.smooth_only(lambda x: 0.0, lambda x: np.full_like(x, np.nan), 1.0)
    with pytest.raises(SolverDivergence) as info:
        mfista(problem, np.zeros(2), 10)
    assert info.value.iteration == 1


def test_early_stop_on_stalled_objective():
    trace = mfista(_scalar_lasso(1.0), np.array([0.0]), 500, objective_tol=1e-12)
    assert len(trace) < 500
    assert abs(trace.x[0] - 2.0) < 1e-10


def test_rejected_candidates_do_not_count_as_stalls():
    # every prox step lands on 10, always worse than the start at 0
    problem = CompositeProblem(lambda x: abs(float(x[0])), lambda x: np.zeros_like(x),
                               lambda x, step: np.full_like(x, 10.0), lambda x: 0.0, 1.0)
    trace = mfista(problem, np.array([0.0]), 30, objective_tol=1e-6)
    assert len(trace) == 30
    assert trace.objective == [0.0] * 30


def test_lipschitz_bound_must_be_positive():
    with pytest.raises(ValueError):
        _quadratic([1.0], lipschitz=0.0)


def test_monitor_columns_recorded():
    c = np.array([3.0, 4.0])
    trace = mfista(_quadratic(c), np.zeros(2), 5,
                   monitor=lambda x: {'rel_error': float(np.linalg.norm(x - c) / 5.0), 'residual': 0.5})
    assert len(trace.rel_error) == 5
    assert trace.rel_error[-1] < trace.rel_error[0] or trace.rel_error[0] == 0.0
    assert all(math.isnan(v) for v in trace.true_objective)
    assert trace.residual == [0.5] * 5


def test_trace_csv_round_trip(tmp_path):
    trace = IterateTrace()
    trace.record(1.0 / 3.0, 1.0, 0.25, true_objective=0.5, rel_error=0.1, residual=1e-17, stage=0)
    trace.record(0.2, 1.618, 0.5, true_objective=0.4, rel_error=0.05, residual=2e-17, stage=1)
    path = str(tmp_path / 'trace.csv')
    trace.write_csv(path)
    with open(path) as f:
        assert f.readline().strip() == 'iter,objective,true_objective,rel_error,t_k,seconds,stage,residual'
    restored = IterateTrace.read_csv(path)
    for name in ('objective', 'true_objective', 'rel_error', 't_k', 'seconds', 'residual', 'stage'):
        assert getattr(restored, name) == getattr(trace, name)


def test_trace_csv_plain_header(tmp_path):
    trace = mfista(_quadratic([1.0]), np.zeros(1), 3)
    path = str(tmp_path / 'plain.csv')
    trace.write_csv(path, include_seconds=False)
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == 'iter,objective,true_objective,rel_error,t_k,seconds'
    assert len(lines) == 4
    assert IterateTrace.read_csv(path).seconds == [0.0, 0.0, 0.0]

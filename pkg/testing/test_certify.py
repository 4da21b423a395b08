import itertools
import math

import numpy as np
import pytest

from certify.bounds import (bound_constants, cone_certificate, d_star_d_norm11, drip_property_check, error_bound,
                            iteration_estimates, noise_calibrated_lambda, optimality_certificate, tail_block_check)
from certify.drip import DripEstimate, drip_exhaustive, drip_inner_product_check, drip_randomized_lb
from dataset.problems import near_isometric_matrix
from misc.errors import EnumerationBudgetError, NonTightFrameError
from operators.frames import TightFrame, cosparse_signal, gradient_frame, random_tight_frame
from operators.linops import DenseMatrix, identity
from solvers.analysis import AnalysisProblem, SolverConfig, dfista


def _identity_frame(n):
    return TightFrame(n, n, identity(n), True)


def _orthogonal(n, seed=0):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    return DenseMatrix(q, name='Q')


def _classical_rip(a, s):
    worst = 0.0
    for support in itertools.combinations(range(a.shape[1]), s):
        sub = a[:, list(support)]
        ev = np.linalg.eigvalsh(sub.T.dot(sub))
        worst = max(worst, ev[-1] - 1.0, 1.0 - ev[0])
    return worst


def test_orthogonal_matrix_has_zero_constant():
    frame = random_tight_frame(6, 8, seed=1)
    estimate = drip_exhaustive(_orthogonal(6), frame, 2)
    assert estimate.sigma_s < 1e-10
    assert estimate.supports_checked == 28
    assert not estimate.is_lower_bound


def test_hand_evaluated_constant():
    estimate = drip_exhaustive(DenseMatrix(np.diag([1.0, 0.5])), _identity_frame(2), 1)
    assert abs(estimate.sigma_s - 0.75) < 1e-12


@pytest.mark.parametrize('seed', range(5))
def test_identity_frame_matches_classical_rip(seed):
    a = np.random.default_rng(seed).standard_normal((8, 12)) / math.sqrt(8)
    estimate = drip_exhaustive(DenseMatrix(a), _identity_frame(12), 2)
    assert abs(estimate.sigma_s - _classical_rip(a, 2)) < 1e-12


def test_parallel_enumeration_matches_serial():
    a = DenseMatrix(np.random.default_rng(3).standard_normal((6, 8)) / math.sqrt(6))
    frame = random_tight_frame(8, 10, seed=3)
    assert drip_exhaustive(a, frame, 2, n_jobs=2).sigma_s == drip_exhaustive(a, frame, 2).sigma_s


def test_enumeration_budget():
    frame = random_tight_frame(120, 144, seed=0)
    with pytest.raises(EnumerationBudgetError) as info:
        drip_exhaustive(DenseMatrix(np.eye(120)), frame, 4)
    assert 'drip_randomized_lb' in str(info.value)


def test_randomized_is_a_lower_bound():
    a = DenseMatrix(np.random.default_rng(4).standard_normal((16, 20)) / 4.0)
    frame = random_tight_frame(20, 24, seed=4)
    exact = drip_exhaustive(a, frame, 2)
    sampled = drip_randomized_lb(a, frame, 2, trials=40, seed=1)
    assert sampled.is_lower_bound
    assert sampled.supports_checked == 40
    assert sampled.sigma_s <= exact.sigma_s + 1e-15
    full = drip_randomized_lb(a, frame, 2, trials=500, seed=1)
    assert full.supports_checked == 276
    assert full.sigma_s == exact.sigma_s
    with pytest.raises(ValueError):
        drip_randomized_lb(a, frame, 2, trials=0)


def test_inner_product_inequality():
    a = DenseMatrix(np.random.default_rng(5).standard_normal((8, 10)) / math.sqrt(8))
    frame = random_tight_frame(10, 12, seed=5)
    assert drip_inner_product_check(a, frame, 1, trials=10000, seed=2) >= -1e-12
    sigma = drip_exhaustive(_orthogonal(10), frame, 2).sigma_s
    assert drip_inner_product_check(_orthogonal(10), frame, 1, trials=200, sigma_2s=sigma) >= -1e-12


def test_bound_constants_at_zero():
    c0, big0, big1, big2 = bound_constants(0.0, 1.0)
    assert c0 == 1.5
    assert abs(big0 - 6 * math.sqrt(2)) < 1e-12
    assert big1 == 4.0
    assert big2 == 1.0


def test_bound_constants_closed_forms():
    constants = bound_constants(0.1, 1.0)
    assert constants.C0 == pytest.approx(17.836, rel=1e-4)
    assert constants.C1 == pytest.approx(8.7563, rel=1e-4)
    assert constants.C2 == pytest.approx(2.1891, rel=1e-4)
    assert constants.feasible and constants.feasible_exact


def test_bound_constants_increase_with_sigma():
    values = [bound_constants(s, 1.0).C0 for s in np.linspace(0.0, 0.19, 20)]
    assert all(np.diff(values) > 0)


def test_infeasible_sigma():
    rounded = bound_constants(0.1907, 1.0)
    assert not rounded.feasible
    assert rounded.feasible_exact
    assert math.isfinite(rounded.C0)
    beyond = bound_constants(0.2, 1.0)
    assert not beyond.feasible_exact
    assert beyond.C0 == math.inf and beyond.C2 == math.inf
    with pytest.raises(ValueError):
        bound_constants(-0.1, 1.0)


def test_iteration_estimates_symmetric_inputs():
    eps = 0.01
    est = iteration_estimates(1.0, 1.0, 1.0, eps, 1.0, 1.0)
    assert est.K_smoothing == pytest.approx(2 / eps + 1 / math.sqrt(eps))
    assert est.K_decomposition == pytest.approx(16 * math.sqrt(2) / eps ** 1.5)
    assert est.mu_star > 0 and est.rho_star > 0


def test_iteration_estimates_scaling():
    a = iteration_estimates(1.0, 1.0, 1.0, 1e-6, 1.0, 1.0)
    b = iteration_estimates(1.0, 1.0, 1.0, 0.5e-6, 1.0, 1.0)
    assert b.K_smoothing / a.K_smoothing == pytest.approx(2.0, rel=1e-3)
    assert b.K_decomposition / a.K_decomposition == pytest.approx(2 ** 1.5, rel=1e-9)
    with pytest.raises(ValueError):
        iteration_estimates(1.0, 1.0, 1.0, 0.0, 1.0, 1.0)


def test_noise_calibrated_lambda_controls_noise_term():
    a = np.random.default_rng(6).standard_normal((10, 12))
    frame = random_tight_frame(12, 16, seed=6)
    eps = 0.01
    lam = noise_calibrated_lambda(DenseMatrix(a), frame, eps)
    rng = np.random.default_rng(7)
    for _ in range(100):
        w = rng.standard_normal(10)
        w *= eps / np.linalg.norm(w)
        assert np.max(np.abs(frame.analysis_matrix().dot(a.T.dot(w)))) <= lam / 2 + 1e-15


def _scalar_problem():
    return AnalysisProblem(A=DenseMatrix([[1.0]]), b=np.array([3.0]), frame=_identity_frame(1), lam=1.0)


def test_optimality_certificate():
    problem = _scalar_problem()
    assert optimality_certificate(problem, np.array([2.0])) <= 1.0
    assert optimality_certificate(problem, np.array([0.0])) == 3.0


def test_optimality_certificate_detects_origin():
    frame = random_tight_frame(8, 10, seed=8)
    a = np.random.default_rng(8).standard_normal((6, 8))
    problem = AnalysisProblem(A=DenseMatrix(a), b=100 * np.ones(6), frame=frame, lam=0.01)
    assert optimality_certificate(problem, np.zeros(8)) > 100


def _orthogonal_instance(seed, lam=1e-3):
    n, p = 12, 16
    frame = random_tight_frame(n, p, seed=seed)
    a = _orthogonal(n, seed=seed)
    x_true = cosparse_signal(frame, n - 1, seed=seed).x
    problem = AnalysisProblem(A=a, b=a.apply(x_true), frame=frame, lam=lam)
    return problem, x_true


def test_cone_slack_at_zero_error():
    problem, x_true = _orthogonal_instance(0)
    rho = 2.0
    v = np.abs(problem.frame.d_star.apply(x_true))
    tail = np.sum(np.sort(v)[:-1])
    expected = problem.lam * problem.p / rho + 4 * tail
    assert cone_certificate(problem, x_true, x_true, rho, 1) == pytest.approx(expected, rel=1e-12)


def test_tail_block_inequality_for_any_error():
    problem, x_true = _orthogonal_instance(1)
    rng = np.random.default_rng(1)
    for s in (1, 2, 3):
        for _ in range(20):
            assert tail_block_check(problem.frame, x_true, x_true + rng.standard_normal(12), s) >= -1e-12


def test_drip_property_is_tight_for_orthogonal_measurements():
    problem, x_true = _orthogonal_instance(2)
    h = np.random.default_rng(2).standard_normal(12)
    slack = drip_property_check(problem, x_true, x_true + h, 1, 0.0)
    assert abs(slack) < 1e-10


def test_error_bound_refuses_non_tight_frames():
    frame = gradient_frame(4, 4)
    problem = AnalysisProblem(A=DenseMatrix(np.eye(16)), b=np.zeros(16), frame=frame, lam=0.1)
    drip = DripEstimate(s=2, sigma_s=0.0, method='exhaustive', supports_checked=1)
    with pytest.raises(NonTightFrameError):
        error_bound(problem, np.zeros(16), np.zeros(16), 1.0, 1, drip)
    with pytest.raises(NonTightFrameError):
        drip_property_check(problem, np.zeros(16), np.zeros(16), 1, 0.0)


def test_error_bound_holds_on_converged_instance():
    problem, x_true = _orthogonal_instance(3)
    rho = 1.0
    drip = drip_exhaustive(problem.A, problem.frame, 2)
    x_hat = dfista(problem, SolverConfig(rho=rho, max_iters=3000)).x
    report = error_bound(problem, x_true, x_hat, rho, 1, drip)
    assert report.hypotheses_hold
    assert report.noise_condition_lhs < 1e-12
    assert report.measured_error <= report.predicted_bound
    assert report.cone_slack >= -1e-6
    assert drip_property_check(problem, x_true, x_hat, 1, drip.sigma_s) >= -1e-8


def test_exact_transform_drops_relaxation_term():
    problem, x_true = _orthogonal_instance(4)
    drip = DripEstimate(s=2, sigma_s=0.05, method='exhaustive', supports_checked=120)
    decomposed = error_bound(problem, x_true, x_true, 10.0, 1, drip)
    exact = error_bound(problem, x_true, x_true, math.inf, 1, drip)
    tail = np.sum(np.sort(np.abs(problem.frame.d_star.apply(x_true)))[:-1])
    two_term = exact.C0 * problem.lam + exact.C1 * tail
    assert exact.predicted_bound == pytest.approx(two_term, rel=1e-12)
    third = decomposed.C2 * problem.lam * problem.p / 10.0
    assert decomposed.predicted_bound == pytest.approx(two_term + third, rel=1e-12)
    smoothing = error_bound(problem, x_true, x_true, 0.1, 1, drip, transform='smoothing')
    assert smoothing.predicted_bound == pytest.approx(decomposed.predicted_bound, rel=1e-12)
    with pytest.raises(ValueError):
        error_bound(problem, x_true, x_true, 1.0, 2, drip)


def test_report_serialization(tmp_path):
    problem, x_true = _orthogonal_instance(5)
    drip = DripEstimate(s=2, sigma_s=0.3, method='randomized-lower-bound', supports_checked=10)
    report = error_bound(problem, x_true, x_true, 1.0, 1, drip)
    assert not report.hypotheses_hold
    text = report.to_text()
    assert 'predicted bound' in text and 'WARNING' in text
    path = tmp_path / 'certificate.csv'
    report.to_csv(str(path))
    header, row = path.read_text().splitlines()
    assert header.split(',')[:4] == ['s', 'lam', 'transform', 'param']
    assert row.split(',')[2] == 'decomposition'


def test_d_star_d_norm_of_identity_frame():
    assert d_star_d_norm11(_identity_frame(5)) == 1.0


def test_d_star_d_norm_matches_basis_columns():
    frame = random_tight_frame(6, 8, seed=11)
    columns = [np.sum(np.abs(frame.d_star.apply(frame.d_star.apply_adjoint(e)))) for e in np.eye(8)]
    assert abs(d_star_d_norm11(frame) - max(columns)) <= 1e-12 * max(columns)


@pytest.mark.slow
def test_recovery_bound_on_random_tiny_instances():
    n, p, s, defect = 12, 16, 1, 0.15
    for seed in range(20):
        frame = random_tight_frame(n, p, seed=seed)
        a = DenseMatrix(near_isometric_matrix(n, n, defect, seed=seed))
        drip = drip_exhaustive(a, frame, 2 * s)
        assert drip.sigma_s <= defect + 1e-12
        x_true = cosparse_signal(frame, n - 1, seed=seed).x
        problem = AnalysisProblem(A=a, b=a.apply(x_true), frame=frame, lam=1e-3)
        x_hat = dfista(problem, SolverConfig(rho=1.0, max_iters=20000)).x
        report = error_bound(problem, x_true, x_hat, 1.0, s, drip)
        assert report.hypotheses_hold
        assert report.measured_error <= report.predicted_bound

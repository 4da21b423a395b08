import logging
import math

import numpy as np

from misc.errors import DimensionError
from misc.utils import child_seeds
from operators.frames import cosparse_signal
from operators.linops import DenseMatrix
from solvers.analysis import AnalysisProblem

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 0.004


def cell_dimensions(n, alpha, beta):
    """(m, l) for a phase-diagram cell: m = round(alpha n), l = round(n - beta m).

    l is clamped to [0, n-1] so the cosupport leaves a nontrivial null space.
    """
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise ValueError('alpha and beta must lie in (0, 1], got {}, {}'.format(alpha, beta))
    m = max(1, int(math.floor(alpha * n + 0.5)))
    l = int(math.floor(n - beta * m + 0.5))
    return m, min(max(l, 0), n - 1)


def make_problem(n, m, frame, l, noise_sigma=0.0, seed=0, lam=DEFAULT_LAMBDA):
    """Random Gaussian A (no column normalization), cosparse x_true, b = A x_true + w."""
    if frame.n != n:
        raise DimensionError('frame acts on R^{}, expected R^{}'.format(frame.n, n))
    if m < 1:
        raise DimensionError('need at least one measurement, got m={}'.format(m))
    if noise_sigma < 0:
        raise ValueError('noise_sigma must be >= 0, got {}'.format(noise_sigma))
    seed_a, seed_x, seed_w = child_seeds(seed, 3)
    a = np.random.default_rng(seed_a).standard_normal((m, n))
    x_true = cosparse_signal(frame, l, seed=seed_x).x
    b = a.dot(x_true)
    if noise_sigma > 0:
        b = b + noise_sigma * np.random.default_rng(seed_w).standard_normal(m)
    logger.debug('problem n=%d m=%d p=%d l=%d sigma=%g seed=%d', n, m, frame.p, l, noise_sigma, seed)
    return AnalysisProblem(A=DenseMatrix(a, name='A'), b=b, frame=frame, lam=lam), x_true


def near_isometric_matrix(m, n, defect, seed=0):
    """m x n matrix U diag(s) V* with s_i^2 drawn in [1 - defect, 1 + defect].

    ||A v||^2 stays within (1 +- defect) ||v||^2 for every v, so the D-RIP
    constant of any frame at any level is at most defect. Needs m >= n.
    """
    if m < n:
        raise DimensionError('a near-isometry on R^{} needs m >= n, got m={}'.format(n, m))
    if not 0 <= defect < 1:
        raise ValueError('defect must lie in [0, 1), got {}'.format(defect))
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((m, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    singular = np.sqrt(rng.uniform(1.0 - defect, 1.0 + defect, size=n))
    return (u * singular).dot(v.T)

"""Restricted isometry constants adapted to an analysis frame.

sigma_s is the smallest sigma with (1-sigma)||v||^2 <= ||Av||^2 <= (1+sigma)||v||^2
for every v in the span of some s columns of D.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import eigh, orth

from misc.errors import EnumerationBudgetError
from misc.utils import make_rng
from operators.linops import to_dense

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10 ** 6
RANK_TOL = 1e-12
EXHAUSTIVE = 'exhaustive'
RANDOMIZED = 'randomized-lower-bound'


@dataclass(frozen=True)
class DripEstimate:
    s: int
    sigma_s: float
    method: str
    supports_checked: int

    @property
    def is_lower_bound(self):
        return self.method == RANDOMIZED


def _matrices(A, frame):
    return to_dense(A), frame.analysis_matrix().T


def support_sigma(a, d, support):
    """Isometry defect of dense A on range(D[:, support])."""
    q = orth(d[:, list(support)], rcond=RANK_TOL)
    if q.shape[1] == 0:
        return 0.0
    aq = a.dot(q)
    ev = eigh(aq.T.dot(aq), eigvals_only=True)
    return float(max(ev[-1] - 1.0, 1.0 - ev[0]))


def _check_level(s, p):
    if not 1 <= s <= p:
        raise ValueError('sparsity level s must lie in [1, {}], got {}'.format(p, s))


def _chunk_max(a, d, supports):
    return max(support_sigma(a, d, t) for t in supports)


def _max_over(a, d, supports, n_jobs):
    if n_jobs == 1:
        return _chunk_max(a, d, supports)
    size = max(1, len(supports) // (8 * abs(n_jobs)))
    chunks = [supports[i:i + size] for i in range(0, len(supports), size)]
    return max(Parallel(n_jobs=n_jobs)(delayed(_chunk_max)(a, d, c) for c in chunks))


def drip_exhaustive(A, frame, s, n_jobs=1, budget=ENUMERATION_BUDGET):
    p = frame.p
    _check_level(s, p)
    count = math.comb(p, s)
    if count > budget:
        raise EnumerationBudgetError(
            'C({}, {}) = {} supports exceeds the enumeration budget {}; use drip_randomized_lb '
            'for a lower bound instead'.format(p, s, count, budget))
    a, d = _matrices(A, frame)
    supports = list(itertools.combinations(range(p), s))
    sigma = _max_over(a, d, supports, n_jobs)
    logger.debug('exhaustive D-RIP: s=%d, %d supports, sigma=%.6f', s, count, sigma)
    return DripEstimate(s=s, sigma_s=sigma, method=EXHAUSTIVE, supports_checked=count)


def drip_randomized_lb(A, frame, s, trials, seed=0, n_jobs=1):
    """Max of the per-support defect over sampled supports; never exceeds sigma_s.

    When trials covers every support the enumeration is done exactly.
    """
    if trials < 1:
        raise ValueError('trials must be >= 1, got {}'.format(trials))
    p = frame.p
    _check_level(s, p)
    a, d = _matrices(A, frame)
    if trials >= math.comb(p, s):
        supports = list(itertools.combinations(range(p), s))
    else:
        rng = make_rng(seed)
        supports = [tuple(np.sort(rng.choice(p, size=s, replace=False))) for _ in range(trials)]
    sigma = _max_over(a, d, supports, n_jobs)
    return DripEstimate(s=s, sigma_s=sigma, method=RANDOMIZED, supports_checked=len(supports))


def _sample_sparse_synthesis(rng, d, s):
    support = rng.choice(d.shape[1], size=s, replace=False)
    return d[:, support].dot(rng.standard_normal(s))


def drip_inner_product_check(A, frame, s, trials, seed=0, sigma_2s=None):
    """Most negative slack of <Au, Av> >= <u, v> - sigma_2s ||u|| ||v|| over sampled u, v.

    u and v are drawn from the s-sparse synthesis set of D. sigma_2s defaults
    to the exhaustive level-2s constant.
    """
    if sigma_2s is None:
        sigma_2s = drip_exhaustive(A, frame, min(2 * s, frame.p)).sigma_s
    a, d = _matrices(A, frame)
    rng = make_rng(seed)
    worst = math.inf
    for _ in range(trials):
        u = _sample_sparse_synthesis(rng, d, s)
        v = _sample_sparse_synthesis(rng, d, s)
        slack = (float(np.dot(a.dot(u), a.dot(v))) + sigma_2s * np.linalg.norm(u) * np.linalg.norm(v)
                 - float(np.dot(u, v)))
        worst = min(worst, float(slack))
    return worst

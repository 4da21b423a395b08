"""Recovery-bound evaluation, optimality and cone certificates, iteration-count calculators."""
import csv
import logging
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from misc.errors import NonTightFrameError
from misc.utils import top_s_indices
from operators.linops import norm_11, to_dense

logger = logging.getLogger(__name__)

EXACT_THRESHOLD = 1.0 / (1.0 + 3.0 * math.sqrt(2.0))
ROUNDED_THRESHOLD = 0.1907
TRANSFORMS = ('decomposition', 'smoothing', 'exact')


@dataclass(frozen=True)
class BoundConstants:
    sigma_2s: float
    norm11: float
    c0: float
    C0: float
    C1: float
    C2: float
    feasible: bool
    feasible_exact: bool

    def __iter__(self):
        return iter((self.c0, self.C0, self.C1, self.C2))


def bound_constants(sigma_2s, d_star_d_norm11):
    """Closed-form constants of the recovery bound.

    `feasible` uses the rounded threshold 0.1907; `feasible_exact` uses
    1/(1+3*sqrt(2)). Constants are +inf only where the denominator is <= 0.
    """
    if sigma_2s < 0:
        raise ValueError('sigma_2s must be >= 0, got {}'.format(sigma_2s))
    sigma = float(sigma_2s)
    c0 = 0.5 + float(d_star_d_norm11)
    denom = 1.0 - (1.0 + 3.0 * math.sqrt(2.0)) * sigma
    if denom <= 0:
        big0 = big1 = big2 = math.inf
    else:
        lead = (math.sqrt(2.0) - 1.0) * sigma + 1.0
        big0 = 4.0 * math.sqrt(2.0) * c0 / denom
        big1 = 4.0 * lead / denom
        big2 = lead / denom
    return BoundConstants(sigma_2s=sigma, norm11=float(d_star_d_norm11), c0=c0, C0=big0, C1=big1, C2=big2,
                          feasible=sigma < ROUNDED_THRESHOLD, feasible_exact=sigma < EXACT_THRESHOLD)


@dataclass(frozen=True)
class CertificateReport:
    s: int
    lam: float
    transform: str
    param: float
    sigma_2s: float
    c0: float
    C0: float
    C1: float
    C2: float
    predicted_bound: float
    measured_error: float
    noise_condition_lhs: float
    noise_condition_holds: bool
    optimality_residual: float
    cone_slack: float
    feasible: bool
    feasible_exact: bool
    drip_method: str

    @property
    def hypotheses_hold(self):
        return self.feasible and self.noise_condition_holds

    @property
    def bound_holds(self):
        return self.measured_error <= self.predicted_bound

    def to_csv(self, path):
        names = [f.name for f in fields(self)]
        values = asdict(self)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(names)
            writer.writerow([repr(values[k]) if isinstance(values[k], float) else values[k] for k in names])

    def to_text(self):
        lines = [
            'recovery certificate (s={}, lambda={:.4g}, {} transform, param={:.4g})'.format(
                self.s, self.lam, self.transform, self.param),
            '  sigma_2s           {:.6f} ({})'.format(self.sigma_2s, self.drip_method),
            '  feasible           {} (exact threshold: {})'.format(self.feasible, self.feasible_exact),
            '  c0, C0, C1, C2     {:.4f}, {:.4f}, {:.4f}, {:.4f}'.format(self.c0, self.C0, self.C1, self.C2),
            '  noise condition    {:.4e} <= lambda/2: {}'.format(self.noise_condition_lhs, self.noise_condition_holds),
            '  predicted bound    {:.6e}'.format(self.predicted_bound),
            '  measured error     {:.6e}'.format(self.measured_error),
            '  optimality ratio   {:.6f}'.format(self.optimality_residual),
            '  cone slack         {:.6e}'.format(self.cone_slack),
        ]
        if not self.hypotheses_hold:
            lines.append('  WARNING: hypotheses do not hold, the bound is not guaranteed')
        return '\n'.join(lines)


def d_star_d_norm11(frame):
    d_star = frame.analysis_matrix()
    return norm_11(d_star.dot(d_star.T))


def _cosupport_split(frame, x_true, s):
    v = frame.d_star.apply(np.asarray(x_true, dtype=float))
    mask = np.zeros(frame.p, dtype=bool)
    mask[top_s_indices(v, s)] = True
    return v, mask


def best_s_term_tail(frame, x_true, s):
    """||D*x - (D*x)_s||_1."""
    v, mask = _cosupport_split(frame, x_true, s)
    return float(np.sum(np.abs(v[~mask])))


def optimality_certificate(problem, x_hat):
    """||D* A* (A x_hat - b)||_inf / (lam ||D*D||_{1,1}); <= 1 at an optimum."""
    frame = problem.frame
    r = problem.A.apply(x_hat) - problem.b
    lhs = float(np.max(np.abs(frame.d_star.apply(problem.A.apply_adjoint(r)))))
    return lhs / (problem.lam * d_star_d_norm11(frame))


def cone_certificate(problem, x_true, x_hat, rho, s):
    """RHS - LHS of the cone constraint with T the top-s entries of |D* x_true|."""
    frame = problem.frame
    v, mask = _cosupport_split(frame, x_true, s)
    dh = frame.d_star.apply(np.asarray(x_hat, dtype=float) - np.asarray(x_true, dtype=float))
    relax = 0.0 if math.isinf(rho) else problem.lam * frame.p / rho
    rhs = relax + 3.0 * np.sum(np.abs(dh[mask])) + 4.0 * np.sum(np.abs(v[~mask]))
    return float(rhs - np.sum(np.abs(dh[~mask])))


def _error_blocks(frame, x_true, h, s):
    # T from D*x_true; the complement split into size-s blocks by descending |D*h|
    _, mask = _cosupport_split(frame, x_true, s)
    dh = frame.d_star.apply(h)
    rest = np.flatnonzero(~mask)
    rest = rest[np.argsort(-np.abs(dh[rest]), kind='stable')]
    blocks = [rest[i:i + s] for i in range(0, len(rest), s)]
    return mask, dh, blocks


def drip_property_check(problem, x_true, x_hat, s, sigma_2s):
    """Slack of <Ah, A D D*_{T01} h> >= (1-sigma)||D*_{T01}h||^2 - sqrt(2/s) sigma ||D*_{T01}h|| ||D*_{T^c}h||_1.

    Requires a tight frame; T1 holds the s largest entries of |D*h| off T.
    """
    frame = problem.frame
    if not frame.is_tight:
        raise NonTightFrameError('the D-RIP property check assumes a tight frame (D D* = I)')
    h = np.asarray(x_hat, dtype=float) - np.asarray(x_true, dtype=float)
    mask, dh, blocks = _error_blocks(frame, x_true, h, s)
    t01 = mask.copy()
    if blocks:
        t01[blocks[0]] = True
    restricted = np.where(t01, dh, 0.0)
    lhs = float(np.dot(problem.A.apply(h), problem.A.apply(frame.d.apply(restricted))))
    norm01 = float(np.linalg.norm(restricted))
    tail1 = float(np.sum(np.abs(dh[~mask])))
    rhs = (1.0 - sigma_2s) * norm01 ** 2 - math.sqrt(2.0 / s) * sigma_2s * norm01 * tail1
    return lhs - rhs


def tail_block_check(frame, x_true, x_hat, s):
    """s^{-1/2} ||D*_{T^c} h||_1 - sum_{j>=2} ||D*_{T_j} h||_2; nonnegative for any h."""
    h = np.asarray(x_hat, dtype=float) - np.asarray(x_true, dtype=float)
    mask, dh, blocks = _error_blocks(frame, x_true, h, s)
    tail = sum(float(np.linalg.norm(dh[b])) for b in blocks[1:])
    return float(np.sum(np.abs(dh[~mask]))) / math.sqrt(s) - tail


def error_bound(problem, x_true, x_hat, rho_or_mu, s, drip, transform='decomposition'):
    """Evaluate the recovery bound for x_hat against x_true.

    transform: 'decomposition' (third term C2 lam p / (sqrt(s) rho)),
    'smoothing' (C2 lam mu p / sqrt(s)) or 'exact' (no third term; also
    selected by rho = inf under 'decomposition').
    """
    frame = problem.frame
    if not frame.is_tight:
        raise NonTightFrameError(
            'the recovery bound holds for tight frames only (D D* = I); {} is not tight'.format(frame.d_star.name))
    if transform not in TRANSFORMS:
        raise ValueError('transform must be one of {}, got {!r}'.format(TRANSFORMS, transform))
    if drip.s != 2 * s:
        raise ValueError('error_bound needs the D-RIP constant at level 2s = {}, got level {}'.format(2 * s, drip.s))
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    lam, p = problem.lam, frame.p
    constants = bound_constants(drip.sigma_s, d_star_d_norm11(frame))

    w = problem.b - problem.A.apply(x_true)
    noise_lhs = float(np.max(np.abs(frame.d_star.apply(problem.A.apply_adjoint(w)))))
    tail = best_s_term_tail(frame, x_true, s)

    if transform == 'smoothing':
        rho = 1.0 / rho_or_mu
        third = constants.C2 * lam * rho_or_mu * p / math.sqrt(s)
    elif transform == 'exact' or math.isinf(rho_or_mu):
        rho = math.inf
        third = 0.0
    else:
        rho = rho_or_mu
        third = constants.C2 * lam * p / (math.sqrt(s) * rho)
    predicted = constants.C0 * math.sqrt(s) * lam + constants.C1 * tail / math.sqrt(s) + third

    report = CertificateReport(
        s=s, lam=lam, transform=transform, param=float(rho_or_mu), sigma_2s=constants.sigma_2s,
        c0=constants.c0, C0=constants.C0, C1=constants.C1, C2=constants.C2,
        predicted_bound=predicted, measured_error=float(np.linalg.norm(x_hat - x_true)),
        noise_condition_lhs=noise_lhs, noise_condition_holds=noise_lhs <= lam / 2.0,
        optimality_residual=optimality_certificate(problem, x_hat),
        cone_slack=cone_certificate(problem, x_true, x_hat, rho, s),
        feasible=constants.feasible, feasible_exact=constants.feasible_exact, drip_method=drip.method)
    if not report.hypotheses_hold:
        logger.warning('recovery bound hypotheses fail (feasible=%s, noise condition %.3e vs %.3e)',
                       report.feasible, noise_lhs, lam / 2.0)
    return report


@dataclass(frozen=True)
class IterationEstimate:
    target_eps: float
    K_smoothing: float
    mu_star: float
    K_decomposition: float
    rho_star: float


def iteration_estimates(L_g, L_grad_f, lambda1, eps, H_x0, d_norm2, lambda2=None):
    """Worst-case iteration counts for eps-optimality.

    lambda1 = ||x0 - x_hat_mu||, lambda2 = ||x0 - x_hat_rho||^2 + ||z0 - z_hat_rho||^2
    (defaults to lambda1); d_norm2 = ||D||_2.
    """
    lambda2 = lambda1 if lambda2 is None else lambda2
    for name, value in (('L_g', L_g), ('L_grad_f', L_grad_f), ('lambda1', lambda1), ('lambda2', lambda2),
                        ('eps', eps), ('H_x0', H_x0), ('d_norm2', d_norm2)):
        if not value > 0:
            raise ValueError('{} must be > 0, got {}'.format(name, value))
    dd = d_norm2 ** 2
    k_smooth = 2.0 * d_norm2 * math.sqrt(L_g * lambda1) / eps + math.sqrt(L_grad_f * lambda1) / math.sqrt(eps)
    mu = math.sqrt(dd / L_g) * eps / (math.sqrt(dd * L_g) + math.sqrt(dd * L_g + L_grad_f * eps))
    k_decomp = max(16.0 * math.sqrt((1.0 + dd) * lambda2 * H_x0) * L_g / eps ** 1.5,
                   2.0 * math.sqrt(L_grad_f * lambda2) / math.sqrt(eps))
    rho = (L_g * math.sqrt(2.0 * H_x0) * k_decomp ** 2 / (2.0 * (1.0 + dd) * lambda2)) ** (2.0 / 3.0)
    return IterationEstimate(target_eps=eps, K_smoothing=k_smooth, mu_star=mu, K_decomposition=k_decomp,
                             rho_star=rho)


def noise_calibrated_lambda(A, frame, eps):
    """2 eps ||D* A*||_2: guarantees ||D* A* w||_inf <= lam/2 whenever ||w||_2 <= eps."""
    if eps < 0:
        raise ValueError('eps must be >= 0, got {}'.format(eps))
    product = frame.analysis_matrix().dot(to_dense(A).T)
    # exact 2-norm: the estimate must not undershoot
    return 2.0 * eps * float(np.linalg.norm(product, 2))

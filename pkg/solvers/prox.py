"""Proximal operators and Moreau-envelope smoothing of the weighted l1 norm."""
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SoftThresholdParams:
    tau: float

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError('soft-threshold tau must be >= 0, got {}'.format(self.tau))


@dataclass(frozen=True)
class EnvelopeParams:
    """Envelope of lam*||.||_1 with smoothing parameter mu."""
    lam: float
    mu: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError('lambda must be > 0, got {}'.format(self.lam))
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError('mu must be a finite positive number, got {}'.format(self.mu))


def soft_threshold(z, tau):
    """Gamma_tau(z) = [|z| - tau]_+ sgn(z); |z| == tau maps to 0."""
    tau = SoftThresholdParams(float(tau)).tau
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def huber(x, alpha):
    if not alpha > 0:
        raise ValueError('huber alpha must be > 0, got {}'.format(alpha))
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.where(ax < alpha, x * x / (2.0 * alpha), ax - alpha / 2.0)
    return float(out) if out.ndim == 0 else out


def envelope_value(v, params):
    """lam * sum_i H_{lam*mu}(v_i), the Moreau envelope of lam*||.||_1 at v."""
    alpha = params.lam * params.mu
    return float(params.lam * np.sum(huber(np.atleast_1d(v), alpha)))


def envelope_gradient(v, params):
    """Inner factor (v - Gamma_{lam*mu}(v)) / mu; callers apply D themselves."""
    v = np.asarray(v, dtype=float)
    return (v - soft_threshold(v, params.lam * params.mu)) / params.mu


def partial_min_z(v, lam, rho):
    """argmin_z lam*||z||_1 + rho/2 ||z - v||^2."""
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError('rho must be a finite positive number, got {}'.format(rho))
    if not lam > 0:
        raise ValueError('lambda must be > 0, got {}'.format(lam))
    return soft_threshold(v, lam / rho)


def l1_prox_residual(z, out, tau):
    """Worst violation of 0 in tau*d||.||_1(out) + (out - z), coordinatewise."""
    z = np.asarray(z, dtype=float)
    out = np.asarray(out, dtype=float)
    r = z - out
    nonzero = out != 0
    worst = 0.0
    if np.any(nonzero):
        worst = float(np.max(np.abs(r[nonzero] - tau * np.sign(out[nonzero]))))
    if np.any(~nonzero):
        worst = max(worst, float(np.max(np.maximum(np.abs(r[~nonzero]) - tau, 0.0))))
    return worst

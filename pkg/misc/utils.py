import logging
import sys

import numpy as np

from misc.errors import SolverDivergence

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def setup_logging(level=logging.INFO, stream=None):
    """Route package loggers to a single stream handler."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_afista', False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._afista = True
    root.addHandler(handler)
    root.setLevel(level)
    return root


def make_rng(*keys):
    """Counter-style generator: the same key tuple always yields the same stream."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def child_seeds(seed, count):
    # independent integer seeds for sub-steps of one draw
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def relative_error(x_hat, x_true):
    """||x_hat - x|| / ||x||; falls back to the absolute error for x = 0."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    err = float(np.linalg.norm(x_hat - x_true))
    ref = float(np.linalg.norm(x_true))
    return err / ref if ref > 0 else err


def check_finite(iteration, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise SolverDivergence('non-finite value encountered', iteration)


def top_s_indices(v, s):
    # descending |v|, ascending index on exact ties
    order = np.argsort(-np.abs(np.asarray(v)), kind='stable')
    return np.sort(order[:s])

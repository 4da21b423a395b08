import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from misc.errors import CosparseGenerationError, DimensionError
from operators.linops import DenseMatrix, LinearOperator, to_dense

logger = logging.getLogger(__name__)

COSPARSE_RETRIES = 20


@dataclass(frozen=True)
class TightFrame:
    """Analysis operator D* (p x n). is_tight means D D* = I_n."""
    n: int
    p: int
    d_star: LinearOperator
    is_tight: bool

    def __post_init__(self):
        if self.d_star.shape != (self.p, self.n):
            raise DimensionError('d_star has shape {}, expected ({}, {})'.format(self.d_star.shape, self.p, self.n))
        if self.is_tight and self.p < self.n:
            raise DimensionError('a tight frame needs p >= n, got n={}, p={}'.format(self.n, self.p))

    @property
    def d(self):
        return self.d_star.T

    def analysis_matrix(self):
        """Dense D* (p x n); materialized on demand for matrix-free operators."""
        return to_dense(self.d_star)


@dataclass(frozen=True)
class CosparseSignal:
    x: np.ndarray
    cosupport: np.ndarray = field(repr=False)

    @property
    def l(self):
        return int(len(self.cosupport))


def random_tight_frame(n, p, seed=0):
    """D* = first n columns of Q from the QR of a p x n Gaussian matrix."""
    if n < 1 or p < n:
        raise DimensionError('random_tight_frame needs p >= n >= 1, got n={}, p={}'.format(n, p))
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((p, n)))
    # force diag(R) >= 0 so the frame does not depend on the LAPACK sign choice
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs[np.newaxis, :]
    return TightFrame(n=n, p=p, d_star=DenseMatrix(q, name='D*'), is_tight=True)


def difference_operator_2d(rows, cols):
    """Periodic forward differences, horizontal block first then vertical."""
    if rows < 2 or cols < 2:
        raise DimensionError('difference_operator_2d needs rows, cols >= 2, got {}x{}'.format(rows, cols))
    size = rows * cols

    def _apply(x):
        img = x.reshape(rows, cols)
        dh = np.roll(img, -1, axis=1) - img
        dv = np.roll(img, -1, axis=0) - img
        return np.concatenate([dh.ravel(), dv.ravel()])

    def _apply_adjoint(y):
        gh = y[:size].reshape(rows, cols)
        gv = y[size:].reshape(rows, cols)
        # negative divergence
        out = np.roll(gh, 1, axis=1) - gh + np.roll(gv, 1, axis=0) - gv
        return out.ravel()

    return LinearOperator(size, 2 * size, _apply, _apply_adjoint, name='grad{}x{}'.format(rows, cols))


def gradient_frame(rows, cols):
    """The 2-D difference operator wrapped as an analysis frame (not tight)."""
    op = difference_operator_2d(rows, cols)
    return TightFrame(n=op.in_dim, p=op.out_dim, d_star=op, is_tight=False)


def cosparse_signal(frame, l, seed=0):
    """Unit-norm x with D*x vanishing on a uniformly drawn cosupport of size l."""
    if l < 0 or l > frame.p:
        raise ValueError('cosparsity l must lie in [0, {}], got {}'.format(frame.p, l))
    rng = np.random.default_rng(seed)
    d_star = frame.analysis_matrix()
    for attempt in range(COSPARSE_RETRIES):
        cosupport = np.sort(rng.choice(frame.p, size=l, replace=False))
        if l == 0:
            basis = np.eye(frame.n)
        else:
            basis = null_space(d_star[cosupport])
        if basis.shape[1] == 0:
            logger.debug('cosparse draw %d: trivial null space for l=%d', attempt, l)
            continue
        x = basis.dot(rng.standard_normal(basis.shape[1]))
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        return CosparseSignal(x=x / norm, cosupport=cosupport)
    raise CosparseGenerationError(
        'no nontrivial null space for cosparsity l={} after {} draws (n={}, p={})'.format(l, COSPARSE_RETRIES, frame.n, frame.p))


# flat binary persistence: per array, int64 ndim, int64 dims, then float64 data (all little-endian)

def write_arrays(path, arrays):
    with open(path, 'wb') as f:
        for a in arrays:
            a = np.asarray(a, dtype='<f8')
            np.array([a.ndim] + list(a.shape), dtype='<i8').tofile(f)
            np.ascontiguousarray(a).tofile(f)


def read_arrays(path):
    arrays = []
    with open(path, 'rb') as f:
        while True:
            head = np.fromfile(f, dtype='<i8', count=1)
            if head.size == 0:
                break
            dims = np.fromfile(f, dtype='<i8', count=int(head[0]))
            count = int(np.prod(dims)) if dims.size else 1
            data = np.fromfile(f, dtype='<f8', count=count)
            arrays.append(data.reshape(tuple(int(d) for d in dims)))
    return arrays


def save_frame(path, frame):
    write_arrays(path, [frame.analysis_matrix(), np.array([float(frame.is_tight)])])


def load_frame(path):
    d_star, flag = read_arrays(path)
    return TightFrame(n=d_star.shape[1], p=d_star.shape[0], d_star=DenseMatrix(d_star, name='D*'),
                      is_tight=bool(flag[0]))


def save_signal(path, signal):
    write_arrays(path, [signal.x, signal.cosupport.astype(float)])


def load_signal(path):
    x, cosupport = read_arrays(path)
    return CosparseSignal(x=x, cosupport=cosupport.astype(int))

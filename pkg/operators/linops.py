import logging

import numpy as np

from misc.errors import DimensionError

logger = logging.getLogger(__name__)

# callers needing a certified Lipschitz upper bound multiply sigma-hat by this
SAFETY_FACTOR = 1.01


class LinearOperator(object):
    """Real linear map R^in_dim -> R^out_dim together with its adjoint.

    Operators are immutable after construction; `apply` and `apply_adjoint`
    must be pure functions of their argument.
    """

    def __init__(self, in_dim, out_dim, apply, apply_adjoint, name='op'):
        if int(in_dim) < 1 or int(out_dim) < 1:
            raise DimensionError('operator dimensions must be positive, got {}x{}'.format(out_dim, in_dim))
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self._apply = apply
        self._apply_adjoint = apply_adjoint
        self.name = name

    @property
    def shape(self):
        return (self.out_dim, self.in_dim)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.in_dim,):
            raise DimensionError('{} expects a vector of length {}, got shape {}'.format(self.name, self.in_dim, x.shape))
        return self._apply(x)

    def apply_adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.out_dim,):
            raise DimensionError('{}* expects a vector of length {}, got shape {}'.format(self.name, self.out_dim, y.shape))
        return self._apply_adjoint(y)

    __call__ = apply

    @property
    def T(self):
        return LinearOperator(self.out_dim, self.in_dim, self._apply_adjoint, self._apply,
                              name='{}*'.format(self.name))

    def __matmul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return '{}({}, {}x{})'.format(type(self).__name__, self.name, self.out_dim, self.in_dim)


class DenseMatrix(LinearOperator):
    """Row-major dense backing for desk-scale operators."""

    def __init__(self, entries, rows=None, cols=None, name='matrix'):
        array = np.array(entries, dtype=float, order='C')
        if rows is not None or cols is not None:
            if array.size != int(rows) * int(cols):
                raise DimensionError('entries length {} != rows*cols = {}'.format(array.size, int(rows) * int(cols)))
            array = array.reshape(int(rows), int(cols))
        if array.ndim != 2:
            raise DimensionError('dense matrix needs 2-D entries, got {} dims'.format(array.ndim))
        array.setflags(write=False)
        self.array = array
        super(DenseMatrix, self).__init__(array.shape[1], array.shape[0],
                                          array.dot, array.T.dot, name=name)

    @property
    def rows(self):
        return self.array.shape[0]

    @property
    def cols(self):
        return self.array.shape[1]

    @property
    def entries(self):
        return self.array.ravel()

    @property
    def T(self):
        return DenseMatrix(self.array.T, name='{}*'.format(self.name))


def identity(n):
    return LinearOperator(n, n, np.copy, np.copy, name='I{}'.format(n))


def compose(f, g):
    """f o g: applies g then f; the adjoint applies f* then g*."""
    if f.in_dim != g.out_dim:
        raise DimensionError('cannot compose {} after {}: {} != {}'.format(f, g, f.in_dim, g.out_dim))
    return LinearOperator(g.in_dim, f.out_dim,
                          lambda x: f.apply(g.apply(x)),
                          lambda y: g.apply_adjoint(f.apply_adjoint(y)),
                          name='{}.{}'.format(f.name, g.name))


def to_dense(op):
    """Materialize an operator by applying it to the canonical basis."""
    if isinstance(op, DenseMatrix):
        return op.array
    cols = [op.apply(e) for e in np.eye(op.in_dim)]
    return np.stack(cols, axis=1)


def spectral_norm(op, iters=200, seed=0):
    """Power iteration on op* op; returns the estimate of ||op||_2.

    The estimate ||op x_k|| with x_k the normalized k-th power iterate is
    nondecreasing in k, so it never overshoots the true norm.
    """
    if iters < 1:
        raise ValueError('spectral_norm needs iters >= 1, got {}'.format(iters))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.in_dim)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(iters):
        y = op.apply_adjoint(op.apply(x))
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            logger.warning('spectral_norm: %s annihilated the start vector, reporting 0', op.name)
            return 0.0
        x = y / norm_y
        sigma = max(sigma, float(np.linalg.norm(op.apply(x))))
    return sigma


def lipschitz_factor(op, iters=200, seed=0):
    """Certified-with-margin bound (SAFETY_FACTOR * sigma-hat)."""
    return SAFETY_FACTOR * spectral_norm(op, iters=iters, seed=seed)


def norm_11(m):
    """||M||_{1,1}: the maximum absolute column sum."""
    array = m.array if isinstance(m, DenseMatrix) else np.asarray(m, dtype=float)
    if array.size == 0:
        return 0.0
    return float(np.abs(array).sum(axis=0).max())


def adjoint_mismatch(op, trials=20, seed=0):
    """Worst relative violation of <Au, v> = <u, A*v> over random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(op.in_dim)
        v = rng.standard_normal(op.out_dim)
        au = op.apply(u)
        lhs = float(np.dot(au, v))
        rhs = float(np.dot(u, op.apply_adjoint(v)))
        scale = max(float(np.linalg.norm(au) * np.linalg.norm(v)), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst

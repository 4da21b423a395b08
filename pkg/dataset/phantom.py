"""Piecewise-constant test image and radially sampled Fourier measurements."""
import logging
from dataclasses import dataclass

import numpy as np

from misc.errors import DimensionError
from operators.linops import LinearOperator

logger = logging.getLogger(__name__)

# (intensity, semi-axis a, semi-axis b, center x, center y, rotation in degrees) on [-1, 1]^2
ELLIPSES = [
    (1.0, 0.72, 0.92, 0.0, 0.0, 0.0),
    (-0.6, 0.66, 0.86, 0.0, -0.02, 0.0),
    (0.35, 0.40, 0.55, 0.0, 0.0, 0.0),
    (0.25, 0.22, 0.30, 0.0, 0.0, 0.0),
    (-0.3, 0.10, 0.25, 0.25, 0.05, -18.0),
    (0.4, 0.12, 0.18, -0.28, 0.10, 18.0),
    (0.2, 0.05, 0.05, 0.0, 0.45, 0.0),
    (0.2, 0.06, 0.04, 0.0, -0.55, 0.0),
]


@dataclass(frozen=True)
class PhantomSpec:
    side: int = 64
    num_radial_lines: int = 15
    noise_sigma: float = 0.001
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.side < 16:
            raise ValueError('phantom side must be >= 16, got {}'.format(self.side))
        if self.num_radial_lines < 1:
            raise ValueError('need at least one radial line, got {}'.format(self.num_radial_lines))
        if self.noise_sigma < 0:
            raise ValueError('noise_sigma must be >= 0, got {}'.format(self.noise_sigma))


def ellipse_phantom(side, scale=1.0):
    """Nested ellipses with constant intensities, rescaled to [0, scale]."""
    coords = (np.arange(side) - side / 2.0 + 0.5) / (side / 2.0)
    xx, yy = np.meshgrid(coords, -coords)
    img = np.zeros((side, side))
    for value, a, b, cx, cy, angle in ELLIPSES:
        theta = np.deg2rad(angle)
        dx, dy = xx - cx, yy - cy
        u = dx * np.cos(theta) + dy * np.sin(theta)
        v = -dx * np.sin(theta) + dy * np.cos(theta)
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += value
    low, high = img.min(), img.max()
    img = (img - low) / (high - low)
    return scale * img


def radial_mask(side, num_lines):
    """Boolean DFT mask (unshifted layout) of num_lines lines through the origin.

    Lines sit at angles j*pi/k and are rasterized by sampling every half pixel
    and rounding to the nearest grid point; the DC term is always kept.
    """
    if num_lines > 2 * side:
        logger.warning('%d radial lines exceed full sampling of a %dx%d grid, clamping to %d',
                       num_lines, side, side, 2 * side)
        num_lines = 2 * side
    center = side // 2
    mask = np.zeros((side, side), dtype=bool)
    steps = np.arange(-side, side + 0.5, 0.5)
    for j in range(num_lines):
        angle = j * np.pi / num_lines
        cols = np.rint(center + steps * np.cos(angle)).astype(int)
        rows = np.rint(center - steps * np.sin(angle)).astype(int)
        keep = (cols >= 0) & (cols < side) & (rows >= 0) & (rows < side)
        mask[rows[keep], cols[keep]] = True
    mask[center, center] = True
    return np.fft.ifftshift(mask)


def partial_fourier_operator(mask):
    """Real operator x -> [Re(P F x); Im(P F x)] with F the orthonormal 2-D DFT."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or not mask.any():
        raise DimensionError('mask must be a nonempty 2-D boolean array')
    shape = mask.shape
    index = np.flatnonzero(mask)
    k = index.size

    def _apply(x):
        coeffs = np.fft.fft2(x.reshape(shape), norm='ortho').ravel()[index]
        return np.concatenate([coeffs.real, coeffs.imag])

    def _apply_adjoint(y):
        full = np.zeros(mask.size, dtype=complex)
        full[index] = y[:k] + 1j * y[k:]
        return np.fft.ifft2(full.reshape(shape), norm='ortho').real.ravel()

    return LinearOperator(mask.size, 2 * k, _apply, _apply_adjoint, name='PF{}'.format(k))

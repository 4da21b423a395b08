import numpy as np
import pytest

from misc.errors import CosparseGenerationError, DimensionError
from operators.frames import (TightFrame, cosparse_signal, difference_operator_2d, gradient_frame,
                              load_frame, load_signal, random_tight_frame, save_frame, save_signal)
from operators.linops import adjoint_mismatch, identity, spectral_norm


def test_random_tight_frame_is_tight():
    frame = random_tight_frame(20, 24, seed=3)
    d_star = frame.analysis_matrix()
    assert d_star.shape == (24, 20)
    np.testing.assert_allclose(d_star.T.dot(d_star), np.eye(20), atol=1e-12)
    assert frame.is_tight


def test_random_tight_frame_is_deterministic():
    a = random_tight_frame(10, 12, seed=7).analysis_matrix()
    b = random_tight_frame(10, 12, seed=7).analysis_matrix()
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, random_tight_frame(10, 12, seed=8).analysis_matrix())


def test_tight_frame_needs_p_at_least_n():
    with pytest.raises(DimensionError):
        random_tight_frame(12, 10)
    with pytest.raises(DimensionError):
        TightFrame(n=3, p=2, d_star=identity(3), is_tight=True)


def test_cosparse_signal_vanishes_on_cosupport():
    frame = random_tight_frame(30, 36, seed=1)
    signal = cosparse_signal(frame, 25, seed=2)
    assert signal.l == 25
    assert abs(np.linalg.norm(signal.x) - 1.0) < 1e-12
    coeffs = frame.d_star.apply(signal.x)
    assert np.max(np.abs(coeffs[signal.cosupport])) < 1e-10
    assert len(np.unique(signal.cosupport)) == 25


def test_cosparse_signal_degenerate_cosupport():
    frame = random_tight_frame(6, 8, seed=0)
    with pytest.raises(CosparseGenerationError):
        cosparse_signal(frame, 8, seed=0)
    with pytest.raises(ValueError):
        cosparse_signal(frame, 9)


def test_difference_operator_adjoint_and_constants():
    op = difference_operator_2d(5, 7)
    assert op.shape == (70, 35)
    assert adjoint_mismatch(op, trials=10) < 1e-12
    np.testing.assert_allclose(op.apply(np.full(35, 3.0)), 0.0)


def test_gradient_frame_is_not_tight():
    frame = gradient_frame(4, 4)
    assert not frame.is_tight
    assert (frame.n, frame.p) == (16, 32)


def test_frame_and_signal_persistence(tmp_path):
    frame = random_tight_frame(8, 10, seed=4)
    signal = cosparse_signal(frame, 5, seed=4)
    save_frame(str(tmp_path / 'frame.bin'), frame)
    save_signal(str(tmp_path / 'signal.bin'), signal)
    loaded = load_frame(str(tmp_path / 'frame.bin'))
    np.testing.assert_array_equal(loaded.analysis_matrix(), frame.analysis_matrix())
    assert loaded.is_tight
    restored = load_signal(str(tmp_path / 'signal.bin'))
    np.testing.assert_array_equal(restored.x, signal.x)
    np.testing.assert_array_equal(restored.cosupport, signal.cosupport)


def test_difference_operator_on_small_image():
    image = np.array([[1.0, 0.0], [0.0, 0.0]])
    out = difference_operator_2d(2, 2).apply(image.ravel())
    horizontal, vertical = out[:4].reshape(2, 2), out[4:].reshape(2, 2)
    np.testing.assert_array_equal(horizontal[0], [-1.0, 1.0])
    np.testing.assert_array_equal(horizontal[1], [0.0, 0.0])
    np.testing.assert_array_equal(vertical, [[-1.0, 0.0], [1.0, 0.0]])


def test_difference_operator_norm_bound():
    op = difference_operator_2d(8, 8)
    assert op.out_dim == 2 * 8 * 8
    sigma = spectral_norm(op, iters=200)
    assert sigma <= np.sqrt(8.0) * (1 + 1e-12)
    assert sigma > 0.999 * np.sqrt(8.0)


def test_cosparse_signal_is_deterministic():
    frame = random_tight_frame(10, 14, seed=2)
    first, second = cosparse_signal(frame, 6, seed=9), cosparse_signal(frame, 6, seed=9)
    np.testing.assert_array_equal(first.x, second.x)
    np.testing.assert_array_equal(first.cosupport, second.cosupport)
    assert not np.array_equal(first.x, cosparse_signal(frame, 6, seed=10).x)


def test_cosparse_signal_without_cosupport():
    frame = random_tight_frame(10, 14, seed=2)
    signal = cosparse_signal(frame, 0, seed=4)
    assert signal.l == 0
    assert signal.x.shape == (10,)
    assert abs(np.linalg.norm(signal.x) - 1.0) < 1e-12
    assert np.count_nonzero(frame.d_star.apply(signal.x)) == 14

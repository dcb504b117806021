import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splinecs.metrics import gaussian_window, psnr, ssim


def test_psnr_uniform_error():
    # MSE 1e-5 at unit peak
    ref = np.zeros((8, 8))
    assert psnr(ref, ref + math.sqrt(1e-5)) == pytest.approx(50.0, abs=1e-9)


def test_psnr_one_grey_level():
    ref = np.zeros((4, 4))
    assert psnr(ref, ref + 1, peak=255) == pytest.approx(48.1308036, abs=1e-6)


def test_psnr_error_larger_than_peak():
    ref = np.zeros((4, 4))
    assert psnr(ref, ref + 2.0) == pytest.approx(-6.0206, abs=1e-4)


def test_psnr_identical_is_infinite():
    a = np.random.default_rng(0).random((5, 5))
    assert psnr(a, a) == math.inf


def test_psnr_errors():
    with pytest.raises(ValueError):
        psnr(np.zeros((3, 3)), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        psnr(np.zeros(3), np.ones(3), peak=0)


def test_window_normalized():
    w = gaussian_window()
    assert w.sum() == pytest.approx(1.0) and len(w) == 11
    assert np.array_equal(w, w[::-1])


@settings(max_examples=15)
@given(st.integers(0, 2**31))
def test_ssim_properties(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((24, 24)), rng.random((24, 24))
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-14)
    assert -1 <= ssim(a, b) < 1


def test_ssim_matches_scikit_image(rng):
    metrics = pytest.importorskip("skimage.metrics")
    a = rng.random((40, 37))
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0, 1)
    expected = metrics.structural_similarity(a, b, gaussian_weights=True, sigma=1.5,
                                             use_sample_covariance=False, data_range=1.0)
    assert ssim(a, b) == pytest.approx(expected, abs=1e-6)


def test_ssim_too_small():
    with pytest.raises(ValueError):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)))


def test_ssim_negated_zero_mean():
    # checkerboard: zero local mean, so only the anti-correlated structure term is left
    a = 0.1 * (-1.0) ** np.add.outer(np.arange(32), np.arange(32))
    value = ssim(a, -a)
    assert -1 <= value < 0


def test_psnr_doubling_error_and_shift(rng):
    ref = rng.random((16, 16))
    err = 0.01 * rng.standard_normal(ref.shape)
    assert psnr(ref, ref + err) - psnr(ref, ref + 2 * err) == pytest.approx(20 * math.log10(2), abs=1e-9)
    assert psnr(ref + 3, ref + 3 + err) == pytest.approx(psnr(ref, ref + err), abs=1e-9)

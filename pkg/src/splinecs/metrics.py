"""PSNR and SSIM."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage


def _check_pair(ref, test):
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    if ref.shape != test.shape:
        raise ValueError(f"image shapes differ: {ref.shape} vs {test.shape}")
    return ref, test


def psnr(ref, test, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical images."""
    ref, test = _check_pair(ref, test)
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    t = np.arange(size) - (size - 1) / 2
    w = np.exp(-(t**2) / (2 * sigma**2))
    return w / w.sum()


def ssim(ref, test, peak: float = 1.0, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean structural similarity over all fully-covered window positions.

    Gaussian-weighted local statistics with population (biased) variances.
    """
    ref, test = _check_pair(ref, test)
    if min(ref.shape) < window:
        raise ValueError(f"images must be at least {window}x{window}")
    w = gaussian_window(window, sigma)
    crop = (window - 1) // 2

    def local_mean(img):
        out = ndimage.correlate1d(img, w, axis=0, mode="reflect")
        out = ndimage.correlate1d(out, w, axis=1, mode="reflect")
        return out[crop:-crop, crop:-crop]

    mu_x, mu_y = local_mean(ref), local_mean(test)
    var_x = local_mean(ref * ref) - mu_x**2
    var_y = local_mean(test * test) - mu_y**2
    cov = local_mean(ref * test) - mu_x * mu_y
    c1, c2 = (k1 * peak) ** 2, (k2 * peak) ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))

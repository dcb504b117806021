"""Centered B-splines and the discrete filters that tie them to box sampling.

A scene is modelled as ``f(u, v) = sum a0[i, j] b^p(u - i) b^p(v - j)`` and each
detector cell integrates ``f`` against the centered box ``b^0``.  The cell
integrals (box samples) are ``c = a0 ** r`` where ``r[k] = <b^p, b^0(. - k)>``
equals the order-(p+1) B-spline sampled at the integers.

Grid convention: a coefficient grid produced for a ``K x L`` mask carries a
margin of ``h = (omega - 1) // 2`` extra coefficients on every side, so entry
``a0[i, j]`` sits at spatial position ``(i - h, j - h)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

MAX_ORDER = 5


def _check_order(p: int, limit: int = MAX_ORDER) -> int:
    if int(p) != p or p < 0 or p > limit:
        raise ValueError(f"spline order must be an integer in [0, {limit}], got {p!r}")
    return int(p)


def bspline_eval(p: int, t):
    """Centered B-spline of order ``p`` evaluated at ``t`` (scalar or array).

    Uses the truncated-power expansion.  The box ``b^0`` takes the value 1/2 at
    ``|t| = 1/2``, the midpoint convention that keeps it symmetric.
    """
    p = _check_order(p, MAX_ORDER + 1)
    t = np.asarray(t, dtype=float)
    if p == 0:
        out = np.where(np.abs(t) < 0.5, 1.0, 0.0)
        out = np.where(np.abs(t) == 0.5, 0.5, out)
    else:
        half = (p + 1) / 2.0
        out = np.zeros_like(t)
        for k in range(p + 2):
            x = t + half - k
            out += (-1) ** k * comb(p + 1, k) * np.where(x > 0, x, 0.0) ** p
        out /= factorial(p)
        out = np.where(np.abs(t) < half, out, 0.0)
        # cancellation can leave tiny negatives near the support edge
        out = np.maximum(out, 0.0)
    return out if out.ndim else float(out)


def bspline_rational(p: int, t: Fraction | int) -> Fraction:
    """Exact value of the centered B-spline at a rational point."""
    t = Fraction(t)
    half = Fraction(p + 1, 2)
    if p == 0 and abs(t) == half:
        return Fraction(1, 2)
    if abs(t) >= half:
        return Fraction(0)
    if p == 0:
        return Fraction(1)
    total = Fraction(0)
    for k in range(p + 2):
        x = t + half - k
        if x > 0:
            total += (-1) ** k * comb(p + 1, k) * x**p
    return total / factorial(p)


@lru_cache(maxsize=None)
def crosscorr_rational(p: int) -> tuple[Fraction, ...]:
    """Exact taps of ``r[k] = b^{p+1}(k)`` for ``|k| <= (omega - 1) / 2``."""
    p = _check_order(p)
    h = support_halfwidth(p)
    return tuple(bspline_rational(p + 1, k) for k in range(-h, h + 1))


def support_halfwidth(p: int) -> int:
    """Half-width ``h`` of the cross-correlation filter, ``omega = 2h + 1``."""
    return (_check_order(p) + 1) // 2


@dataclass(frozen=True)
class CrossCorrSeq:
    """Odd-length symmetric FIR filter ``r[k]``, ``k = -h..h``."""

    order: int
    taps: np.ndarray

    @property
    def omega(self) -> int:
        return len(self.taps)

    @property
    def halfwidth(self) -> int:
        return len(self.taps) // 2

    def __getitem__(self, k: int) -> float:
        # centered indexing: r[0] is the middle tap
        h = self.halfwidth
        if abs(k) > h:
            return 0.0
        return float(self.taps[k + h])

    def frequency_response(self, omega: np.ndarray) -> np.ndarray:
        k = np.arange(-self.halfwidth, self.halfwidth + 1)
        # real because the taps are symmetric
        return np.cos(np.outer(omega, k)) @ self.taps


def crosscorr_seq(p: int) -> CrossCorrSeq:
    taps = np.array([float(v) for v in crosscorr_rational(p)])
    taps.setflags(write=False)
    return CrossCorrSeq(order=int(p), taps=taps)


def pointwise_taps(p: int) -> np.ndarray:
    """Integer samples ``b^p(j)`` for ``|j| <= floor((p + 1) / 2)``."""
    p = _check_order(p)
    h = (p + 1) // 2
    return np.array([float(bspline_rational(p, j)) for j in range(-h, h + 1)])


def _filter_axis(x: np.ndarray, taps: np.ndarray, axis: int, mode: str) -> np.ndarray:
    """Apply a centered odd-length symmetric FIR filter along ``axis``.

    ``valid`` shrinks the axis by ``len(taps) - 1``; ``full`` zero-pads and grows
    it by the same amount (the transpose of ``valid``); ``same`` extends the
    input by whole-sample symmetry and keeps the length.
    """
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    w = len(taps)
    h = w // 2
    n = x.shape[-1]
    if mode == "valid":
        if n < w:
            raise ValueError(f"axis of length {n} is shorter than the {w}-tap filter")
        src, out_len = x, n - w + 1
    elif mode == "full":
        pad = [(0, 0)] * (x.ndim - 1) + [(w - 1, w - 1)]
        src, out_len = np.pad(x, pad), n + w - 1
    elif mode == "same":
        if h and n == 1:
            src = np.repeat(x, 2 * h + 1, axis=-1)
        else:
            pad = [(0, 0)] * (x.ndim - 1) + [(h, h)]
            src = np.pad(x, pad, mode="reflect") if h else x
        out_len = n
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = np.zeros(x.shape[:-1] + (out_len,))
    # symmetric taps: correlation and convolution coincide
    for j in range(w):
        if taps[j] != 0.0:
            out += taps[j] * src[..., j : j + out_len]
    return np.moveaxis(out, -1, axis)


def separable_filter(x: np.ndarray, taps: np.ndarray, mode: str) -> np.ndarray:
    """Filter both axes of a 2D grid with the same symmetric taps."""
    return _filter_axis(_filter_axis(x, taps, 0, mode), taps, 1, mode)


def render_box_samples(a0: np.ndarray, p: int) -> np.ndarray:
    """Box-integral samples ``c[k, l]`` of the spline with coefficients ``a0``.

    Only the valid part of the convolution with ``r`` is returned, so an
    ``(K + omega - 1) x (L + omega - 1)`` grid yields a ``K x L`` image.
    """
    return separable_filter(a0, crosscorr_seq(p).taps, "valid")


def render_box_samples_adjoint(c: np.ndarray, p: int) -> np.ndarray:
    """Transpose of :func:`render_box_samples`: full zero-padded convolution."""
    return separable_filter(c, crosscorr_seq(p).taps, "full")


def render_pointwise(a0: np.ndarray, p: int) -> np.ndarray:
    """Spline values ``f(k, l)`` at the integer grid of the coefficients.

    Same-size output; coefficients beyond the grid edge are taken by
    whole-sample symmetric extension so constants are reproduced exactly.
    Crop ``h = (omega - 1) // 2`` from every side to get the values at the
    ``K x L`` pixel centres.
    """
    return separable_filter(a0, pointwise_taps(p), "same")


def _symmetric_inverse_filter_axis(x: np.ndarray, seq: CrossCorrSeq, axis: int) -> np.ndarray:
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    if n == 1:
        return np.moveaxis(x / seq.taps.sum(), -1, axis)
    # whole-sample symmetric extension has period 2n - 2
    ext = np.concatenate([x, x[..., -2:0:-1]], axis=-1)
    period = ext.shape[-1]
    response = seq.frequency_response(2 * np.pi * np.fft.rfftfreq(period))
    if np.min(np.abs(response)) < 1e-12:
        raise ZeroDivisionError(f"cross-correlation filter of order {seq.order} has a spectral zero")
    out = np.fft.irfft(np.fft.rfft(ext, axis=-1) / response, n=period, axis=-1)[..., :n]
    return np.moveaxis(out, -1, axis)


def correction_filter_apply(samples: np.ndarray, p: int) -> np.ndarray:
    """Coefficients whose box samples are ``samples`` (inverse of ``r``).

    Separable division by ``R(e^{jw})`` on the whole-sample symmetric extension
    of the grid.  The result has the same shape as the input; applying
    :func:`render_box_samples` to it reproduces the interior of ``samples``.
    """
    seq = crosscorr_seq(p)
    if seq.omega == 1:
        return np.array(samples, dtype=float) / seq.taps[0]
    out = _symmetric_inverse_filter_axis(samples, seq, 0)
    return _symmetric_inverse_filter_axis(out, seq, 1)


def coeff_grid_shape(K: int, L: int, p: int) -> tuple[int, int]:
    """Coefficient grid needed to render a ``K x L`` box-sample image."""
    w = crosscorr_seq(p).omega
    return K + w - 1, L + w - 1

"""Separable 2D biorthogonal spline wavelet transform on arbitrary grid sizes.

One-dimensional convention (``n`` samples, ``x`` extended by whole-sample
symmetry about ``0`` and ``n - 1``)::

    low[k]  = sum_j dec_lo[j] x[2k - j]          k = 0 .. ceil(n/2) - 1
    high[k] = sum_j dec_hi[j] x[2k + 1 - j]      k = 0 .. floor(n/2) - 1
    x[m]    = sum_j rec_lo[j] U_lo[m - j] + sum_j rec_hi[j] U_hi[m - j]

``U_lo``/``U_hi`` are the subbands placed on the even/odd samples of a
length-``n`` sequence and extended the same way.  With symmetric odd-length
filters the extended subbands are exactly those of the infinite symmetric
signal, so the transform is non-expansive and perfectly invertible for any
``n >= 2``.

The 2D coefficient vector is laid out coarse to fine as
``[a(I), du(I), dv(I), duv(I), du(I-1), ..., duv(1)]``, each block row-major.
``du`` is highpass along axis 0 (rows, ``u``) and lowpass along axis 1.

All banks use the single-gain normalization: analysis and synthesis lowpass
filters both sum to ``sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly

SQRT2 = math.sqrt(2.0)
DEFAULT_LEVELS = 4


@dataclass(frozen=True)
class Filter:
    """FIR taps with the index of the first tap (``taps[i]`` is ``h[start + i]``)."""

    taps: np.ndarray
    start: int

    @property
    def stop(self) -> int:
        return self.start + len(self.taps) - 1

    def modulated(self) -> "Filter":
        n = np.arange(self.start, self.stop + 1)
        return Filter(np.where(n % 2 == 0, 1.0, -1.0) * self.taps, self.start)


@dataclass(frozen=True)
class FilterBank:
    name: str
    dec_lo: Filter
    dec_hi: Filter
    rec_lo: Filter
    rec_hi: Filter
    vanishing_moments: int

    @classmethod
    def from_lowpass(cls, name: str, dec_lo: Filter, rec_lo: Filter, vanishing_moments: int) -> "FilterBank":
        # alias cancellation fixes the highpass pair from the lowpass pair
        return cls(name, dec_lo, rec_lo.modulated(), rec_lo, dec_lo.modulated(), vanishing_moments)

    @property
    def max_length(self) -> int:
        return max(len(f.taps) for f in (self.dec_lo, self.dec_hi, self.rec_lo, self.rec_hi))


def _laurent_from_y(coeffs_in_y: np.ndarray) -> np.ndarray:
    """Expand a polynomial in ``y = sin^2(w/2)`` into symmetric z-domain taps."""
    y = np.array([-0.25, 0.5, -0.25])  # (2 - z - 1/z) / 4, centered
    out = np.array([0.0])
    power = np.array([1.0])
    for c in coeffs_in_y:
        width = max(len(out), len(power))
        out = np.pad(out, ((width - len(out)) // 2,) * 2) + c * np.pad(power, ((width - len(power)) // 2,) * 2)
        power = np.convolve(power, y)
    return out


def _spline_lowpass(n_cos: int, y_roots: list[complex]) -> Filter:
    """Lowpass ``sqrt2 * cos^n(w/2) * prod(1 - y / y_i)`` as centered taps."""
    taps = np.array([1.0])
    for _ in range(n_cos // 2):
        taps = np.convolve(taps, [0.25, 0.5, 0.25])  # cos^2(w/2)
    if y_roots:
        poly_y = np.real(npoly.polyfromroots(y_roots))
        poly_y = poly_y / poly_y[0]
        taps = np.convolve(taps, _laurent_from_y(poly_y))
    taps = SQRT2 * taps / taps.sum()
    return Filter(taps, -(len(taps) // 2))


def _daubechies_remainder(n: int) -> np.ndarray:
    """Coefficients of ``sum_{k<n} C(n-1+k, k) y^k`` in increasing powers."""
    return np.array([math.comb(n - 1 + k, k) for k in range(n)], dtype=float)


@lru_cache(maxsize=None)
def cdf_bank(synthesis_moments: int, analysis_moments: int) -> FilterBank:
    """Spline biorthogonal bank ``bior Nr.Nd`` (Cohen-Daubechies-Feauveau).

    ``bior2.2`` is the 5/3 pair.  ``bior4.4`` is the 9/7 pair, which splits the
    remainder polynomial of the degree-8 halfband product between both sides:
    the real root goes to the synthesis filter, the complex pair to analysis.
    """
    nr, nd = synthesis_moments, analysis_moments
    if (nr + nd) % 2 or nr % 2:
        raise ValueError("only even Nr and Nd with symmetric odd-length filters are supported")
    half = (nr + nd) // 2
    remainder = _daubechies_remainder(half)
    if (nr, nd) == (4, 4):
        roots = npoly.polyroots(remainder)
        real = [r for r in roots if abs(r.imag) < 1e-12]
        cplx = [r for r in roots if abs(r.imag) >= 1e-12]
        rec_lo = _spline_lowpass(nr, [real[0].real])
        dec_lo = _spline_lowpass(nd, cplx)
    else:
        rec_lo = _spline_lowpass(nr, [])
        roots = list(npoly.polyroots(remainder)) if half > 1 else []
        dec_lo = _spline_lowpass(nd, roots)
    return FilterBank.from_lowpass(f"bior{nr}.{nd}", dec_lo, rec_lo, nr)


def haar_bank() -> FilterBank:
    """Orthonormal Haar pair (even-length; exact only on even-length axes)."""
    c = 1.0 / SQRT2
    return FilterBank.from_lowpass("haar", Filter(np.array([c, c]), -1), Filter(np.array([c, c]), 0), 1)


BANKS = {
    "bior2.2": lambda: cdf_bank(2, 2),
    "bior4.4": lambda: cdf_bank(4, 4),
    "haar": haar_bank,
}


def get_bank(name: str) -> FilterBank:
    try:
        return BANKS[name]()
    except KeyError:
        raise ValueError(f"unknown filter bank {name!r}; choose from {sorted(BANKS)}") from None


# --- 1D building blocks -------------------------------------------------------


def _reflect_index(idx: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * n - 2
    idx = np.mod(idx, period)
    return np.where(idx > n - 1, period - idx, idx)


def _conv_gather(x: np.ndarray, filt: Filter, first: int, count: int, step: int) -> np.ndarray:
    """``out[k] = sum_j filt[j] xe[first + step*k - j]`` along the last axis."""
    n = x.shape[-1]
    lo = first - filt.stop
    hi = first + step * (count - 1) - filt.start
    idx = _reflect_index(np.arange(lo, hi + 1), n)
    xe = x[..., idx]
    out = np.zeros(x.shape[:-1] + (count,))
    for i, tap in enumerate(filt.taps):
        s = first - (filt.start + i) - lo
        out += tap * xe[..., s : s + step * (count - 1) + 1 : step]
    return out


def _conv_gather_adjoint(g: np.ndarray, filt: Filter, first: int, step: int, n: int) -> np.ndarray:
    """Transpose of :func:`_conv_gather` mapping ``count`` outputs back to ``n`` inputs."""
    count = g.shape[-1]
    lo = first - filt.stop
    hi = first + step * (count - 1) - filt.start
    ge = np.zeros(g.shape[:-1] + (hi - lo + 1,))
    for i, tap in enumerate(filt.taps):
        s = first - (filt.start + i) - lo
        ge[..., s : s + step * (count - 1) + 1 : step] += tap * g
    idx = _reflect_index(np.arange(lo, hi + 1), n)
    out = np.zeros(g.shape[:-1] + (n,))
    # the identity part of the extension is one contiguous slice
    inner = slice(-lo, -lo + n) if lo <= 0 and hi >= n - 1 else None
    if inner is not None:
        out += ge[..., inner]
        rest = np.r_[0:-lo, -lo + n : hi - lo + 1]
    else:
        rest = np.arange(hi - lo + 1)
    for e in rest:
        out[..., idx[e]] += ge[..., e]
    return out


def _split_sizes(n: int) -> tuple[int, int]:
    return (n + 1) // 2, n // 2


def analysis_1d(x: np.ndarray, bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[-1]
    n_lo, n_hi = _split_sizes(n)
    return (
        _conv_gather(x, bank.dec_lo, 0, n_lo, 2),
        _conv_gather(x, bank.dec_hi, 1, n_hi, 2),
    )


def analysis_1d_adjoint(lo: np.ndarray, hi: np.ndarray, bank: FilterBank) -> np.ndarray:
    n = lo.shape[-1] + hi.shape[-1]
    out = _conv_gather_adjoint(lo, bank.dec_lo, 0, 2, n)
    if hi.shape[-1]:
        out += _conv_gather_adjoint(hi, bank.dec_hi, 1, 2, n)
    return out


def _upsample(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = lo.shape[-1] + hi.shape[-1]
    u_lo = np.zeros(lo.shape[:-1] + (n,))
    u_hi = np.zeros(lo.shape[:-1] + (n,))
    u_lo[..., 0::2] = lo
    u_hi[..., 1::2] = hi
    return u_lo, u_hi


def synthesis_1d(lo: np.ndarray, hi: np.ndarray, bank: FilterBank) -> np.ndarray:
    n = lo.shape[-1] + hi.shape[-1]
    u_lo, u_hi = _upsample(lo, hi)
    return _conv_gather(u_lo, bank.rec_lo, 0, n, 1) + _conv_gather(u_hi, bank.rec_hi, 0, n, 1)


def synthesis_1d_adjoint(x: np.ndarray, bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[-1]
    g_lo = _conv_gather_adjoint(x, bank.rec_lo, 0, 1, n)
    g_hi = _conv_gather_adjoint(x, bank.rec_hi, 0, 1, n)
    return g_lo[..., 0::2], g_hi[..., 1::2]


def _along(axis: int, fn, *arrays):
    moved = [np.moveaxis(a, axis, -1) for a in arrays]
    res = fn(*moved)
    if isinstance(res, tuple):
        return tuple(np.moveaxis(r, -1, axis) for r in res)
    return np.moveaxis(res, -1, axis)


# --- 2D transform -------------------------------------------------------------


@dataclass(frozen=True)
class Ladder:
    """Subband shapes of an ``levels``-deep decomposition of a ``rows x cols`` grid."""

    rows: int
    cols: int
    levels: int

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("at least one decomposition level is required")
        r, c = self.rows, self.cols
        for i in range(1, self.levels + 1):
            if r < 2 or c < 2:
                raise ValueError(
                    f"{self.levels} levels are too many for a {self.rows}x{self.cols} grid "
                    f"(level {i} would split a {r}x{c} band)"
                )
            r, c = (r + 1) // 2, (c + 1) // 2

    def level_shape(self, i: int) -> tuple[int, int]:
        """Shape of the approximation band entering level ``i`` (``i = 1`` is the input)."""
        r, c = self.rows, self.cols
        for _ in range(i - 1):
            r, c = (r + 1) // 2, (c + 1) // 2
        return r, c

    def blocks(self) -> list[tuple[str, int, tuple[int, int]]]:
        """``(name, level, shape)`` in vector order."""
        out = []
        r, c = self.level_shape(self.levels)
        out.append(("a", self.levels, ((r + 1) // 2, (c + 1) // 2)))
        for i in range(self.levels, 0, -1):
            r, c = self.level_shape(i)
            out.append(("du", i, (r // 2, (c + 1) // 2)))
            out.append(("dv", i, ((r + 1) // 2, c // 2)))
            out.append(("duv", i, (r // 2, c // 2)))
        return out

    @property
    def size(self) -> int:
        return self.rows * self.cols


def max_levels(rows: int, cols: int) -> int:
    n, levels = min(rows, cols), 0
    while n >= 2:
        n, levels = (n + 1) // 2, levels + 1
    return levels


def _split(x: np.ndarray, ladder: Ladder) -> list[np.ndarray]:
    if x.shape != (ladder.size,):
        raise ValueError(f"expected a coefficient vector of length {ladder.size}, got shape {x.shape}")
    parts, pos = [], 0
    for _, _, shape in ladder.blocks():
        size = shape[0] * shape[1]
        parts.append(x[pos : pos + size].reshape(shape))
        pos += size
    return parts


def _analysis_2d(band: np.ndarray, bank: FilterBank):
    lo, hi = _along(0, lambda a: analysis_1d(a, bank), band)
    ll, lh = _along(1, lambda a: analysis_1d(a, bank), lo)
    hl, hh = _along(1, lambda a: analysis_1d(a, bank), hi)
    return ll, hl, lh, hh  # a, du, dv, duv


def _synthesis_2d(ll, hl, lh, hh, bank: FilterBank) -> np.ndarray:
    lo = _along(1, lambda a, b: synthesis_1d(a, b, bank), ll, lh)
    hi = _along(1, lambda a, b: synthesis_1d(a, b, bank), hl, hh)
    return _along(0, lambda a, b: synthesis_1d(a, b, bank), lo, hi)


def dwt2(a0: np.ndarray, bank: FilterBank, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Forward transform of a coefficient grid into the flat wavelet vector."""
    a0 = np.asarray(a0, dtype=float)
    ladder = Ladder(*a0.shape, levels)
    details = []
    band = a0
    for _ in range(ladder.levels):
        band, du, dv, duv = _analysis_2d(band, bank)
        details.append((du, dv, duv))
    parts = [band.ravel()]
    for du, dv, duv in reversed(details):
        parts += [du.ravel(), dv.ravel(), duv.ravel()]
    return np.concatenate(parts)


def idwt2(x: np.ndarray, bank: FilterBank, shape: tuple[int, int], levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Inverse transform (``a0 = Psi x``)."""
    ladder = Ladder(*shape, levels)
    parts = _split(np.asarray(x, dtype=float), ladder)
    band = parts[0]
    for i in range(ladder.levels):
        du, dv, duv = parts[1 + 3 * i : 4 + 3 * i]
        band = _synthesis_2d(band, du, dv, duv, bank)
    return band


def idwt2_adjoint(g: np.ndarray, bank: FilterBank, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """``Psi^T g``: analysis machinery run with the synthesis filters, boundary folded exactly."""
    g = np.asarray(g, dtype=float)
    ladder = Ladder(*g.shape, levels)
    details = []
    band = g
    for _ in range(ladder.levels):
        lo, hi = _along(0, lambda a: synthesis_1d_adjoint(a, bank), band)
        ll, lh = _along(1, lambda a: synthesis_1d_adjoint(a, bank), lo)
        hl, hh = _along(1, lambda a: synthesis_1d_adjoint(a, bank), hi)
        band = ll
        details.append((hl, lh, hh))
    parts = [band.ravel()]
    for du, dv, duv in reversed(details):
        parts += [du.ravel(), dv.ravel(), duv.ravel()]
    return np.concatenate(parts)


def dwt2_adjoint(x: np.ndarray, bank: FilterBank, shape: tuple[int, int], levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Transpose of :func:`dwt2`."""
    ladder = Ladder(*shape, levels)
    parts = _split(np.asarray(x, dtype=float), ladder)
    band = parts[0]
    for i in range(ladder.levels):
        du, dv, duv = parts[1 + 3 * i : 4 + 3 * i]
        lo = _along(1, lambda a, b: analysis_1d_adjoint(a, b, bank), band, dv)
        hi = _along(1, lambda a, b: analysis_1d_adjoint(a, b, bank), du, duv)
        band = _along(0, lambda a, b: analysis_1d_adjoint(a, b, bank), lo, hi)
    return band


def subbands(x: np.ndarray, shape: tuple[int, int], levels: int = DEFAULT_LEVELS) -> dict[tuple[str, int], np.ndarray]:
    """Views of each subband of a flat wavelet vector, keyed by ``(name, level)``."""
    ladder = Ladder(*shape, levels)
    return {(name, lvl): part for (name, lvl, _), part in zip(ladder.blocks(), _split(np.asarray(x), ladder))}

"""Structurally random measurement operator ``S = D F P`` (matrix-free).

``P`` permutes the ``n`` samples, ``F`` is the orthonormal Walsh-Hadamard
transform in natural (Sylvester) order and ``D`` keeps ``m`` rows.  The
physical DMD masks are ``+-1``; they are ``sqrt(n)`` times the rows used here,
a global scale that the regularization weight absorbs.

Randomness comes from Python's Mersenne Twister (``random.Random``), whose
``random()`` stream is guaranteed stable across platforms and Python versions.
Both the permutation and the row subset are drawn by Fisher-Yates shuffles
over that stream, so ``(n, m, seed, force_dc)`` fully determines the operator.

Every Hadamard row except row 0 sums to zero, so without row 0 the mean
intensity of the scene is invisible to the measurements.  ``force_dc`` (the
default) always keeps row 0 and draws the other ``m - 1`` rows at random.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def fwht(v: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    Butterflies run in place on a copy of ``v``; applying the transform twice
    returns ``n * v``.
    """
    out = np.array(v, dtype=float, copy=True)
    n = out.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"Walsh-Hadamard length must be a power of two, got {n}")
    lead = out.shape[:-1]
    h = 1
    while h < n:
        blocks = out.reshape(lead + (n // (2 * h), 2, h))
        top = blocks[..., 0, :].copy()
        blocks[..., 0, :] += blocks[..., 1, :]
        blocks[..., 1, :] *= -1.0
        blocks[..., 1, :] += top
        h *= 2
    return out


def fisher_yates(n: int, rng: random.Random, count: int | None = None) -> np.ndarray:
    """First ``count`` entries of a uniformly shuffled ``range(n)``."""
    perm = list(range(n))
    count = n if count is None else count
    for i in range(min(count, n - 1)):
        j = i + int(rng.random() * (n - i))
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm[:count], dtype=np.int64)


@dataclass(frozen=True)
class SrmConfig:
    n: int
    m: int
    seed: int
    permutation: np.ndarray = field(repr=False)
    row_select: np.ndarray = field(repr=False)
    force_dc: bool = False

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ValueError(f"signal length must be a power of two, got {self.n}")
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.permutation.shape != (self.n,) or self.row_select.shape != (self.m,):
            raise ValueError("permutation/row selection have the wrong length")
        if np.any(np.diff(self.row_select) <= 0):
            raise ValueError("row selection must be strictly increasing")

    @classmethod
    def from_seed(cls, n: int, m: int, seed: int, force_dc: bool = True) -> "SrmConfig":
        if not is_power_of_two(n):
            raise ValueError(f"signal length must be a power of two, got {n}")
        if not 1 <= m <= n:
            raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
        rng = random.Random(seed)
        permutation = fisher_yates(n, rng)
        if force_dc:
            rows = np.concatenate([[0], 1 + fisher_yates(n - 1, rng, m - 1)])
        else:
            rows = fisher_yates(n, rng, m)
        return cls(n, m, seed, permutation, np.sort(rows), force_dc)

    @classmethod
    def identity(cls, n: int) -> "SrmConfig":
        """No permutation, every Hadamard row (``S = F``)."""
        return cls(n, n, -1, np.arange(n), np.arange(n))


def srm_forward(cfg: SrmConfig, c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (cfg.n,):
        raise ValueError(f"srm_forward expects a length-{cfg.n} vector, got shape {c.shape}")
    return fwht(c[cfg.permutation])[cfg.row_select] / np.sqrt(cfg.n)


def srm_adjoint(cfg: SrmConfig, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (cfg.m,):
        raise ValueError(f"srm_adjoint expects a length-{cfg.m} vector, got shape {y.shape}")
    z = np.zeros(cfg.n)
    z[cfg.row_select] = y
    w = fwht(z) / np.sqrt(cfg.n)
    out = np.empty(cfg.n)
    out[cfg.permutation] = w
    return out


def srm_dense(cfg: SrmConfig) -> np.ndarray:
    """Explicit ``m x n`` matrix, for small-size checks only."""
    return np.stack([srm_forward(cfg, e) for e in np.eye(cfg.n)], axis=1)


def measurement_masks(cfg: SrmConfig, K: int, L: int, rows=None) -> np.ndarray:
    """``+-1`` DMD masks (``K x L`` each) for the selected measurements."""
    if K * L != cfg.n:
        raise ValueError(f"mask {K}x{L} does not match n={cfg.n}")
    rows = range(cfg.m) if rows is None else rows
    masks = []
    for r in rows:
        e = np.zeros(cfg.m)
        e[r] = 1.0
        masks.append((srm_adjoint(cfg, e) * np.sqrt(cfg.n)).reshape(K, L))
    return np.round(np.stack(masks)).astype(np.int8)

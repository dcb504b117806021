"""Composite sensing operator ``Theta = D F P R Psi`` and its transpose.

Forward chain (wavelet vector of length ``Ntilde`` to ``M`` readings)::

    x --idwt2--> a0 (K+w-1, L+w-1) --R valid--> c (K, L) --row-major--> S c

The transpose runs ``S^T``, reshapes, applies the full zero-padded
convolution with ``r`` (``R^T``) and finishes with ``Psi^T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import splines, wavelet
from .srm import SrmConfig, srm_adjoint, srm_forward


class DimensionError(ValueError):
    """Raised when an array does not fit a stage of the sensing chain."""


@dataclass(frozen=True)
class SensingOp:
    srm: SrmConfig
    p: int
    bank: wavelet.FilterBank
    levels: int
    K: int
    L: int
    taps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.K * self.L != self.srm.n:
            raise DimensionError(f"mask {self.K}x{self.L} does not match SRM length {self.srm.n}")
        object.__setattr__(self, "taps", splines.crosscorr_seq(self.p).taps)
        wavelet.Ladder(*self.grid_shape, self.levels)

    @classmethod
    def build(cls, K: int, L: int, m: int, seed: int, p: int, bank: str | wavelet.FilterBank = "bior2.2",
              levels: int = wavelet.DEFAULT_LEVELS) -> "SensingOp":
        if isinstance(bank, str):
            bank = wavelet.get_bank(bank)
        return cls(SrmConfig.from_seed(K * L, m, seed), p, bank, levels, K, L)

    @property
    def omega(self) -> int:
        return len(self.taps)

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.K + self.omega - 1, self.L + self.omega - 1

    @property
    def n_coeffs(self) -> int:
        r, c = self.grid_shape
        return r * c

    @property
    def m(self) -> int:
        return self.srm.m

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n_coeffs

    def synthesize(self, x: np.ndarray) -> np.ndarray:
        """Coefficient grid ``a0 = Psi x``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_coeffs,):
            raise DimensionError(f"idwt2 stage: expected {self.n_coeffs} wavelet coefficients, got shape {x.shape}")
        return wavelet.idwt2(x, self.bank, self.grid_shape, self.levels)

    def render(self, x: np.ndarray) -> np.ndarray:
        """Box-sample image ``c = R Psi x`` of shape ``(K, L)``."""
        return splines.separable_filter(self.synthesize(x), self.taps, "valid")

    def forward(self, x: np.ndarray) -> np.ndarray:
        return srm_forward(self.srm, self.render(x).ravel())

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m,):
            raise DimensionError(f"srm_adjoint stage: expected {self.m} measurements, got shape {y.shape}")
        c = srm_adjoint(self.srm, y).reshape(self.K, self.L)
        a0 = splines.separable_filter(c, self.taps, "full")
        return wavelet.idwt2_adjoint(a0, self.bank, self.levels)

    def normal(self, x: np.ndarray) -> np.ndarray:
        return self.adjoint(self.forward(x))

    def todense(self) -> np.ndarray:
        """Materialize ``Theta`` column by column (small instances only)."""
        if self.n_coeffs > 20000:
            raise MemoryError(f"refusing to densify a {self.m}x{self.n_coeffs} operator")
        return np.stack([self.forward(e) for e in np.eye(self.n_coeffs)], axis=1)


def theta_forward(op: SensingOp, x: np.ndarray) -> np.ndarray:
    return op.forward(x)


def theta_adjoint(op: SensingOp, y: np.ndarray) -> np.ndarray:
    return op.adjoint(y)

"""Single-pixel acquisition and the continuous-domain quadrature oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import splines
from .srm import SrmConfig, srm_forward


@dataclass(frozen=True)
class Scene:
    """Either a pixel image (read as box integrals) or spline coefficients."""

    kind: str
    pixels: np.ndarray | None = None
    a0: np.ndarray | None = None
    p: int | None = None

    def __post_init__(self):
        if self.kind == "pixel_image":
            if self.pixels is None or self.pixels.ndim != 2:
                raise ValueError("pixel_image scenes need a 2D pixel grid")
            grid = self.pixels
        elif self.kind == "spline_synthetic":
            if self.a0 is None or self.p is None:
                raise ValueError("spline_synthetic scenes need coefficients and an order")
            grid = self.a0
        else:
            raise ValueError(f"unknown scene kind {self.kind!r}")
        if not np.all(np.isfinite(grid)):
            raise ValueError("scene intensities must be finite")

    @classmethod
    def from_pixels(cls, pixels) -> "Scene":
        return cls("pixel_image", pixels=np.asarray(pixels, dtype=float))

    @classmethod
    def from_coefficients(cls, a0, p: int) -> "Scene":
        return cls("spline_synthetic", a0=np.asarray(a0, dtype=float), p=int(p))

    def box_samples(self) -> np.ndarray:
        """The ``K x L`` cell integrals ``c`` seen by the detector."""
        if self.kind == "pixel_image":
            return self.pixels
        return splines.render_box_samples(self.a0, self.p)


@dataclass(frozen=True)
class MeasurementSet:
    y: np.ndarray
    srm: SrmConfig
    K: int
    L: int
    p: int | None = None
    noise_sigma: float = 0.0
    noise_seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def manifest(self) -> dict:
        fields = {
            "m": self.srm.m,
            "n": self.srm.n,
            "k": self.K,
            "l": self.L,
            "seed": self.srm.seed,
            "p": "none" if self.p is None else self.p,
            "noise_sigma": repr(float(self.noise_sigma)),
            "noise_seed": self.noise_seed,
            "force_dc": int(self.srm.force_dc),
        }
        fields.update(self.extra)
        return fields


def acquire(scene: Scene, srm: SrmConfig, noise_sigma: float = 0.0, noise_seed: int = 0) -> MeasurementSet:
    """Simulate ``y = S c`` (plus optional white Gaussian noise)."""
    c = scene.box_samples()
    K, L = c.shape
    if K * L != srm.n:
        raise ValueError(f"scene renders to {K}x{L} but the SRM expects n={srm.n}")
    y = srm_forward(srm, c.ravel())
    if noise_sigma > 0:
        y = y + noise_sigma * np.random.default_rng(noise_seed).standard_normal(y.shape)
    p = scene.p if scene.kind == "spline_synthetic" else None
    return MeasurementSet(y, srm, K, L, p, float(noise_sigma), int(noise_seed))


def _cell_nodes(k: int, step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    nodes = k - 0.5 + np.arange(n + 1) / n
    # one-sided limits at the cell edges (the box is discontinuous there)
    nodes[0] += 1e-12
    nodes[-1] -= 1e-12
    return nodes


def _trapezoid_weights(count: int) -> np.ndarray:
    w = np.full(count, 1.0 / (count - 1))
    w[0] = w[-1] = 0.5 / (count - 1)
    return w


def quadrature_cell_integrals(a0: np.ndarray, p: int, K: int, L: int, step: float = 1e-3) -> np.ndarray:
    """Integrate ``f(u, v)`` over each of the ``K x L`` unit cells numerically.

    ``f`` is evaluated pointwise from its B-spline expansion on a tensor grid of
    trapezoid nodes; no cross-correlation identity is used.
    """
    a0 = np.asarray(a0, dtype=float)
    h = splines.support_halfwidth(p)
    pos_i = np.arange(a0.shape[0]) - h
    pos_j = np.arange(a0.shape[1]) - h
    nodes_v = [_cell_nodes(l, step) for l in range(L)]
    wv = _trapezoid_weights(len(nodes_v[0]))
    Bv = np.concatenate([splines.bspline_eval(p, nv[:, None] - pos_j[None, :]) for nv in nodes_v])
    out = np.empty((K, L))
    for k in range(K):
        nu = _cell_nodes(k, step)
        wu = _trapezoid_weights(len(nu))
        Bu = splines.bspline_eval(p, nu[:, None] - pos_i[None, :])
        f = Bu @ a0 @ Bv.T  # f on the (u-nodes of cell k) x (all v-nodes) grid
        rowsum = wu @ f
        out[k] = rowsum.reshape(L, -1) @ wv
    return out


def quadrature_measurement_oracle(a0: np.ndarray, p: int, mask: np.ndarray, step: float = 1e-3) -> float:
    """``y_m`` for mask coefficients ``s_m`` by direct quadrature of the double integral."""
    mask = np.asarray(mask, dtype=float)
    return float(np.sum(mask * quadrature_cell_integrals(a0, p, *mask.shape, step=step)))

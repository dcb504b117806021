"""Matrix-free solver for ``min_x ||y - Theta x||^2 + lam ||x||_1``.

Accelerated proximal gradient (FISTA) with soft thresholding.  A candidate
iterate that raises the objective triggers a momentum restart from the last
accepted point, so accepted iterates never increase the objective.  The
operator only needs ``forward``/``adjoint``/``shape``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    lam: float
    max_iters: int = 2000
    rel_tol: float = 1e-6
    step: str = "fixed"  # or "backtracking"
    continuation: bool = False
    continuation_factor: float = 0.2
    lipschitz: float | None = None  # ||Theta||_2^2 if already known

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.step not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step rule {self.step!r}")
        if not 0 < self.continuation_factor < 1:
            raise ValueError("continuation_factor must lie in (0, 1)")


@dataclass
class SolveReport:
    iterations: int
    objective: float
    residual_norm: float
    sparsity: int
    wall_time: float
    lipschitz: float
    restarts: int = 0
    history: list[tuple[int, float, float, float]] = field(default_factory=list, repr=False)

    def progress_lines(self) -> list[str]:
        """``iteration lam objective residual`` rows, tab separated."""
        return [f"{it}\t{lam:.17g}\t{obj:.17g}\t{res:.17g}" for it, lam, obj, res in self.history]


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def estimate_lipschitz(op, max_iters: int = 100, tol: float = 1e-6, seed: int = 0) -> float:
    """Power-iteration estimate of ``||Theta||_2^2`` (largest eigenvalue of ``Theta^T Theta``)."""
    v = np.random.default_rng(seed).standard_normal(op.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iters):
        w = op.adjoint(op.forward(v))
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return est


def _objective(residual: np.ndarray, x: np.ndarray, lam: float) -> float:
    return float(residual @ residual + lam * np.abs(x).sum())


def solve_l1(op, y: np.ndarray, cfg: SolverConfig, x0: np.ndarray | None = None):
    """Return ``(x_hat, SolveReport)``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (op.shape[0],):
        raise ValueError(f"expected {op.shape[0]} measurements, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("measurements contain non-finite values")
    t0 = time.perf_counter()
    norm_sq = cfg.lipschitz if cfg.lipschitz is not None else estimate_lipschitz(op)
    if norm_sq <= 0:
        raise ValueError("sensing operator is zero; the problem has no curvature")
    # gradient of ||Theta x - y||^2 is 2 Theta^T (Theta x - y)
    lip = 2.0 * norm_sq * 1.01

    x = np.zeros(op.shape[1]) if x0 is None else np.array(x0, dtype=float)
    Ax = op.forward(x)

    stages = [cfg.lam]
    if cfg.continuation:
        lam_max = 2.0 * float(np.max(np.abs(op.adjoint(y))))
        lam = lam_max * cfg.continuation_factor
        stages = []
        while lam > cfg.lam:
            stages.append(lam)
            lam *= cfg.continuation_factor
        stages.append(cfg.lam)

    history: list[tuple[int, float, float, float]] = []
    it_total, restarts = 0, 0
    for s, lam in enumerate(stages):
        final = s == len(stages) - 1
        tol = cfg.rel_tol if final else max(cfg.rel_tol, 1e-4)
        budget = cfg.max_iters - it_total if final else max(1, (cfg.max_iters - it_total) // (len(stages) - s + 1))
        x, Ax, lip, n_it, n_restart = _fista_stage(op, y, lam, x, Ax, lip, tol, budget, cfg.step, history, it_total)
        it_total += n_it
        restarts += n_restart

    residual = Ax - y
    report = SolveReport(
        iterations=it_total,
        objective=_objective(residual, x, cfg.lam),
        residual_norm=float(np.linalg.norm(residual)),
        sparsity=int(np.count_nonzero(np.abs(x) > 1e-8)),
        wall_time=time.perf_counter() - t0,
        lipschitz=norm_sq,
        restarts=restarts,
        history=history,
    )
    return x, report


def _fista_stage(op, y, lam, x, Ax, lip, tol, budget, step, history, it0):
    fx = _objective(Ax - y, x, lam)
    v, Av, t = x, Ax, 1.0
    restarts = 0
    it = 0
    while it < budget:
        it += 1
        grad = 2.0 * op.adjoint(Av - y)
        while True:
            z = soft_threshold(v - grad / lip, lam / lip)
            Az = op.forward(z)
            if step == "fixed":
                break
            # sufficient-decrease test of the quadratic model
            d = z - v
            fq = float((Av - y) @ (Av - y)) + float(grad @ d) + 0.5 * lip * float(d @ d)
            if float((Az - y) @ (Az - y)) <= fq * (1 + 1e-12):
                break
            lip *= 2.0
        fz = _objective(Az - y, z, lam)
        if fz > fx * (1 + 1e-14) + 1e-300:
            if v is x:
                # plain proximal step from the accepted point still went up:
                # the curvature estimate is too small
                lip *= 2.0
            else:
                restarts += 1
            v, Av, t = x, Ax, 1.0
            continue
        dx = z - x
        rel = float(np.linalg.norm(dx)) / max(float(np.linalg.norm(z)), 1e-300)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_next
        v = z + beta * dx
        Av = Az + beta * (Az - Ax)
        x, Ax, fx, t = z, Az, fz, t_next
        history.append((it0 + it, lam, fx, float(np.linalg.norm(Ax - y))))
        if rel < tol:
            break
    log.debug("stage lam=%g: %d iterations, objective %.6g", lam, it, fx)
    return x, Ax, lip, it, restarts

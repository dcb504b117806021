"""Quick verification battery behind ``splinecs selfcheck``.

Dense factors here are built from their definitions (explicit Hadamard,
permutation and Toeplitz matrices), not from the fast routines they check.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.linalg import hadamard

from . import splines, wavelet
from .sensing import SensingOp
from .srm import SrmConfig

CROSSCORR_TABLE = {
    0: [Fraction(1)],
    1: [Fraction(1, 8), Fraction(3, 4), Fraction(1, 8)],
    2: [Fraction(1, 6), Fraction(2, 3), Fraction(1, 6)],
    3: [Fraction(1, 384), Fraction(76, 384), Fraction(230, 384), Fraction(76, 384), Fraction(1, 384)],
}


def dense_srm(cfg: SrmConfig) -> np.ndarray:
    P = np.zeros((cfg.n, cfg.n))
    P[np.arange(cfg.n), cfg.permutation] = 1.0
    F = hadamard(cfg.n) / np.sqrt(cfg.n)
    D = np.zeros((cfg.m, cfg.n))
    D[np.arange(cfg.m), cfg.row_select] = 1.0
    return D @ F @ P


def valid_conv_matrix(n_out: int, taps: np.ndarray) -> np.ndarray:
    w = len(taps)
    T = np.zeros((n_out, n_out + w - 1))
    for k in range(n_out):
        T[k, k : k + w] = taps[::-1]
    return T


def dense_r(K: int, L: int, p: int) -> np.ndarray:
    taps = splines.crosscorr_seq(p).taps
    return np.kron(valid_conv_matrix(K, taps), valid_conv_matrix(L, taps))


def _reflect(i: int, n: int) -> int:
    if n == 1:
        return 0
    period = 2 * n - 2
    i %= period
    return period - i if i > n - 1 else i


def synthesis_matrix_1d(n: int, bank: wavelet.FilterBank) -> np.ndarray:
    """``n x n`` matrix mapping ``[low; high]`` to the signal, from the filter formulas."""
    n_lo = (n + 1) // 2
    M = np.zeros((n, n))
    for m in range(n):
        for filt, parity, offset in ((bank.rec_lo, 0, 0), (bank.rec_hi, 1, n_lo)):
            for i, tap in enumerate(filt.taps):
                src = _reflect(m - (filt.start + i), n)
                if src % 2 == parity:
                    M[m, offset + src // 2] += tap
    return M


def _psi_apply_dense(x: np.ndarray, shape: tuple[int, int], bank: wavelet.FilterBank, levels: int) -> np.ndarray:
    ladder = wavelet.Ladder(*shape, levels)
    parts, pos = {}, 0
    for name, lvl, (br, bc) in ladder.blocks():
        parts[(name, lvl)] = x[pos : pos + br * bc].reshape(br, bc)
        pos += br * bc
    band = parts[("a", levels)]
    for lvl in range(levels, 0, -1):
        r, c = ladder.level_shape(lvl)
        quad = np.block([[band, parts[("dv", lvl)]], [parts[("du", lvl)], parts[("duv", lvl)]]])
        band = synthesis_matrix_1d(r, bank) @ quad @ synthesis_matrix_1d(c, bank).T
    return band


def dense_psi(rows: int, cols: int, bank: wavelet.FilterBank, levels: int) -> np.ndarray:
    """Synthesis operator as a dense matrix (flat vector to row-major grid)."""
    N = rows * cols
    return np.stack([_psi_apply_dense(e, (rows, cols), bank, levels).ravel() for e in np.eye(N)], axis=1)


def run_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    results = []

    def record(name, err, tol):
        results.append((name, bool(err <= tol), f"err={err:.3g} tol={tol:g}"))

    err = max(float(abs(Fraction(v) - t)) for p, taps in CROSSCORR_TABLE.items()
              for v, t in zip(splines.crosscorr_rational(p), taps))
    record("exact cross-correlation taps", err, 0.0)

    for name in ("bior2.2", "bior4.4"):
        bank = wavelet.get_bank(name)
        errs = []
        for n in (16, 17, 64):
            a = rng.standard_normal((n, n))
            errs.append(np.abs(wavelet.idwt2(wavelet.dwt2(a, bank, 4), bank, a.shape, 4) - a).max())
        record(f"perfect reconstruction {name}", float(max(errs)), 1e-10)

    for p in range(4):
        op = SensingOp.build(8, 8, 32, seed=seed + 1, p=p, bank="bior2.2", levels=2)
        explicit = dense_srm(op.srm) @ dense_r(8, 8, p) @ dense_psi(*op.grid_shape, op.bank, 2)
        record(f"dense Theta = D F P R Psi (p={p})", float(np.abs(op.todense() - explicit).max()), 1e-10)

    for p in range(4):
        op = SensingOp.build(16, 16, 100, seed=seed + 2, p=p)
        x, y = rng.standard_normal(op.n_coeffs), rng.standard_normal(op.m)
        lhs, rhs = op.forward(x) @ y, x @ op.adjoint(y)
        record(f"adjoint identity (p={p})", abs(lhs - rhs) / abs(lhs), 1e-8)
    return results

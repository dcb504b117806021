"""Command line entry point: ``splinecs <subcommand>``.

Subcommands: acquire, reconstruct, evaluate, sweep, filters, selfcheck.
Every flag of ``acquire`` and ``sweep`` can also come from a ``key=value``
config file (``--config``); command-line flags win.  ``SPLINECS_OUTPUT_DIR``
overrides the output directory of ``reconstruct`` and ``sweep``.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import io, metrics, splines, wavelet
from .sensing import SensingOp
from .simulate import MeasurementSet, Scene, acquire
from .solver import SolverConfig, solve_l1
from .srm import SrmConfig, is_power_of_two

log = logging.getLogger("splinecs")

OUTPUT_ENV = "SPLINECS_OUTPUT_DIR"


class UsageError(Exception):
    """Bad input: reported on stderr with exit status 2."""


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    return [float(t) for t in str(text).replace(",", " ").split()]


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(t) for t in text]
    return [int(t) for t in str(text).replace(",", " ").split()]


def derive_seed(master: int, index: int) -> int:
    """Independent, platform-stable seed for sweep entry ``index``."""
    digest = hashlib.sha256(f"{master}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class ExperimentConfig:
    image: str = ""
    K: int = 0  # 0: use the image size
    L: int = 0
    ratios: list[float] = field(default_factory=lambda: [0.25])
    orders: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    bank: str = "bior2.2"
    levels: int = wavelet.DEFAULT_LEVELS
    lams: list[float] = field(default_factory=lambda: [1e-3])
    seed: int = 0
    output_dir: str = "out"
    max_iters: int = 2000
    rel_tol: float = 1e-6
    force_dc: bool = True

    def validate(self):
        for r in self.ratios:
            if not 0 < r <= 1:
                raise UsageError(f"measurement ratio {r} outside (0, 1]")
        for p in self.orders:
            if not 0 <= p <= splines.MAX_ORDER:
                raise UsageError(f"spline order {p} outside [0, {splines.MAX_ORDER}]")
        for d in (self.K, self.L):
            if d and not is_power_of_two(d):
                raise UsageError(f"mask size {d} is not a power of two")
        if any(lam < 0 for lam in self.lams):
            raise UsageError("regularization weights must be >= 0")
        wavelet.get_bank(self.bank)

    @classmethod
    def merge(cls, config_file: str | None, overrides: dict) -> "ExperimentConfig":
        values = {}
        if config_file:
            values.update(io.read_config(config_file))
        values.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls()
        convert = {"ratios": _floats, "lams": _floats, "orders": _ints, "K": int, "L": int, "levels": int,
                   "seed": int, "max_iters": int, "rel_tol": float,
                   "force_dc": lambda v: v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes")}
        known = {f.name for f in fields(cls)}
        for key, value in values.items():
            if key not in known:
                raise UsageError(f"unknown configuration key {key!r}")
            setattr(cfg, key, convert.get(key, str)(value))
        if cfg.L == 0:
            cfg.L = cfg.K
        cfg.validate()
        return cfg


def load_scene_image(path: str, K: int = 0, L: int = 0) -> tuple[np.ndarray, int]:
    """Read an image and centre-crop it to ``K x L`` if requested."""
    try:
        img, peak = io.read_image(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read image {path!r}: {exc}") from None
    K = K or img.shape[0]
    L = L or img.shape[1]
    if K > img.shape[0] or L > img.shape[1]:
        raise UsageError(f"image {img.shape} is smaller than the requested {K}x{L}")
    r0, c0 = (img.shape[0] - K) // 2, (img.shape[1] - L) // 2
    img = img[r0 : r0 + K, c0 : c0 + L]
    if not (is_power_of_two(K) and is_power_of_two(L)):
        raise UsageError(f"mask size {K}x{L} must be powers of two (crop with --size)")
    return img, peak


def n_measurements(ratio: float, n: int) -> int:
    return max(1, int(round(ratio * n)))


def _output_dir(flag: str | None) -> Path:
    out = Path(os.environ.get(OUTPUT_ENV) or flag or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ------------------------------------------------------------------


def cmd_acquire(args) -> int:
    cfg = ExperimentConfig.merge(args.config, {"image": args.image, "K": args.size, "seed": args.seed,
                                               "ratios": [args.ratio] if args.ratio is not None else None,
                                               "force_dc": args.force_dc})
    if not cfg.image:
        raise UsageError("no image given")
    img, peak = load_scene_image(cfg.image, cfg.K, cfg.L)
    K, L = img.shape
    srm = SrmConfig.from_seed(K * L, n_measurements(cfg.ratios[0], K * L), cfg.seed, cfg.force_dc)
    meas = acquire(Scene.from_pixels(img), srm, args.noise_sigma, args.noise_seed)
    manifest = dict(meas.manifest, peak=peak)
    io.write_measurements(args.output, meas.y, manifest)
    print(f"wrote {meas.srm.m} readings ({K}x{L} masks, seed {cfg.seed}) to {args.output}")
    return 0


def measurement_set_from_file(path) -> MeasurementSet:
    try:
        y, fields_ = io.read_measurements(path)
    except (OSError, KeyError) as exc:
        raise UsageError(f"cannot read measurements {path!r}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"malformed measurement file {path!r}: {exc}") from None
    n, m, K, L = (int(fields_[k]) for k in ("n", "m", "k", "l"))
    if K * L != n:
        raise UsageError(f"manifest mismatch: k*l = {K * L} but n = {n}")
    srm = SrmConfig.from_seed(n, m, int(fields_["seed"]), fields_.get("force_dc", "0") == "1")
    p = None if fields_["p"] == "none" else int(fields_["p"])
    extra = {"peak": fields_["peak"]} if "peak" in fields_ else {}
    return MeasurementSet(y, srm, K, L, p, float(fields_["noise_sigma"]),
                          int(fields_.get("noise_seed", 0)), extra)


def reconstruct(meas: MeasurementSet, p: int, bank: str, lam: float, levels: int,
                max_iters: int = 2000, rel_tol: float = 1e-6, continuation: bool = False):
    """Solve for the wavelet vector; returns ``(op, x_hat, report)``."""
    op = SensingOp(meas.srm, p, wavelet.get_bank(bank), levels, meas.K, meas.L)
    x, report = solve_l1(op, meas.y, SolverConfig(lam=lam, max_iters=max_iters, rel_tol=rel_tol,
                                                   continuation=continuation))
    return op, x, report


def cmd_reconstruct(args) -> int:
    meas = measurement_set_from_file(args.measurements)
    out = _output_dir(args.output)
    try:
        op, x, report = reconstruct(meas, args.order, args.bank, args.lam, args.levels,
                                    args.max_iters, args.rel_tol, args.continuation)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    a0 = op.synthesize(x)
    if args.render == "box":
        image = op.render(x)
    else:
        h = op.omega // 2
        image = splines.render_pointwise(a0, op.p)[h : h + op.K, h : h + op.L]
    rows, cols = op.grid_shape
    io.write_coefficients(out / "wavelet.bin", x, op.levels, rows, cols, op.bank.name)
    io.write_coefficients(out / "a0.bin", a0.ravel(), 0, rows, cols, "none")
    io.write_image(out / "image.pgm", image, bits=16)
    np.save(out / "image.npy", image)
    (out / "progress.tsv").write_text("iteration\tlam\tobjective\tresidual\n" + "".join(
        line + "\n" for line in report.progress_lines()))
    (out / "report.txt").write_text(
        f"order={op.p}\nbank={op.bank.name}\nlevels={op.levels}\nlam={args.lam!r}\n"
        f"iterations={report.iterations}\nobjective={report.objective!r}\n"
        f"residual_norm={report.residual_norm!r}\nsparsity={report.sparsity}\n"
        f"n_coeffs={op.n_coeffs}\nlipschitz={report.lipschitz!r}\n")
    print(f"{report.iterations} iterations, objective {report.objective:.6g}, "
          f"{report.sparsity}/{op.n_coeffs} nonzero, {report.wall_time:.1f} s -> {out}")
    return 0


def _load_for_eval(path) -> np.ndarray:
    try:
        if str(path).endswith(".npy"):
            return np.load(path)
        return io.read_image(path)[0]
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read image {path!r}: {exc}") from None


def cmd_evaluate(args) -> int:
    ref, test = _load_for_eval(args.reference), _load_for_eval(args.reconstruction)
    if args.size:
        r0, c0 = (ref.shape[0] - args.size) // 2, (ref.shape[1] - args.size) // 2
        ref = ref[r0 : r0 + args.size, c0 : c0 + args.size]
    if ref.shape != test.shape:
        raise UsageError(f"image sizes differ: {ref.shape} vs {test.shape}")
    value = metrics.psnr(ref, test, 1.0)
    print(f"psnr={'inf' if math.isinf(value) else f'{value:.6f}'}")
    print(f"ssim={metrics.ssim(ref, test, 1.0):.6f}")
    return 0


def run_sweep_entry(img: np.ndarray, ratio: float, ratio_index: int, p: int, cfg: ExperimentConfig) -> dict:
    """Tune ``lam`` over the grid for one ``(ratio, p)`` cell; keep the best PSNR."""
    K, L = img.shape
    # masks depend on the ratio only, so every order sees the same measurements
    seed = derive_seed(cfg.seed, ratio_index)
    srm = SrmConfig.from_seed(K * L, n_measurements(ratio, K * L), seed, cfg.force_dc)
    meas = acquire(Scene.from_pixels(img), srm)
    best = None
    for lam in cfg.lams:
        op, x, report = reconstruct(meas, p, cfg.bank, lam, cfg.levels, cfg.max_iters, cfg.rel_tol)
        rec = op.render(x)
        row = {"ratio": ratio, "order": p, "lam": lam, "m": srm.m, "psnr": metrics.psnr(img, rec),
               "ssim": metrics.ssim(img, rec), "iterations": report.iterations}
        log.info("ratio=%g p=%d lam=%g psnr=%.3f", ratio, p, lam, row["psnr"])
        if best is None or row["psnr"] > best["psnr"]:
            best = row
    return best


TABLE_COLUMNS = ("ratio", "order", "m", "lam", "psnr", "ssim", "iterations")


def _format_row(row: dict) -> str:
    return "\t".join(f"{row[c]:.6f}" if c in ("psnr", "ssim") else f"{row[c]!r}" if c in ("ratio", "lam")
                     else str(row[c]) for c in TABLE_COLUMNS)


def _parse_row(line: str) -> dict:
    values = line.rstrip("\n").split("\t")
    cast = {"ratio": float, "order": int, "m": int, "lam": float, "psnr": float, "ssim": float, "iterations": int}
    return {c: cast[c](v) for c, v in zip(TABLE_COLUMNS, values)}


def run_sweep(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> list[dict]:
    img, _ = load_scene_image(cfg.image, cfg.K, cfg.L)
    entries_dir = out / "entries"
    entries_dir.mkdir(parents=True, exist_ok=True)
    tasks = []
    for i, ratio in enumerate(cfg.ratios):
        for p in cfg.orders:
            path = entries_dir / f"ratio{ratio!r}_p{p}.tsv"
            if not path.exists():
                tasks.append((i, ratio, p, path))
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            futures = [(t, pool.submit(run_sweep_entry, img, t[1], t[0], t[2], cfg)) for t in tasks]
            results = [(t, f.result()) for t, f in futures]
    else:
        results = [(t, run_sweep_entry(img, t[1], t[0], t[2], cfg)) for t in tasks]
    for (_, _, _, path), row in results:
        path.write_text(_format_row(row) + "\n")
    rows = []
    for ratio in cfg.ratios:
        for p in cfg.orders:
            rows.append(_parse_row((entries_dir / f"ratio{ratio!r}_p{p}.tsv").read_text()))
    table = "\t".join(TABLE_COLUMNS) + "\n" + "".join(_format_row(r) + "\n" for r in rows)
    (out / "table.tsv").write_text(table)
    return rows


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.merge(args.config, {
        "image": args.image, "K": args.size, "ratios": args.ratios, "orders": args.orders, "bank": args.bank,
        "levels": args.levels, "lams": args.lams, "seed": args.seed, "output_dir": args.output,
        "max_iters": args.max_iters, "rel_tol": args.rel_tol, "force_dc": args.force_dc})
    if not cfg.image:
        raise UsageError("no image given")
    out = _output_dir(cfg.output_dir)
    rows = run_sweep(cfg, out, args.jobs)
    sys.stdout.write((out / "table.tsv").read_text())
    log.info("%d rows written to %s", len(rows), out / "table.tsv")
    return 0


def cmd_filters(args) -> int:
    for p in args.orders:
        print(f"# r[k] order={p} taps={splines.crosscorr_seq(p).omega}")
        sys.stdout.write(io.format_taps(splines.crosscorr_seq(p).taps))
    for name in args.banks:
        bank = wavelet.get_bank(name)
        for label in ("dec_lo", "dec_hi", "rec_lo", "rec_hi"):
            filt = getattr(bank, label)
            print(f"# {name} {label} start={filt.start} taps={len(filt.taps)}")
            sys.stdout.write(io.format_taps(filt.taps))
    return 0


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


# --- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splinecs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    dc = argparse.ArgumentParser(add_help=False)
    dc.add_argument("--no-force-dc", dest="force_dc", action="store_false", default=None,
                    help="let the all-ones Hadamard row be dropped like any other row")

    a = sub.add_parser("acquire", parents=[dc], help="simulate single-pixel measurements of an image")
    a.add_argument("--image")
    a.add_argument("--config")
    a.add_argument("--size", type=int, help="centre-crop to SIZE x SIZE")
    a.add_argument("--ratio", type=float, help="measurement ratio M/N")
    a.add_argument("--seed", type=int)
    a.add_argument("--noise-sigma", type=float, default=0.0)
    a.add_argument("--noise-seed", type=int, default=0)
    a.add_argument("-o", "--output", required=True)
    a.set_defaults(func=cmd_acquire)

    r = sub.add_parser("reconstruct", help="solve the l1 problem for a measurement file")
    r.add_argument("measurements")
    r.add_argument("--order", "-p", type=int, default=1)
    r.add_argument("--bank", default="bior2.2", choices=sorted(wavelet.BANKS))
    r.add_argument("--lam", type=float, default=1e-3)
    r.add_argument("--levels", type=int, default=wavelet.DEFAULT_LEVELS)
    r.add_argument("--max-iters", type=int, default=2000)
    r.add_argument("--rel-tol", type=float, default=1e-6)
    r.add_argument("--continuation", action="store_true")
    r.add_argument("--render", choices=("box", "pointwise"), default="box")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("evaluate", help="PSNR/SSIM of a reconstruction against a reference image")
    e.add_argument("reference")
    e.add_argument("reconstruction")
    e.add_argument("--size", type=int, help="centre-crop the reference first")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", parents=[dc], help="PSNR/SSIM table over measurement ratios and spline orders")
    s.add_argument("--image")
    s.add_argument("--config")
    s.add_argument("--size", type=int)
    s.add_argument("--ratios", type=_floats)
    s.add_argument("--orders", type=_ints)
    s.add_argument("--bank", choices=sorted(wavelet.BANKS))
    s.add_argument("--levels", type=int)
    s.add_argument("--lams", type=_floats, help="regularization grid; the best PSNR per cell is kept")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--rel-tol", type=float)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("filters", help="print r[k] and wavelet filter taps")
    f.add_argument("--orders", type=_ints, default=[0, 1, 2, 3, 4, 5])
    f.add_argument("--banks", type=lambda s: s.replace(",", " ").split(), default=["bior2.2", "bior4.4"])
    f.set_defaults(func=cmd_filters)

    c = sub.add_parser("selfcheck", help="adjoint, dense-equivalence and reconstruction checks")
    c.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"splinecs {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Run the spline-order comparison sweep and check the PSNR ordering.

Usage: python3 scripts/run_ordering.py [--config configs/cameraman_ordering.cfg] [--jobs N]
"""

import argparse
import sys
from pathlib import Path

from splinecs import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default="configs/cameraman_ordering.cfg")
    parser.add_argument("--jobs", type=int, default=4)
    args = parser.parse_args()
    cfg = cli.ExperimentConfig.merge(args.config, {})
    if not Path(cfg.image).exists():
        sys.exit(f"missing {cfg.image}; run scripts/export_cameraman.py first")
    rows = cli.run_sweep(cfg, Path(cfg.output_dir), args.jobs)
    best = {}
    for row in rows:
        print(f"ratio={row['ratio']} p={row['order']} lam={row['lam']:g} "
              f"psnr={row['psnr']:.2f} ssim={row['ssim']:.4f}")
        best[row["order"]] = max(best.get(row["order"], -1.0), row["psnr"])
    if {0, 1, 3} <= best.keys():
        ok = best[1] >= best[0] + 1 and best[3] >= best[1]
        print(f"ordering p0 + 1 dB <= p1 <= p3: {'holds' if ok else 'violated'}")


if __name__ == "__main__":
    main()

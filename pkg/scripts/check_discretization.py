"""Compare discrete readings with brute-force quadrature of the continuous model.

Prints the relative error per spline order on a random 8x8 scene.
"""

import argparse

import numpy as np

from splinecs import splines
from splinecs.simulate import Scene, acquire, quadrature_cell_integrals
from splinecs.srm import SrmConfig, measurement_masks


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=8)
    parser.add_argument("--step", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    K = args.size
    rng = np.random.default_rng(args.seed)
    srm = SrmConfig.from_seed(K * K, K * K, args.seed)
    masks = measurement_masks(srm, K, K).astype(float)
    for p in range(splines.MAX_ORDER + 1):
        a0 = rng.standard_normal(splines.coeff_grid_shape(K, K, p))
        y = acquire(Scene.from_coefficients(a0, p), srm).y
        cells = quadrature_cell_integrals(a0, p, K, K, args.step)
        oracle = np.einsum("mkl,kl->m", masks, cells) / K
        print(f"p={p}  relative error {np.linalg.norm(y - oracle) / np.linalg.norm(oracle):.2e}")


if __name__ == "__main__":
    main()

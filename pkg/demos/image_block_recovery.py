#!/usr/bin/env python3
"""Recover a block-sparse image from compressed measurements.

Each 8x8 block is truncated to its K largest transform coefficients,
measured with an M x 64 Gaussian matrix, and recovered independently.
Writes the sparsified target and both reconstructions as PGM files next
to this script and prints the PSNR of each solver.
"""

import argparse
import pathlib

from treepursuit.experiments import make_solver
from treepursuit.imaging import recover_image, synthetic_image, write_pgm

SOLVERS = [
    make_solver("omp"),
    make_solver("aomp", branch=2, kmax=20, alpha_amul=0.85),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--k", type=int, default=12)
    ap.add_argument("--m", type=int, default=32)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    out = pathlib.Path(__file__).resolve().parent
    image = synthetic_image(size=args.size, seed=args.seed)
    wrote_target = False
    for spec in SOLVERS:
        result = recover_image(image, args.k, args.m, spec, args.seed)
        if not wrote_target:
            write_pgm(out / "image_target.pgm", result.sparsified)
            wrote_target = True
        path = out / ("image_%s.pgm" % spec.label)
        write_pgm(path, result.reconstruction)
        print(
            "%-12s PSNR %6.2f dB  (%d/%d blocks met the residue target)"
            % (spec.label, result.psnr_db, result.residue_met_blocks, result.blocks)
        )
        print("  wrote", path)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Scan the mixing parameter q and print exact pipeline quantities as CSV.

Columns: q, witness expectation, real-field distance, residual coefficient,
complex-field distance, real certificate, complex certificate.

Usage: python scripts/cfr_scan.py [--steps N] [--visibility V]
"""

import argparse

import numpy as np

from rebitkit import NumberField, cfr_state, decompose, evaluate_witness
from rebitkit import separability_certificate
from rebitkit.witness import SIGMA_YY

MIXED = np.diag([1.0, 0.0, 0.0, 0.0])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=21)
    parser.add_argument("--visibility", type=float, default=1.0)
    args = parser.parse_args()

    print("q,witness,real_distance,residual,complex_distance,real_sep,complex_sep")
    for q in np.linspace(0.0, 1.0, args.steps):
        gamma = args.visibility * cfr_state(q) + (1 - args.visibility) * MIXED
        verdict = evaluate_witness(gamma, SIGMA_YY)
        d_real, dist_real = decompose(gamma, NumberField.REAL)
        d_cplx, dist_cplx = decompose(gamma, NumberField.COMPLEX)
        print(
            f"{q:.3f},{verdict.expectation:.9g},{dist_real:.9g},"
            f"{d_real.residual_coeff:.9g},{dist_cplx:.9g},"
            f"{separability_certificate(d_real)},{separability_certificate(d_cplx)}"
        )


if __name__ == "__main__":
    main()

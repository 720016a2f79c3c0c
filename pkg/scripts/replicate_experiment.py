#!/usr/bin/env python3
"""Synthetic end-to-end run for both circular-mixture states.

Simulates coincidence counts for the two mixtures of circularly polarized
photon pairs (same-handed and opposite-handed), runs the full estimation,
witnessing, and decomposition pipeline with Monte-Carlo error bars, and
prints a compact results table.

Usage: python scripts/replicate_experiment.py [--events N] [--mc-samples N]
       [--visibility V] [--seed S] [--workdir DIR]
"""

import argparse
import os
import tempfile

from rebitkit import cli


def run_one(tag, mix_spec, target, args, workdir):
    counts = os.path.join(workdir, f"counts_{tag}.txt")
    report = os.path.join(workdir, f"report_{tag}.json")
    rc = cli.main(
        ["simulate", "--state", mix_spec, "--events", str(args.events),
         "--seed", str(args.seed), "--out", counts]
    )
    assert rc == 0, "simulation failed"
    rc = cli.main(
        ["analyze", "--counts", counts, "--target", target,
         "--mc-samples", str(args.mc_samples), "--seed", str(args.seed + 1),
         "--out", report]
    )
    assert rc == 0, "analysis failed"
    return cli.read_report(report)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--events", type=int, default=100_000)
    parser.add_argument("--mc-samples", type=int, default=10_000)
    parser.add_argument("--visibility", type=float, default=0.96)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workdir", default=None, help="directory for output files")
    args = parser.parse_args()

    v = args.visibility
    w = v / 2.0
    scenarios = [
        ("q=1", f"mix:RR={w},LL={w},mixed={1 - v}", "cfr:q=1"),
        ("q=0", f"mix:RL={w},LR={w},mixed={1 - v}", "cfr:q=0"),
    ]

    workdir = args.workdir or tempfile.mkdtemp(prefix="rebitkit_")
    os.makedirs(workdir, exist_ok=True)
    print(f"events/setting: {args.events}, MC samples: {args.mc_samples}, "
          f"visibility: {v}, outputs in {workdir}\n")

    rows = []
    for tag, mix_spec, target in scenarios:
        doc = run_one(tag, mix_spec, target, args, workdir)
        w_ = doc["witness"]
        sim = doc["similarity_to_target"]
        real = doc["decompositions"]["real"]
        cplx = doc["decompositions"]["complex"]
        rows.append(
            (tag,
             f"{w_['expectation']:+.4f} +- {w_['sigma']:.4f}",
             f"{100 * sim['value']:.3f} +- {100 * sim['sigma']:.3f}",
             f"{real['distance']:.6f} +- {real['distance_sigma']:.6f}",
             f"{cplx['distance']:.6f} +- {cplx['distance_sigma']:.6f}")
        )

    header = ("state", "<yy> witness", "similarity [%]", "real distance", "complex distance")
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    print("\nideal targets: witness +-%.2f, real distance %.2f, complex distance 0"
          % (v, v / 2))


if __name__ == "__main__":
    main()

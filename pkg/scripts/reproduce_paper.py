"""Run the four shipped presets and print one aggregate line per solver.

    python3 scripts/reproduce_paper.py                 # all presets
    python3 scripts/reproduce_paper.py rand-6s --out runs
"""
import argparse
import time
from pathlib import Path

from entropic_cs.config import PRESETS, load_preset
from entropic_cs.experiment import run_experiment
from entropic_cs.fileio import read_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("presets", nargs="*", default=list(PRESETS), choices=PRESETS)
    ap.add_argument("--out", default="runs", help="parent directory for preset outputs")
    ap.add_argument("--l0", action="store_true", help="also run the l0 oracle (tiny N only)")
    args = ap.parse_args()

    for name in args.presets:
        cfg = load_preset(name)
        out = Path(args.out) / name
        t0 = time.perf_counter()
        run_experiment(cfg, out)
        print(f"{name}: N={cfg.n} S={cfg.sparsity} M={cfg.m}, {len(cfg.seeds)} seeds, "
              f"{time.perf_counter() - t0:.1f} s -> {out}")
        for row in read_csv(out / "aggregate.csv"):
            print(f"  {row['solver']:<17} median rel_l2_error {float(row['median_rel_l2_error']):.3e}  "
                  f"mean recall {float(row['mean_support_recall']):.2f}  "
                  f"failures {row['failures']}/{row['runs']}")


if __name__ == "__main__":
    main()

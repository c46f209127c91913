"""Run a sweep config and print a rate table.

    python scripts/run_sweep.py configs/baselines.cfg --draws 50 --out results/baselines.csv
"""

import argparse
import dataclasses
import time
from pathlib import Path

from sicfree.harness import emit_csv, load_config, run_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--draws", type=int, help="override the configured draw count")
    ap.add_argument("--seed", type=int, help="override master_seed")
    ap.add_argument("--out", help="CSV path (default results/<config stem>.csv)")
    ap.add_argument("--sca-trace", help="directory for SCA traces")
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.draws is not None:
        cfg = dataclasses.replace(cfg, draws=args.draws)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    out = Path(args.out or f"results/{Path(args.config).stem}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)

    t0 = time.time()
    res = run_sweep(cfg, trace_dir=args.sca_trace)
    emit_csv(res, out)

    schemes = cfg.schemes()
    width = max(len(s) for s in schemes)
    print(f"{'snr_db':>7}  " + "  ".join(f"{s:>{width}}" for s in schemes))
    for snr in sorted(set(cfg.snr_db)):
        cells = []
        for s in schemes:
            r = res.row(snr, s)
            cells.append(f"{r.mean_rate:>{width - 8}.3f} ({r.std_err:.3f})")
        print(f"{snr:>7g}  " + "  ".join(f"{c:>{width}}" for c in cells))
    print(f"{cfg.draws} draws, {len(res.failures)} failed, {time.time() - t0:.1f} s -> {out}")


if __name__ == "__main__":
    main()

"""Print the sparse coefficient matrix and per-user structure for a (t, L) setup.

    python scripts/coefficient_structure.py --t 1 --l 4
"""

import argparse
import warnings

import numpy as np

from sicfree import enumerate_multicast_groups, equal_distance_generate, noise_amplification, sparse_generate, user_submatrix
from sicfree.etf import coherence_stats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--t", type=int, default=1)
    ap.add_argument("--l", type=int, default=4)
    ap.add_argument("--priority", help="comma-separated user ids")
    args = ap.parse_args()

    idx = enumerate_multicast_groups(range(1, args.t + args.l + 1), args.t)
    prio = tuple(int(x) for x in args.priority.split(",")) if args.priority else None
    A = sparse_generate(idx, prio)
    print("   " + " ".join(f"{lab:>5}" for lab in idx.labels()))
    for d, row in enumerate(A.entries.real.astype(int)):
        print(f"{d + 1:>2} " + " ".join(f"{v:>5}" for v in row))
    print()
    for k in idx.serving_set:
        Ak = user_submatrix(A, k, order="pivot")
        noise = [noise_amplification(A, k, n) for n in range(idx.delta)]
        identity = np.array_equal(Ak, np.eye(idx.delta))
        print(f"user {k}: nnz(A_k)={np.count_nonzero(Ak)}, identity={identity}, noise amplification={noise}")

    if idx.delta < idx.n_groups:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            E = equal_distance_generate(idx)
        coh, spread = coherence_stats(E.entries)
        print(f"\nequal-distance frame: coherence {coh:.4f}, spread {spread:.2e}, Welch bound {E.info['welch_bound']:.4f}")


if __name__ == "__main__":
    main()

"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both flavours are imported side by side, so ``TXLIFE_NO_NUMBA`` does not
matter here. Numba compile time is paid in a warm-up call and not counted.
"""

import argparse
import json
import platform
import timeit

import numpy as np

from txlife import _kernels as K


def cases(rng):
    n_edges, n_nodes, n_days = 1_000_000, 50_000, 365
    days = np.sort(rng.integers(0, n_days, size=n_edges))
    _, off = K.segment_offsets(days)
    src = rng.integers(0, n_nodes, size=n_edges)
    dst = rng.integers(0, n_nodes, size=n_edges)
    series = rng.integers(1, 1000, size=100_000)
    x, y = rng.normal(size=(2, 100_000))
    n_proj = 300
    lens = rng.integers(30, 400, size=n_proj)
    flat = rng.normal(size=int(lens.sum()))
    offsets = np.concatenate(([0], np.cumsum(lens))).astype(np.int64)
    starts = rng.integers(0, 200, size=n_proj).astype(np.int64)
    return {
        "distinct_per_segment (1M edges, 365 days)": ("distinct_per_segment", (off, src, dst, n_nodes)),
        "new_nodes_per_segment (1M edges, 365 days)": ("new_nodes_per_segment", (off, src, dst, n_nodes)),
        "first_at_or_below (100k days, no hit)": ("first_at_or_below", (series, 0, 100, 0)),
        "pearson (100k points)": ("pearson", (x, y)),
        "all_pairs_pearson (300 series)": ("all_pairs_pearson", (flat, offsets, starts, 30)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    rows = []
    print(f"python {platform.python_version()}, numpy {np.__version__}")
    print(f"{'kernel':46s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for label, (name, a) in cases(rng).items():
        nb, npf = getattr(K, f"nb_{name}"), getattr(K, f"np_{name}")
        nb(*a)  # compile
        t_nb = min(timeit.repeat(lambda: nb(*a), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: npf(*a), number=1, repeat=args.repeat))
        rows.append({"kernel": label, "numba_s": t_nb, "numpy_s": t_np})
        print(f"{label:46s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()

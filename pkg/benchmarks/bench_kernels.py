"""Time the compiled kernels against the numpy reference.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N time for each backend, the
speedup, and the largest relative difference between the two results.
"""
import argparse
import timeit

import numpy as np

from schottky_lab import _kernels_py as py
from schottky_lab.kernels import backends

ALPHA, EPS, A = 1.5, 0.125, 0.0
LEMMA22 = py.LEMMA22


def cases():
    sigma = np.geomspace(1.0, 400.0, 200_000)
    heights = np.linspace(0.5, 500.0, 20_000)
    dp = 2.0 * (np.log(np.arange(1, 31.0)) + 1.0)
    dh = 9.0 * np.arange(1, 31.0)
    return {
        "profile_eval_array (2e5 points)":
            lambda k: k.profile_eval_array(LEMMA22, ALPHA, EPS, sigma)[1],
        "profile_invert_array (2e4 heights)":
            lambda k: k.profile_invert_array(LEMMA22, ALPHA, EPS, heights),
        "parabolic_partial_sum (M = 1e5)":
            lambda k: k.parabolic_partial_sum(LEMMA22, ALPHA, EPS, A, 0.0, 0.5, 100_000, False),
        "shell_sum (rank 2, M = 300)":
            lambda k: k.shell_sum(LEMMA22, ALPHA, EPS, A, 0.0, 0.5,
                                  k.shell_counts(2, 300), False),
        "enumerate_words_sum (K = 4, 60 letters)":
            lambda k: k.enumerate_words_sum(np.concatenate([dp, dp]), np.concatenate([dh, dh]),
                                            4, 0.5, 0.0),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    impls = backends()
    if "cython" not in impls:
        print("compiled backend not built; only the reference timings are shown")
    print(f"{'kernel':42s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        ref = np.asarray(fn(py), dtype=float)
        if "cython" in impls:
            cy = impls["cython"]
            t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
            out = np.asarray(fn(cy), dtype=float)
            diff = float(np.max(np.abs(out - ref) / np.maximum(np.abs(ref), 1e-300)))
            print(f"{name:42s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f} {diff:13.2e}")
        else:
            print(f"{name:42s} {t_py:11.4f} {'-':>11s} {'-':>8s} {'-':>13s}")


if __name__ == "__main__":
    main()

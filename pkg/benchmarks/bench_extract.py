#!/usr/bin/env python3
"""Stage-by-stage timing of the two kernel backends.

Runs the extraction pipeline over a synthetic corpus and reports
milliseconds per 1 s interval for each stage under the numba and numpy
backends, plus the shared FFT front end for context.  Best-of-N timing
suppresses scheduler noise.

Usage: python3 benchmarks/bench_extract.py [--intervals 20] [--p 20]
"""

import argparse
import time

from spsgmm import _kernels
from spsgmm.pipeline import extract_features
from spsgmm.spectral import frame_interval, magnitude_spectra, make_frame_config
from spsgmm.sps_features import compute_attributes, lag_cap
from spsgmm.synth import make_corpus


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--intervals", type=int, default=20,
                    help="number of 1 s intervals to process (default: 20)")
    ap.add_argument("--p", type=int, default=20,
                    help="peaks kept per frame (default: 20)")
    ap.add_argument("--repeats", type=int, default=3,
                    help="timing repeats, best taken (default: 3)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    intervals = make_corpus((args.intervals + 1) // 2, seed=args.seed)
    intervals = intervals[: args.intervals]
    n = len(intervals)
    cfg = make_frame_config(intervals[0].sample_rate, 30.0, 1.0)

    # shared front end: framing + magnitude spectra (backend independent)
    def front_end():
        return [magnitude_spectra(frame_interval(iv, cfg), cfg) for iv in intervals]

    mags_list = front_end()
    centered_list = []
    for mags in mags_list:
        data, _ = _kernels.peak_matrix(mags, args.p)
        centered_list.append(compute_attributes(data).centered)
    cap = lag_cap(mags_list[0].shape[0])

    rows = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        _kernels.peak_matrix(mags_list[0], args.p)  # warm compilation caches
        _kernels.row_autocorr(centered_list[0], cap)
        extract_features(intervals[0], p=args.p)
        rows[backend] = {
            "peak matrix": best_of(
                lambda: [_kernels.peak_matrix(m, args.p) for m in mags_list],
                args.repeats,
            ),
            "row autocorr": best_of(
                lambda: [_kernels.row_autocorr(c, cap) for c in centered_list],
                args.repeats,
            ),
            "end to end": best_of(
                lambda: [extract_features(iv, p=args.p) for iv in intervals],
                args.repeats,
            ),
        }
    _kernels.set_backend("auto")
    fft_ms = 1000.0 * best_of(front_end, args.repeats) / n

    print(f"{n} intervals, p={args.p}, best of {args.repeats} (ms per interval)")
    print(f"{'stage':<14} {'numba':>8} {'numpy':>8} {'numpy/numba':>12}")
    print(f"{'fft front end':<14} {fft_ms:>8.2f} {fft_ms:>8.2f} {'(shared)':>12}")
    for stage in ("peak matrix", "row autocorr", "end to end"):
        nb = 1000.0 * rows["numba"][stage] / n
        np_ = 1000.0 * rows["numpy"][stage] / n
        print(f"{stage:<14} {nb:>8.2f} {np_:>8.2f} {np_ / nb:>11.1f}x")


if __name__ == "__main__":
    main()

"""Hot numerical kernels with two interchangeable backends.

Only two loops in the package are performance critical: assembling the peak
matrix (per-frame local-maxima scan + top-p selection) and the per-row
autocorrelation of the centered peak sequences.  Both exist here twice — as
plain loops compiled with numba, and as a vectorized pure-numpy fallback.

The two backends are bit-identical by construction.  The integer kernel is a
combinatorial selection, and the float kernel performs its additions strictly
left to right in both variants (a numba accumulator loop on one side,
``np.add.accumulate`` on the other, which reduces sequentially).  Keeping the
summation order fixed is what lets the test suite compare against naive
reference implementations at 1e-12 even when a single ulp of the running sum
is larger than that.

Backend selection: the SPSGMM_BACKEND environment variable may be ``auto``
(default: numba if importable, else numpy), ``numba``, or ``numpy``.
``set_backend()`` switches at runtime, e.g. for benchmarking.
"""

import os

import numpy as np

from .errors import ConfigError

_BACKENDS = ("auto", "numba", "numpy")


# ---------------------------------------------------------------------------
# loop implementations (numba-compiled when the numba backend is active)

def _peak_matrix_loops(mags, p):
    n_frames, n_bins = mags.shape
    out = np.zeros((p, n_frames), np.int64)
    bins = np.empty(n_bins, np.int64)
    amps = np.empty(n_bins, np.float64)
    chosen = np.empty(p, np.int64)
    taken = np.empty(n_bins, np.bool_)
    peakless = 0
    for l in range(n_frames):
        n = 0
        for k in range(1, n_bins - 1):
            v = mags[l, k]
            if mags[l, k - 1] < v and v > mags[l, k + 1]:
                bins[n] = k
                amps[n] = v
                n += 1
        if n == 0:
            peakless += 1
            continue
        q = n if n < p else p
        # top-q by amplitude; the strict comparison makes amplitude ties
        # resolve to the lower bin because bins were collected in ascending
        # order
        for j in range(n):
            taken[j] = False
        for i in range(q):
            best = -1
            for j in range(n):
                if not taken[j] and (best < 0 or amps[j] > amps[best]):
                    best = j
            taken[best] = True
            chosen[i] = bins[best]
        for i in range(q, p):
            chosen[i] = chosen[q - 1]
        srt = np.sort(chosen)
        for r in range(p):
            out[r, l] = srt[p - 1 - r]
    return out, peakless


def _row_autocorr_loops(centered, cap):
    n_rows, L = centered.shape
    out = np.empty((n_rows, cap + 1), np.float64)
    for r in range(n_rows):
        for tau in range(cap + 1):
            acc = 0.0
            for l in range(L - tau):
                acc += centered[r, l] * centered[r, l + tau]
            out[r, tau] = acc / L
    return out


# ---------------------------------------------------------------------------
# vectorized numpy fallback

def _peak_matrix_numpy(mags, p):
    n_frames, n_bins = mags.shape
    out = np.zeros((p, n_frames), np.int64)
    peakless = 0
    if n_bins >= 3:
        inner = mags[:, 1:-1]
        is_peak = (inner > mags[:, :-2]) & (inner > mags[:, 2:])
    else:
        is_peak = np.zeros((n_frames, 0), np.bool_)
    for l in range(n_frames):
        ks = np.nonzero(is_peak[l])[0] + 1
        if ks.size == 0:
            peakless += 1
            continue
        order = np.argsort(-mags[l, ks], kind="stable")
        q = min(ks.size, p)
        chosen = ks[order[:q]]
        if q < p:
            chosen = np.concatenate([chosen, np.full(p - q, chosen[q - 1])])
        out[:, l] = np.sort(chosen)[::-1]
    return out, peakless


def _seq_sum(a):
    # np.add.accumulate adds strictly left to right, matching a plain loop
    return np.add.accumulate(a)[-1] if a.size else 0.0


def _row_autocorr_numpy(centered, cap):
    n_rows, L = centered.shape
    out = np.empty((n_rows, cap + 1), np.float64)
    for r in range(n_rows):
        row = centered[r]
        for tau in range(cap + 1):
            out[r, tau] = _seq_sum(row[: L - tau] * row[tau:]) / L
    return out


# ---------------------------------------------------------------------------
# backend dispatch

try:
    from numba import njit

    _HAS_NUMBA = True
    _peak_matrix_numba = njit(cache=True)(_peak_matrix_loops)
    _row_autocorr_numba = njit(cache=True)(_row_autocorr_loops)
except ImportError:  # pragma: no cover - exercised only without numba
    _HAS_NUMBA = False

_IMPL = {
    "numpy": (_peak_matrix_numpy, _row_autocorr_numpy),
}
if _HAS_NUMBA:
    _IMPL["numba"] = (_peak_matrix_numba, _row_autocorr_numba)


def _resolve(name):
    if name not in _BACKENDS:
        raise ConfigError(f"unknown backend {name!r}; expected one of {_BACKENDS}")
    if name == "auto":
        return "numba" if _HAS_NUMBA else "numpy"
    if name == "numba" and not _HAS_NUMBA:
        raise ConfigError("numba backend requested but numba is not installed")
    return name


_active = _resolve(os.environ.get("SPSGMM_BACKEND", "auto"))


def active_backend():
    """Name of the backend currently in use ('numba' or 'numpy')."""
    return _active


def set_backend(name):
    """Select 'numba', 'numpy', or 'auto'; returns the resolved name."""
    global _active
    _active = _resolve(name)
    return _active


def peak_matrix(mags, p):
    """(p x L) peak-bin matrix and peakless-frame count for a stack of
    magnitude spectra given as an (L x n_bins) array."""
    mags = np.ascontiguousarray(mags, np.float64)
    return _IMPL[_active][0](mags, p)


def row_autocorr(centered, cap):
    """Biased autocorrelation (1/L sum C[l]C[l+tau]) of each row, for lags
    0..cap."""
    centered = np.ascontiguousarray(centered, np.float64)
    return _IMPL[_active][1](centered, cap)

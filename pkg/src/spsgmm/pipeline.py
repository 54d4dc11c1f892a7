"""End-to-end feature extraction: interval -> frames -> spectra -> peak
matrix -> feature vectors of every kind."""

from .sps_core import build_peak_matrix
from .sps_features import (
    compute_attributes,
    early_fuse,
    sps_periodicity,
    sps_scg,
    sps_zcr,
)
from .spectral import frame_interval, magnitude_spectra, make_frame_config

BASE_KINDS = ("sps_p", "sps_zcr", "sps_scg")


def extract_features(interval, *, frame_ms=30.0, hop_ms=1.0, window="rect", p=20):
    """All four feature vectors of one interval, plus the peakless-frame
    diagnostic count, as ({kind: FeatureVector}, peakless)."""
    cfg = make_frame_config(interval.sample_rate, frame_ms, hop_ms, window)
    frames = frame_interval(interval, cfg)
    mags = magnitude_spectra(frames, cfg)
    m = build_peak_matrix(mags, p)
    attrs = compute_attributes(m)
    prov = {
        "label": interval.label,
        "source_id": interval.source_id,
        "interval_index": interval.index,
    }
    fp = sps_periodicity(attrs, **prov)
    fz = sps_zcr(attrs, **prov)
    fs = sps_scg(m, attrs, **prov)
    vectors = {
        "sps_p": fp,
        "sps_zcr": fz,
        "sps_scg": fs,
        "early_fused": early_fuse(fp, fz, fs),
    }
    return vectors, m.peakless_frames


def extract_corpus(intervals, *, frame_ms=30.0, hop_ms=1.0, window="rect", p=20):
    """Feature cache for a whole corpus: {(source_id, index): {kind: vector}}
    and aggregate diagnostics."""
    cache = {}
    peakless = 0
    for iv in intervals:
        vectors, pl = extract_features(
            iv, frame_ms=frame_ms, hop_ms=hop_ms, window=window, p=p
        )
        cache[(iv.source_id, iv.index)] = vectors
        peakless += pl
    return cache, {"peakless_frames": peakless, "n_intervals": len(intervals)}

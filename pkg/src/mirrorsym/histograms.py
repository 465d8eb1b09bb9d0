"""Textural and color histograms attached to feature points.

The textural histogram is the amplitude-weighted distribution of local edge
orientations over a feature's grid cell, circularly shifted so the bin
holding the feature's own orientation becomes bin 0.  The color histogram
counts HSV values of a neighborhood window over a uniform (hue, saturation,
value) box partition.  Both are L1-normalized; empty inputs give all-zero
histograms, which downstream weighting treats as zero similarity.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def textural_histogram(amplitudes: np.ndarray, orientations: np.ndarray,
                       n_bins: int, anchor: float) -> np.ndarray:
    """Amplitude-weighted orientation histogram, anchored by circular shift.

    Orientations are mapped into [0, pi); bin n covers [n*pi/N, (n+1)*pi/N).
    After L1 normalization the histogram is rolled so that the bin containing
    ``anchor`` lands at index 0.
    """
    if n_bins < 2:
        raise ParameterError(f"textural bin count must be >= 2, got {n_bins}")
    amplitudes = np.asarray(amplitudes, dtype=np.float64).ravel()
    orientations = np.asarray(orientations, dtype=np.float64).ravel()
    if amplitudes.size == 0:
        return np.zeros(n_bins)
    folded = np.mod(orientations, np.pi)
    idx = np.minimum((folded * (n_bins / np.pi)).astype(np.intp), n_bins - 1)
    hist = np.bincount(idx, weights=amplitudes, minlength=n_bins)
    total = hist.sum()
    if total > 0:
        hist /= total
    shift = min(int((anchor % np.pi) * (n_bins / np.pi)), n_bins - 1)
    return np.roll(hist, -shift)


def color_histogram(hsv_pixels: np.ndarray,
                    layout: tuple[int, int, int] = (8, 2, 2)) -> np.ndarray:
    """Counting histogram over a uniform HSV box partition, L1-normalized.

    ``hsv_pixels`` is an (M, 3) array with hue in radians [0, 2*pi) and
    saturation/value in [0, 1].  The upper boundary of the last saturation
    and value interval is closed, so s = 1 or v = 1 stays in range.  The
    flat bin index is hue-major: c_hu * C_sa * C_va + c_sa * C_va + c_va.
    """
    n_hue, n_sat, n_val = layout
    if min(layout) < 1:
        raise ParameterError(f"color layout components must be >= 1, got {layout}")
    total_bins = n_hue * n_sat * n_val
    pixels = np.asarray(hsv_pixels, dtype=np.float64).reshape(-1, 3)
    if pixels.shape[0] == 0:
        return np.zeros(total_bins)
    hue = np.clip((pixels[:, 0] * (n_hue / (2.0 * np.pi))).astype(np.intp), 0, n_hue - 1)
    sat = np.clip((pixels[:, 1] * n_sat).astype(np.intp), 0, n_sat - 1)
    val = np.clip((pixels[:, 2] * n_val).astype(np.intp), 0, n_val - 1)
    flat = hue * (n_sat * n_val) + sat * n_val + val
    hist = np.bincount(flat, minlength=total_bins).astype(np.float64)
    return hist / hist.sum()


def grayscale_color_histogram(values: np.ndarray, n_bins: int = 32) -> np.ndarray:
    """Uniform luminance histogram used when color information is absent."""
    if n_bins < 2:
        raise ParameterError(f"contrast bin count must be >= 2, got {n_bins}")
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        return np.zeros(n_bins)
    idx = np.clip((values * n_bins).astype(np.intp), 0, n_bins - 1)
    hist = np.bincount(idx, minlength=n_bins).astype(np.float64)
    return hist / hist.sum()


def reverse(hist: np.ndarray) -> np.ndarray:
    """Index-mirrored histogram: output bin n = input bin (N-1-n)."""
    return np.asarray(hist)[::-1].copy()


def intersection(a: np.ndarray, b: np.ndarray) -> float:
    """Histogram intersection sum(min(a_n, b_n)); 1 for identical normalized inputs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"histogram length mismatch: {a.shape} vs {b.shape}")
    return float(np.minimum(a, b).sum())

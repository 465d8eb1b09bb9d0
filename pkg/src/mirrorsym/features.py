"""Wavelet responses, edge amplitude/orientation maps, and grid feature points.

The filter bank is applied to the grayscale image through a forward FFT, a
per-kernel multiply, and an inverse FFT whose complex modulus is the response.
The per-pixel maximum response over all (scale, orientation) pairs gives the
edge amplitude map, and the orientation of the maximizing filter gives the
orientation map.  Feature points are then sampled one per non-homogeneous
cell of a regular grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .filterbank import FilterBank

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Luminance in [0, 1] from an RGB or single-channel raster.

    8-bit inputs are scaled by 1/255; float inputs are assumed to already
    live in [0, 1].
    """
    arr = np.asarray(image)
    if arr.size == 0:
        raise ParameterError("empty image")
    if np.issubdtype(arr.dtype, np.integer):
        arr = arr.astype(np.float64) / 255.0
    else:
        arr = arr.astype(np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] >= 3:
        r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
        return GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * g + GRAY_WEIGHTS[2] * b
    raise ParameterError(f"unsupported image shape {arr.shape}")


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Hexcone HSV from RGB in [0, 1]; hue in radians [0, 2*pi).

    Pixels with zero saturation get hue 0.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    value = maxc
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    safe = np.where(delta > 0, delta, 1.0)
    hue6 = np.zeros_like(maxc)
    is_r = (maxc == r) & (delta > 0)
    is_g = (maxc == g) & ~is_r & (delta > 0)
    is_b = (delta > 0) & ~is_r & ~is_g
    hue6 = np.where(is_r, ((g - b) / safe) % 6.0, hue6)
    hue6 = np.where(is_g, (b - r) / safe + 2.0, hue6)
    hue6 = np.where(is_b, (r - g) / safe + 4.0, hue6)
    hue = (hue6 * (np.pi / 3.0)) % (2.0 * np.pi)
    return np.stack([hue, sat, value], axis=-1)


@dataclass(frozen=True)
class ResponseStack:
    """Modulus of the complex wavelet coefficients, shape (S, O, H, W)."""

    responses: np.ndarray

    @property
    def scales(self) -> int:
        return self.responses.shape[0]

    @property
    def orientations(self) -> int:
        return self.responses.shape[1]


def apply_filter_bank(gray: np.ndarray, bank: FilterBank) -> ResponseStack:
    """Response moduli of every kernel applied to a grayscale image."""
    if gray.shape != (bank.height, bank.width):
        raise ParameterError(
            f"image shape {gray.shape} does not match bank "
            f"{bank.height}x{bank.width}")
    spectrum = np.fft.fft2(gray)
    out = np.empty((bank.scales, bank.orientations) + gray.shape)
    for s, o, kernel in bank.iter_kernels():
        out[s, o] = np.abs(np.fft.ifft2(spectrum * kernel))
    return ResponseStack(responses=out)


@dataclass(frozen=True)
class EdgeMaps:
    """Normalized edge amplitude J in [0, 1] and orientation phi in [-pi/2, pi/2)."""

    amplitude: np.ndarray
    orientation: np.ndarray
    degenerate: bool = False


def _finalize_maps(raw_amplitude, orientation_idx, bank) -> EdgeMaps:
    alphas = np.asarray(bank.alpha_centers)
    phi = alphas[orientation_idx]
    phi = np.where(phi >= np.pi / 2, phi - np.pi, phi)
    peak = raw_amplitude.max()
    if peak <= 0.0:
        zeros = np.zeros_like(raw_amplitude)
        return EdgeMaps(amplitude=zeros, orientation=zeros.copy(), degenerate=True)
    return EdgeMaps(amplitude=raw_amplitude / peak, orientation=phi)


def edge_maps(stack: ResponseStack, bank: FilterBank) -> EdgeMaps:
    """Per-pixel max response over (s, o) and the maximizing orientation.

    Ties resolve to the lowest (s, o) in lexicographic order.  The amplitude
    map is normalized by its global maximum; an all-zero stack yields
    all-zero maps flagged degenerate.
    """
    if stack.responses.size == 0:
        raise ParameterError("empty response stack")
    flat = stack.responses.reshape(-1, *stack.responses.shape[2:])
    best = flat.argmax(axis=0)
    raw = flat.max(axis=0)
    return _finalize_maps(raw, best % bank.orientations, bank)


def compute_edge_maps(gray: np.ndarray, bank: FilterBank) -> EdgeMaps:
    """Streaming equivalent of edge_maps(apply_filter_bank(...), ...).

    Iterates kernels one at a time so memory stays O(W*H) regardless of the
    bank size.  Uses a strict > update, which resolves ties to the lowest
    (s, o) exactly like edge_maps.
    """
    if gray.shape != (bank.height, bank.width):
        raise ParameterError(
            f"image shape {gray.shape} does not match bank "
            f"{bank.height}x{bank.width}")
    spectrum = np.fft.fft2(gray)
    raw = np.zeros(gray.shape)
    orient_idx = np.zeros(gray.shape, dtype=np.intp)
    for s, o, kernel in bank.iter_kernels():
        response = np.abs(np.fft.ifft2(spectrum * kernel))
        better = response > raw
        raw[better] = response[better]
        orient_idx[better] = o
    return _finalize_maps(raw, orient_idx, bank)


@dataclass
class FeaturePoint:
    """One sampled edge feature: the amplitude argmax of its grid cell.

    ``textural`` and ``color_hist`` start empty and are attached by the
    histogram stage.
    """

    x: float
    y: float
    amplitude: float
    orientation: float
    color: tuple[float, float, float]
    cell_id: int
    textural: np.ndarray | None = None
    color_hist: np.ndarray | None = None

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


def cell_bounds(cell_id: int, width: int, height: int,
                cell_size: int) -> tuple[int, int, int, int]:
    """(y0, y1, x0, x1) slice bounds of a grid cell, clipped to the image."""
    cells_x = math.ceil(width / cell_size)
    row, col = divmod(cell_id, cells_x)
    y0 = row * cell_size
    x0 = col * cell_size
    return y0, min(y0 + cell_size, height), x0, min(x0 + cell_size, width)


def default_cell_size(width: int, height: int, divisor: int = 64) -> int:
    """Cell side proportional to the maximum image dimension, at least 2 px."""
    return max(2, round(max(width, height) / divisor))


def sample_feature_points(maps: EdgeMaps, hsv: np.ndarray, cell_size: int,
                          homogeneity_threshold: float = 0.05) -> list[FeaturePoint]:
    """One feature per non-homogeneous cell of a cell_size-strided grid.

    A cell is non-homogeneous iff its maximum normalized amplitude exceeds
    the threshold; the feature sits at the cell's amplitude argmax (row-major
    first on ties) and carries the orientation and HSV colour at that pixel.
    """
    if cell_size < 2:
        raise ParameterError(f"cell size must be >= 2, got {cell_size}")
    amp = maps.amplitude
    height, width = amp.shape
    cells_x = math.ceil(width / cell_size)
    cells_y = math.ceil(height / cell_size)
    points = []
    for row in range(cells_y):
        y0 = row * cell_size
        y1 = min(y0 + cell_size, height)
        for col in range(cells_x):
            x0 = col * cell_size
            x1 = min(x0 + cell_size, width)
            block = amp[y0:y1, x0:x1]
            flat = int(block.argmax())
            peak = block.flat[flat]
            if peak <= homogeneity_threshold:
                continue
            dy, dx = divmod(flat, block.shape[1])
            py, px = y0 + dy, x0 + dx
            points.append(FeaturePoint(
                x=float(px), y=float(py), amplitude=float(peak),
                orientation=float(maps.orientation[py, px]),
                color=tuple(float(c) for c in hsv[py, px]),
                cell_id=row * cells_x + col))
    return points

"""End-to-end detection: image -> filter bank -> features -> votes -> axes.

The filter bank depends only on the image size and the bank parameters, so
the two most recent banks are cached; a long-running service or a batch run
over same-sized images builds each bank once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import features as ft
from . import histograms as hg
from . import voting as vt
from .config import Config
from .errors import NoFeaturesError, ParameterError
from .evaluation import AxisSegment
from .filterbank import FilterBank, build_filter_bank
from .records import DetectionRecord


@lru_cache(maxsize=2)
def _cached_bank(width, height, scales, orientations, sigma_eta, sigma_alpha,
                 min_wavelength, scale_multiplier, angular_exponent,
                 cutoff, order) -> FilterBank:
    return build_filter_bank(width, height, scales=scales,
                             orientations=orientations, sigma_eta=sigma_eta,
                             sigma_alpha=sigma_alpha,
                             min_wavelength=min_wavelength,
                             scale_multiplier=scale_multiplier,
                             angular_exponent=angular_exponent,
                             cutoff=cutoff, order=order)


def bank_for(width: int, height: int, config: Config) -> FilterBank:
    return _cached_bank(width, height, config.scales, config.orientations,
                        config.sigma_eta, config.sigma_alpha,
                        config.min_wavelength, config.scale_multiplier,
                        config.angular_exponent, config.butterworth_cutoff,
                        config.butterworth_order)


def load_image(path) -> np.ndarray:
    """Decode a raster file to (H, W, 3) RGB or (H, W) grayscale uint8."""
    try:
        with Image.open(path) as img:
            if img.mode in ("1", "L", "I", "I;16", "F"):
                return np.asarray(img.convert("L"))
            return np.asarray(img.convert("RGB"))
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise ParameterError(f"cannot read image {path}: {exc}") from None


def attach_histograms(points: list[ft.FeaturePoint], maps: ft.EdgeMaps,
                      hsv: np.ndarray | None, gray: np.ndarray,
                      cell_size: int, config: Config) -> None:
    """Fill each feature's textural and color histograms in place.

    ``hsv`` None selects the luminance-contrast fallback used for grayscale
    or unsaturated images.  The color window is a square of side
    color_window_factor * cell_size centred on the feature, clipped to the
    image.
    """
    height, width = maps.amplitude.shape
    half = max(1, round(config.color_window_factor * cell_size / 2.0))
    for point in points:
        y0, y1, x0, x1 = ft.cell_bounds(point.cell_id, width, height, cell_size)
        point.textural = hg.textural_histogram(
            maps.amplitude[y0:y1, x0:x1], maps.orientation[y0:y1, x0:x1],
            config.textural_bins, anchor=point.orientation)
        px, py = int(point.x), int(point.y)
        wy0, wy1 = max(0, py - half), min(height, py + half)
        wx0, wx1 = max(0, px - half), min(width, px + half)
        if hsv is not None:
            point.color_hist = hg.color_histogram(
                hsv[wy0:wy1, wx0:wx1], layout=config.color_layout)
        else:
            point.color_hist = hg.grayscale_color_histogram(
                gray[wy0:wy1, wx0:wx1], n_bins=config.color_bins)


@dataclass
class DetectionResult:
    """Full pipeline output for one image."""

    record: DetectionRecord
    histogram: vt.VoteHistogram
    smoothed: np.ndarray
    features: list[ft.FeaturePoint]
    used_color: bool
    width: int
    height: int


def detect_array(image: np.ndarray, config: Config | None = None,
                 image_id: str = "image") -> DetectionResult:
    """Detect mirror-symmetry axes in a decoded image array."""
    config = (config or Config()).validate()
    image = np.asarray(image)
    if image.ndim not in (2, 3):
        raise ParameterError(f"unsupported image shape {image.shape}")
    gray = ft.to_grayscale(image)
    height, width = gray.shape

    use_color = image.ndim == 3
    hsv = None
    if use_color:
        rgb = image.astype(np.float64) / 255.0 \
            if np.issubdtype(image.dtype, np.integer) else image[..., :3]
        hsv = ft.rgb_to_hsv(rgb[..., :3])
        if hsv[..., 1].mean() < config.saturation_threshold:
            use_color = False
            hsv = None

    bank = bank_for(width, height, config)
    maps = ft.compute_edge_maps(gray, bank)
    cell_size = ft.default_cell_size(width, height, config.cell_divisor)
    points = ft.sample_feature_points(maps, _hsv_or_gray_stack(hsv, gray),
                                      cell_size, config.homogeneity_threshold)
    if not points:
        raise NoFeaturesError(f"no feature points found in {image_id!r} "
                              f"(homogeneous image?)")
    if config.max_features and len(points) > config.max_features:
        points.sort(key=lambda p: (-p.amplitude, p.cell_id))
        points = points[:config.max_features]
        points.sort(key=lambda p: p.cell_id)

    attach_histograms(points, maps, hsv, gray, cell_size, config)
    votes = vt.compute_pair_votes(points)
    hist = vt.accumulate(votes, width, height)
    smoothed = vt.smooth(hist, config.smooth_sigma_rho, config.smooth_sigma_theta)
    peaks = vt.find_peaks(smoothed, config.max_peaks, config.nms_window)

    axes = []
    for peak in peaks:
        axis = vt.axis_endpoints(peak, hist, points, config.nms_window)
        (ax, ay), (bx, by) = axis.endpoints
        axes.append(AxisSegment(float(ax), float(ay), float(bx), float(by),
                                score=float(axis.score)))
    record = DetectionRecord(image_id=image_id, axes=axes)
    return DetectionResult(record=record, histogram=hist, smoothed=smoothed,
                           features=points, used_color=use_color,
                           width=width, height=height)


def _hsv_or_gray_stack(hsv, gray):
    # feature points always carry an (h, s, v) triple; grayscale images get
    # (0, 0, luminance)
    if hsv is not None:
        return hsv
    zeros = np.zeros_like(gray)
    return np.stack([zeros, zeros, gray], axis=-1)


def detect_path(path, config: Config | None = None,
                image_id: str | None = None) -> DetectionResult:
    """Detect axes in a raster file; image id defaults to the file stem."""
    image = load_image(path)
    return detect_array(image, config,
                        image_id=image_id or Path(path).stem)

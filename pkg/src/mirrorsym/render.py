"""Overlay and heatmap rasters for visual inspection.

Axes are drawn in rank order using the fixed palette red, yellow, green,
blue, magenta, each as a straight line with squared endpoints.  The vote
heatmap is a grayscale image with rho on the x axis and theta on the y
axis, linearly mapped so the strongest bin is white; the fixed mapping
keeps outputs bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .errors import ParameterError
from .records import DetectionRecord

RANK_COLORS = [(255, 0, 0), (255, 255, 0), (0, 255, 0), (0, 0, 255),
               (255, 0, 255)]

_ENDPOINT_HALF = 3
_LINE_WIDTH = 2


def render_overlay(image: np.ndarray | Image.Image, record: DetectionRecord,
                   top_k: int = 5) -> Image.Image:
    """Copy of the image with the top-k axes drawn over it."""
    if isinstance(image, Image.Image):
        canvas = image.convert("RGB")
    else:
        arr = np.asarray(image)
        if arr.ndim == 2:
            arr = np.stack([arr] * 3, axis=-1)
        canvas = Image.fromarray(arr.astype(np.uint8), "RGB")
    draw = ImageDraw.Draw(canvas)
    for rank, axis in enumerate(record.axes[:top_k]):
        color = RANK_COLORS[rank % len(RANK_COLORS)]
        a = (axis.ax, axis.ay)
        b = (axis.bx, axis.by)
        draw.line([a, b], fill=color, width=_LINE_WIDTH)
        for x, y in (a, b):
            draw.rectangle([x - _ENDPOINT_HALF, y - _ENDPOINT_HALF,
                            x + _ENDPOINT_HALF, y + _ENDPOINT_HALF],
                           fill=color)
    return canvas


def heatmap_image(smoothed: np.ndarray) -> Image.Image:
    """Grayscale heatmap of a (rho, theta) histogram; size (rho_bins, 360)."""
    arr = np.asarray(smoothed, dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("empty histogram")
    peak = arr.max()
    scaled = arr / peak if peak > 0 else arr
    pixels = np.round(scaled.T * 255.0).astype(np.uint8)
    return Image.fromarray(pixels, "L")

import math

import numpy as np
import pytest
from scipy.ndimage import affine_transform, gaussian_filter


def mirrored_texture(seed, size=256, blur=2.0):
    """Random blurred texture mirrored about the vertical centre line x = (size-1)/2."""
    rng = np.random.default_rng(seed)
    half = rng.random((size, size // 2, 3))
    half = gaussian_filter(half, sigma=(blur, blur, 0.0))
    img = np.concatenate([half, half[:, ::-1]], axis=1)
    lo, hi = img.min(), img.max()
    img = (img - lo) / (hi - lo)
    return (img * 255.0).round().astype(np.uint8)


def rotate_image(img, beta_deg):
    """Rotate image content by beta degrees about the array centre (bilinear)."""
    beta = math.radians(beta_deg)
    c, s = math.cos(beta), math.sin(beta)
    center = np.array([(img.shape[0] - 1) / 2.0, (img.shape[1] - 1) / 2.0])
    matrix = np.array([[c, -s], [s, c]])
    offset = center - matrix @ center
    arr = img.astype(np.float64)
    channels = [affine_transform(arr[..., k], matrix, offset=offset, order=1,
                                 mode="nearest") for k in range(arr.shape[2])]
    return np.stack(channels, axis=-1)


def rotate_point(p, beta_deg, cx, cy):
    beta = math.radians(beta_deg)
    x, y = p[0] - cx, p[1] - cy
    return (x * math.cos(beta) - y * math.sin(beta) + cx,
            x * math.sin(beta) + y * math.cos(beta) + cy)


@pytest.fixture
def feature_factory():
    from mirrorsym.features import FeaturePoint

    def make(x, y, phi=0.0, textural=None, color_hist=None, cell_id=0,
             amplitude=1.0, color=(0.0, 0.0, 0.0)):
        return FeaturePoint(
            x=float(x), y=float(y), amplitude=amplitude, orientation=phi,
            color=color, cell_id=cell_id,
            textural=None if textural is None else np.asarray(textural, float),
            color_hist=None if color_hist is None else np.asarray(color_hist, float))

    return make


def random_features(rng, count, width=100, height=80, n_tex=8, n_col=6):
    """Distinct-position features with random orientations and histograms."""
    from mirrorsym.features import FeaturePoint

    points = []
    taken = set()
    while len(points) < count:
        x = float(np.round(rng.uniform(0, width - 1), 3))
        y = float(np.round(rng.uniform(0, height - 1), 3))
        if (x, y) in taken:
            continue
        taken.add((x, y))
        tex = rng.random(n_tex)
        col = rng.random(n_col)
        points.append(FeaturePoint(
            x=x, y=y, amplitude=float(rng.random()),
            orientation=float(rng.uniform(-np.pi / 2, np.pi / 2)),
            color=(0.0, 0.0, 0.0), cell_id=len(points),
            textural=tex / tex.sum(), color_hist=col / col.sum()))
    return points

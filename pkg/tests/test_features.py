import colorsys
import math

import numpy as np
import pytest

from mirrorsym.errors import ParameterError
from mirrorsym.features import (apply_filter_bank, cell_bounds,
                                compute_edge_maps, default_cell_size,
                                edge_maps, rgb_to_hsv, sample_feature_points,
                                to_grayscale)
from mirrorsym.filterbank import build_filter_bank


def small_bank(size=32, scales=3, orientations=4, min_wavelength=4.0):
    return build_filter_bank(size, size, scales=scales,
                             orientations=orientations,
                             min_wavelength=min_wavelength)


def test_grayscale_primaries():
    img = np.zeros((1, 3, 3), dtype=np.uint8)
    img[0, 0] = (255, 255, 255)
    img[0, 1] = (0, 0, 0)
    img[0, 2] = (255, 0, 0)
    gray = to_grayscale(img)
    assert gray[0, 0] == pytest.approx(1.0)
    assert gray[0, 1] == 0.0
    assert gray[0, 2] == pytest.approx(0.299)


def test_grayscale_passthrough_2d():
    gray = to_grayscale(np.array([[0, 255]], dtype=np.uint8))
    np.testing.assert_allclose(gray, [[0.0, 1.0]])


def test_fft_round_trip():
    rng = np.random.default_rng(7)
    x = rng.random((37, 53))
    back = np.fft.ifft2(np.fft.fft2(x)).real
    assert np.abs(back - x).max() / np.abs(x).max() < 1e-9


def test_constant_image_responses_vanish():
    bank = small_bank()
    stack = apply_filter_bank(np.full((32, 32), 0.7), bank)
    assert stack.responses.max() <= 1e-10


def test_dimension_mismatch_rejected():
    bank = small_bank()
    with pytest.raises(ParameterError):
        apply_filter_bank(np.zeros((16, 32)), bank)


def test_sinusoid_peaks_at_first_scale_and_matching_orientation():
    # gradient along x at the minimum wavelength -> strongest slice (s=0, o=0)
    size = 64
    bank = build_filter_bank(size, size, scales=3, orientations=8,
                             min_wavelength=8.0)
    x = np.arange(size)
    img = 0.5 + 0.4 * np.sin(2 * np.pi * x / 8.0)[None, :] * np.ones((size, 1))
    stack = apply_filter_bank(img, bank)
    means = stack.responses.mean(axis=(2, 3))
    assert np.unravel_index(means.argmax(), means.shape) == (0, 0)


def test_response_linearity():
    rng = np.random.default_rng(3)
    bank = small_bank()
    img = rng.random((32, 32))
    r1 = apply_filter_bank(img, bank).responses
    r2 = apply_filter_bank(2.0 * img, bank).responses
    assert np.abs(r2 - 2.0 * r1).max() / r1.max() < 1e-9


def test_edge_maps_normalization_and_argmax_orientation():
    bank = small_bank(orientations=4)
    responses = np.zeros((3, 4, 8, 8))
    responses[1, 2, 3, 4] = 0.25
    maps = edge_maps(type(apply_filter_bank(np.zeros((8, 8)),
                                            small_bank(8)))(responses), bank)
    assert maps.amplitude[3, 4] == 1.0
    assert maps.amplitude.sum() == 1.0
    # orientation index 2 of 4 -> alpha = pi/2 -> wrapped to -pi/2
    assert maps.orientation[3, 4] == pytest.approx(-np.pi / 2)
    assert not maps.degenerate


def test_edge_maps_degenerate_flag():
    from mirrorsym.features import ResponseStack
    bank = small_bank(8)
    maps = edge_maps(ResponseStack(np.zeros((3, 4, 8, 8))), bank)
    assert maps.degenerate
    assert maps.amplitude.max() == 0.0
    assert maps.orientation.max() == 0.0


def test_vertical_step_edge_orientation_convention():
    # phi is the direction of the maximizing filter = edge normal; a vertical
    # step edge gives phi = 0 along the edge
    size = 64
    bank = build_filter_bank(size, size, scales=4, orientations=8,
                             min_wavelength=4.0)
    img = np.zeros((size, size))
    img[:, size // 2:] = 1.0
    maps = compute_edge_maps(img, bank)
    edge_cols = maps.amplitude[:, size // 2 - 2:size // 2 + 2]
    rows, cols = np.nonzero(edge_cols > 0.5)
    assert rows.size > 0
    phis = maps.orientation[rows, cols + size // 2 - 2]
    np.testing.assert_allclose(phis, 0.0, atol=1e-12)


def test_streaming_maps_match_staged_maps():
    rng = np.random.default_rng(11)
    bank = small_bank()
    img = rng.random((32, 32))
    staged = edge_maps(apply_filter_bank(img, bank), bank)
    fused = compute_edge_maps(img, bank)
    np.testing.assert_array_equal(staged.amplitude, fused.amplitude)
    np.testing.assert_array_equal(staged.orientation, fused.orientation)


def test_rgb_to_hsv_matches_colorsys():
    rng = np.random.default_rng(5)
    rgb = rng.random((40, 3))
    hsv = rgb_to_hsv(rgb.reshape(1, -1, 3))[0]
    for k in range(40):
        h, s, v = colorsys.rgb_to_hsv(*rgb[k])
        assert hsv[k, 0] == pytest.approx(h * 2 * math.pi, abs=1e-12)
        assert hsv[k, 1] == pytest.approx(s, abs=1e-12)
        assert hsv[k, 2] == pytest.approx(v, abs=1e-12)


def test_rgb_to_hsv_gray_pixels_have_zero_hue():
    hsv = rgb_to_hsv(np.full((2, 2, 3), 0.5))
    assert np.all(hsv[..., 0] == 0.0)
    assert np.all(hsv[..., 1] == 0.0)


def test_sampling_empty_for_flat_amplitude():
    from mirrorsym.features import EdgeMaps
    maps = EdgeMaps(amplitude=np.zeros((16, 16)),
                    orientation=np.zeros((16, 16)), degenerate=True)
    hsv = np.zeros((16, 16, 3))
    assert sample_feature_points(maps, hsv, 4) == []


def test_sampling_single_bright_dot():
    from mirrorsym.features import EdgeMaps
    amp = np.zeros((32, 32))
    amp[10, 10] = 1.0
    maps = EdgeMaps(amplitude=amp, orientation=np.zeros_like(amp))
    points = sample_feature_points(maps, np.zeros((32, 32, 3)), 8)
    assert len(points) == 1
    assert (points[0].x, points[0].y) == (10.0, 10.0)
    assert points[0].amplitude == 1.0


def test_sampling_cell_count_bound_and_unique_cells():
    rng = np.random.default_rng(2)
    from mirrorsym.features import EdgeMaps
    amp = rng.random((64, 64))
    maps = EdgeMaps(amplitude=amp, orientation=np.zeros_like(amp))
    points = sample_feature_points(maps, np.zeros((64, 64, 3)), 4,
                                   homogeneity_threshold=0.0)
    assert len(points) <= 16 * 16
    ids = [p.cell_id for p in points]
    assert len(ids) == len(set(ids))
    for p in points:
        y0, y1, x0, x1 = cell_bounds(p.cell_id, 64, 64, 4)
        assert x0 <= p.x < x1 and y0 <= p.y < y1


def test_sampling_rejects_tiny_cells():
    from mirrorsym.features import EdgeMaps
    maps = EdgeMaps(amplitude=np.zeros((8, 8)), orientation=np.zeros((8, 8)))
    with pytest.raises(ParameterError):
        sample_feature_points(maps, np.zeros((8, 8, 3)), 1)


def test_default_cell_size():
    assert default_cell_size(256, 256) == 4
    assert default_cell_size(64, 64) == 2
    assert default_cell_size(640, 480) == 10


def test_feature_positions_invariant_to_constant_shift():
    rng = np.random.default_rng(9)
    size = 32
    bank = small_bank(size)
    base = rng.random((size, size)) * 0.5
    hsv = np.zeros((size, size, 3))
    maps1 = compute_edge_maps(base, bank)
    maps2 = compute_edge_maps(base + 0.3, bank)
    p1 = sample_feature_points(maps1, hsv, 4)
    p2 = sample_feature_points(maps2, hsv, 4)
    assert len(p1) == len(p2) > 0
    for a, b in zip(p1, p2):
        assert abs(a.x - b.x) <= 1e-6 and abs(a.y - b.y) <= 1e-6

"""Pairwise symmetry voting in a (rho, theta) accumulator.

Every feature pair proposes the perpendicular bisector of its connecting
segment as a candidate mirror axis.  The axis is parametrized by the angle
theta of its normal (degrees in [0, 360)) and the distance rho of the line
from the image origin (top-left pixel), normalized so rho >= 0.  Each pair
carries a weight, the product of a mirror-orientation term and the textural
and color histogram intersections; weights are L1-normalized over all pairs
and accumulated into a histogram of 1 px rho bins by 1 degree theta bins.
The smoothed histogram's non-maximal-suppression peaks are the detected
axes, with endpoints clipped to the convex hull of the peak's voters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.ndimage import gaussian_filter1d, maximum_filter

from .errors import NoSymmetryEvidenceError, ParameterError
from .features import FeaturePoint
from .histograms import intersection, reverse

THETA_BINS = 360

_PAIR_BLOCK = 131072


def pair_axis_params(p_i: tuple[float, float],
                     p_j: tuple[float, float]) -> tuple[float, float]:
    """(rho, theta) of the perpendicular bisector of segment p_i p_j.

    theta (degrees in [0, 360)) is the angle of the line's unit normal, and
    rho >= 0 its distance from the origin; (rho, theta) flips to
    (-rho, theta + 180) whenever the signed distance comes out negative,
    so swapping the arguments gives identical parameters.
    """
    dx = p_j[0] - p_i[0]
    dy = p_j[1] - p_i[1]
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise ParameterError(f"coincident points {p_i}")
    nx, ny = dx / norm, dy / norm
    rho = (p_i[0] + p_j[0]) / 2.0 * nx + (p_i[1] + p_j[1]) / 2.0 * ny
    theta = math.degrees(math.atan2(ny, nx))
    if rho < 0.0:
        rho, theta = -rho, theta + 180.0
    theta %= 360.0
    if rho == 0.0 and theta >= 180.0:
        theta -= 180.0
    return rho, theta


def reflection_matrix(gamma: float) -> np.ndarray:
    """2x2 reflection across the line through the origin at angle gamma."""
    c2, s2 = math.cos(2.0 * gamma), math.sin(2.0 * gamma)
    return np.array([[c2, s2], [s2, -c2]])


def mirror_term(phi_i: float, phi_j: float, gamma: float) -> float:
    """|tau_i . R(gamma) tau_j| with tau = (cos phi, sin phi).

    1 when the two orientations are exact mirror images across the axis
    of direction gamma, 0 when one is rotated 90 degrees off its mirror.
    """
    tau_i = np.array([math.cos(phi_i), math.sin(phi_i)])
    tau_j = np.array([math.cos(phi_j), math.sin(phi_j)])
    return float(abs(tau_i @ reflection_matrix(gamma) @ tau_j))


def symmetry_weight(f_i: FeaturePoint, f_j: FeaturePoint) -> float:
    """Pair weight m * t * q; each factor lies in [0, 1].

    m mirrors the edge orientations across the candidate axis, t intersects
    the first textural histogram with the reverse of the second, q intersects
    the color histograms.  All-zero histograms give a zero weight.
    """
    if f_i.textural is None or f_j.textural is None:
        raise ParameterError("feature points are missing textural histograms")
    if f_i.color_hist is None or f_j.color_hist is None:
        raise ParameterError("feature points are missing color histograms")
    _, theta = pair_axis_params(f_i.position, f_j.position)
    gamma = math.radians(theta) + math.pi / 2.0
    m = mirror_term(f_i.orientation, f_j.orientation, gamma)
    t = intersection(f_i.textural, reverse(f_j.textural))
    q = intersection(f_i.color_hist, f_j.color_hist)
    return m * t * q


@dataclass
class PairVotes:
    """Struct-of-arrays list of pair votes; row k is the pair (i[k], j[k]), i < j."""

    i: np.ndarray
    j: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    weight: np.ndarray

    def __len__(self) -> int:
        return self.i.shape[0]


def compute_pair_votes(features: list[FeaturePoint]) -> PairVotes:
    """Votes of all P(P-1)/2 feature pairs, vectorized in blocks."""
    n = len(features)
    if n < 2:
        empty = np.empty(0)
        return PairVotes(i=np.empty(0, dtype=np.intp), j=np.empty(0, dtype=np.intp),
                         rho=empty, theta=empty.copy(), weight=empty.copy())
    pos = np.array([[f.x, f.y] for f in features])
    phi = np.array([f.orientation for f in features])
    tex = np.stack([np.asarray(f.textural, dtype=np.float64) for f in features])
    tex_rev = tex[:, ::-1]
    col = np.stack([np.asarray(f.color_hist, dtype=np.float64) for f in features])

    ii, jj = np.triu_indices(n, k=1)
    rho = np.empty(ii.shape[0])
    theta = np.empty(ii.shape[0])
    weight = np.empty(ii.shape[0])
    for start in range(0, ii.shape[0], _PAIR_BLOCK):
        sl = slice(start, min(start + _PAIR_BLOCK, ii.shape[0]))
        bi, bj = ii[sl], jj[sl]
        delta = pos[bj] - pos[bi]
        norm = np.hypot(delta[:, 0], delta[:, 1])
        if np.any(norm == 0.0):
            raise ParameterError("coincident feature positions")
        nx, ny = delta[:, 0] / norm, delta[:, 1] / norm
        mid = (pos[bi] + pos[bj]) / 2.0
        theta_rad = np.arctan2(ny, nx)
        r = mid[:, 0] * nx + mid[:, 1] * ny
        t_deg = np.degrees(theta_rad)
        flip = r < 0.0
        r = np.abs(r)
        t_deg = np.where(flip, t_deg + 180.0, t_deg) % 360.0
        t_deg = np.where((r == 0.0) & (t_deg >= 180.0), t_deg - 180.0, t_deg)

        # gamma enters only through cos(2*gamma - ...), which is invariant
        # to the 180-degree flip above
        gamma = theta_rad + np.pi / 2.0
        m = np.abs(np.cos(2.0 * gamma - phi[bi] - phi[bj]))
        t = np.minimum(tex[bi], tex_rev[bj]).sum(axis=1)
        q = np.minimum(col[bi], col[bj]).sum(axis=1)

        rho[sl] = r
        theta[sl] = t_deg
        weight[sl] = m * t * q
    return PairVotes(i=ii, j=jj, rho=rho, theta=theta, weight=weight)


@dataclass
class VoteHistogram:
    """2-D (rho, theta) accumulator of normalized pair weights.

    ``bins`` has ceil(sqrt(W^2 + H^2)) rho rows (1 px each) and 360 theta
    columns (1 degree each) and sums to 1.  The per-pair bin indices are kept
    so the voters of any bin neighborhood can be recovered.
    """

    bins: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    pair_rho_bins: np.ndarray
    pair_theta_bins: np.ndarray
    pair_weights: np.ndarray

    @property
    def rho_bins(self) -> int:
        return self.bins.shape[0]

    def voters(self, rho_bin: int, theta_bin: int) -> np.ndarray:
        """Indices of pairs whose vote landed in one bin."""
        mask = (self.pair_rho_bins == rho_bin) & (self.pair_theta_bins == theta_bin)
        return np.flatnonzero(mask)

    def voters_in_window(self, rho_bin: int, theta_bin: int,
                         window: tuple[int, int]) -> np.ndarray:
        """Indices of pairs voting within a (rho, theta) window; theta wraps."""
        half_r, half_t = window[0] // 2, window[1] // 2
        d_theta = np.abs(self.pair_theta_bins - theta_bin)
        d_theta = np.minimum(d_theta, THETA_BINS - d_theta)
        mask = (np.abs(self.pair_rho_bins - rho_bin) <= half_r) & (d_theta <= half_t)
        return np.flatnonzero(mask)


def accumulate(votes: PairVotes, width: int, height: int) -> VoteHistogram:
    """L1-normalize the weights and bin every pair at (floor rho, floor theta)."""
    total = float(votes.weight.sum()) if len(votes) else 0.0
    if total <= 0.0:
        raise NoSymmetryEvidenceError("no symmetry evidence: all pair weights are zero")
    n_rho = math.ceil(math.hypot(width, height))
    normalized = votes.weight / total
    rho_bins = np.clip(np.floor(votes.rho).astype(np.intp), 0, n_rho - 1)
    theta_bins = np.clip(np.floor(votes.theta).astype(np.intp), 0, THETA_BINS - 1)
    bins = np.zeros((n_rho, THETA_BINS))
    np.add.at(bins, (rho_bins, theta_bins), normalized)
    return VoteHistogram(bins=bins, pair_i=votes.i, pair_j=votes.j,
                         pair_rho_bins=rho_bins, pair_theta_bins=theta_bins,
                         pair_weights=normalized)


def smooth(hist: VoteHistogram | np.ndarray, sigma_rho: float = 2.0,
           sigma_theta: float = 2.0) -> np.ndarray:
    """Separable Gaussian smoothing; theta wraps circularly, rho zero-pads.

    Kernels are truncated at 3 sigma.
    """
    if sigma_rho <= 0 or sigma_theta <= 0:
        raise ParameterError("smoothing sigmas must be > 0")
    bins = hist.bins if isinstance(hist, VoteHistogram) else np.asarray(hist)
    out = gaussian_filter1d(bins, sigma_rho, axis=0, mode="constant", truncate=3.0)
    return gaussian_filter1d(out, sigma_theta, axis=1, mode="wrap", truncate=3.0)


class Peak(NamedTuple):
    """One accumulator peak; rho/theta are bin centres, score is top-normalized."""

    rho: float
    theta: float
    score: float
    rho_bin: int
    theta_bin: int


def find_peaks(smoothed: np.ndarray, max_peaks: int = 10,
               nms_window: tuple[int, int] = (11, 11)) -> list[Peak]:
    """Non-maximal suppression peaks, sorted by descending score.

    A bin is a peak iff it is strictly greater than every other bin inside
    the window (theta wraps at 360, rho does not).  Scores are divided by
    the top peak's value.
    """
    if max_peaks < 1:
        raise ParameterError(f"max_peaks must be >= 1, got {max_peaks}")
    win_r, win_t = nms_window
    if win_r < 1 or win_t < 1 or win_r % 2 == 0 or win_t % 2 == 0:
        raise ParameterError(f"NMS window must be odd positive, got {nms_window}")
    half_r, half_t = win_r // 2, win_t // 2
    padded = np.pad(smoothed, ((0, 0), (half_t, half_t)), mode="wrap")
    padded = np.pad(padded, ((half_r, half_r), (0, 0)),
                    mode="constant", constant_values=-np.inf)
    footprint = np.ones((win_r, win_t), dtype=bool)
    footprint[half_r, half_t] = False
    neighbor_max = maximum_filter(padded, footprint=footprint,
                                  mode="constant", cval=-np.inf)
    neighbor_max = neighbor_max[half_r:half_r + smoothed.shape[0],
                                half_t:half_t + smoothed.shape[1]]
    rows, cols = np.nonzero((smoothed > neighbor_max) & (smoothed > 0.0))
    if rows.size == 0:
        return []
    values = smoothed[rows, cols]
    order = np.lexsort((cols, rows, -values))[:max_peaks]
    top = values[order[0]]
    return [Peak(rho=float(rows[k]) + 0.5, theta=float(cols[k]) + 0.5,
                 score=float(values[k] / top),
                 rho_bin=int(rows[k]), theta_bin=int(cols[k]))
            for k in order]


@dataclass(frozen=True)
class SymmetryAxis:
    """Scored axis candidate with endpoints on the line x cos(t) + y sin(t) = rho."""

    rho: float
    theta: float
    score: float
    endpoints: tuple[tuple[float, float], tuple[float, float]]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[float, float]]:
    """Monotone-chain convex hull; collinear interior points are dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _clip_line_to_hull(hull, nx, ny, rho):
    """Intersections of the line x*nx + y*ny = rho with a hull polygon."""
    dist = [vx * nx + vy * ny - rho for vx, vy in hull]
    points = []
    for k in range(len(hull)):
        k2 = (k + 1) % len(hull)
        d1, d2 = dist[k], dist[k2]
        if d1 == 0.0:
            points.append(hull[k])
        if (d1 < 0.0 < d2) or (d2 < 0.0 < d1):
            s = d1 / (d1 - d2)
            points.append((hull[k][0] + s * (hull[k2][0] - hull[k][0]),
                           hull[k][1] + s * (hull[k2][1] - hull[k][1])))
    return points


def axis_endpoints(peak: Peak, hist: VoteHistogram, features: list[FeaturePoint],
                   nms_window: tuple[int, int] = (11, 11)) -> SymmetryAxis:
    """Axis segment bounded by the convex hull of the peak's voting features.

    Voters are the pairs whose un-smoothed bin lies inside the peak's NMS
    window.  Degenerate hulls (fewer than 3 vertices, or a line that misses
    the hull) fall back to the min/max projections of the voter midpoints
    onto the axis direction.
    """
    voters = hist.voters_in_window(peak.rho_bin, peak.theta_bin, nms_window)
    if voters.size == 0:
        raise ParameterError(
            f"peak at bin ({peak.rho_bin}, {peak.theta_bin}) has no voters")
    idx_i = hist.pair_i[voters]
    idx_j = hist.pair_j[voters]
    theta_rad = math.radians(peak.theta)
    nx, ny = math.cos(theta_rad), math.sin(theta_rad)
    dx, dy = -ny, nx

    feat_idx = sorted(set(idx_i.tolist()) | set(idx_j.tolist()))
    hull = convex_hull([(features[k].x, features[k].y) for k in feat_idx])
    ends = None
    if len(hull) >= 3:
        cuts = _clip_line_to_hull(hull, nx, ny, peak.rho)
        if len(cuts) >= 2:
            proj = [px * dx + py * dy for px, py in cuts]
            ends = (cuts[int(np.argmin(proj))], cuts[int(np.argmax(proj))])
    if ends is None:
        # midpoints of the voting pairs, projected onto the axis line
        mids_x = (np.array([features[k].x for k in idx_i])
                  + np.array([features[k].x for k in idx_j])) / 2.0
        mids_y = (np.array([features[k].y for k in idx_i])
                  + np.array([features[k].y for k in idx_j])) / 2.0
        t = (mids_x - peak.rho * nx) * dx + (mids_y - peak.rho * ny) * dy
        lo, hi = float(t.min()), float(t.max())
        ends = ((peak.rho * nx + lo * dx, peak.rho * ny + lo * dy),
                (peak.rho * nx + hi * dx, peak.rho * ny + hi * dy))
    (ax, ay), (bx, by) = ends
    return SymmetryAxis(rho=peak.rho, theta=peak.theta, score=peak.score,
                        endpoints=((float(ax), float(ay)), (float(bx), float(by))))

"""Detection scoring: true-positive criteria, PR curves, and max F1.

A detected axis counts as a true positive against a groundtruth axis when
the angle between the two segments (folded into [0, 90] degrees) is strictly
below gamma AND the distance between the segment midpoints is strictly below
zeta.  The (gamma, zeta) thresholds come in three named regimes used by the
public symmetry-detection competitions:

    CVPR2011:  gamma = 10 deg, zeta = 20% of the groundtruth length
    CVPR2013:  gamma = 10 deg, zeta = 20% of min(detection, groundtruth) length
    ICCV2017:  gamma = 3 deg,  zeta = 2.5% of min(image width, height)

Matching is greedy and one-to-one: detections in descending score order each
claim the first unmatched groundtruth they satisfy.  Unmatched detections
are false positives; unmatched groundtruths are false negatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ParameterError


@dataclass(frozen=True)
class AxisSegment:
    """A symmetry axis given by its two endpoints; score set on detections only."""

    ax: float
    ay: float
    bx: float
    by: float
    score: float | None = None

    def vector(self) -> tuple[float, float]:
        return (self.ax - self.bx, self.ay - self.by)

    def midpoint(self) -> tuple[float, float]:
        return ((self.ax + self.bx) / 2.0, (self.ay + self.by) / 2.0)

    def length(self) -> float:
        return math.hypot(self.ax - self.bx, self.ay - self.by)


@dataclass(frozen=True)
class ThresholdRegime:
    """Named (gamma, zeta) threshold pair of one competition's metric."""

    name: str
    gamma_degrees: float
    zeta_rule: str


REGIMES = {
    "CVPR2011": ThresholdRegime("CVPR2011", 10.0, "gt_fraction"),
    "CVPR2013": ThresholdRegime("CVPR2013", 10.0, "min_length_fraction"),
    "ICCV2017": ThresholdRegime("ICCV2017", 3.0, "image_fraction"),
}


def resolve_regime(regime: str | ThresholdRegime) -> ThresholdRegime:
    if isinstance(regime, ThresholdRegime):
        return regime
    try:
        return REGIMES[regime]
    except KeyError:
        raise ParameterError(
            f"unknown threshold regime {regime!r}; expected one of "
            f"{sorted(REGIMES)}") from None


def angle_between(sc: AxisSegment, gt: AxisSegment) -> float:
    """Angle between two segments in degrees, folded into [0, 90].

    Computed as atan2(|cross|, dot) of the direction vectors, so anti-parallel
    directions fold to 0 and the result is defined even for dot <= 0.
    """
    vx1, vy1 = sc.vector()
    vx2, vy2 = gt.vector()
    if (vx1 == 0.0 and vy1 == 0.0) or (vx2 == 0.0 and vy2 == 0.0):
        raise ParameterError("zero-length axis segment")
    cross = vx1 * vy2 - vy1 * vx2
    dot = vx1 * vx2 + vy1 * vy2
    gamma = math.degrees(math.atan2(abs(cross), dot))
    return 180.0 - gamma if gamma > 90.0 else gamma


def midpoint_tolerance(regime: str | ThresholdRegime, sc: AxisSegment,
                       gt: AxisSegment,
                       image_size: tuple[int, int] | None = None) -> float:
    """The zeta distance threshold of one regime for one detection/GT pair."""
    regime = resolve_regime(regime)
    if regime.zeta_rule == "gt_fraction":
        return 0.2 * gt.length()
    if regime.zeta_rule == "min_length_fraction":
        return 0.2 * min(sc.length(), gt.length())
    if image_size is None:
        raise ParameterError(f"regime {regime.name} needs the image size")
    return 0.025 * min(image_size[0], image_size[1])


def is_true_positive(sc: AxisSegment, gt: AxisSegment,
                     regime: str | ThresholdRegime,
                     image_size: tuple[int, int] | None = None) -> bool:
    """True iff both the angular and the midpoint-distance tests pass (strictly)."""
    regime = resolve_regime(regime)
    if angle_between(sc, gt) >= regime.gamma_degrees:
        return False
    mx_sc, my_sc = sc.midpoint()
    mx_gt, my_gt = gt.midpoint()
    dist = math.hypot(mx_sc - mx_gt, my_sc - my_gt)
    return dist < midpoint_tolerance(regime, sc, gt, image_size)


class MatchResult(NamedTuple):
    tp: int
    fp: int
    fn: int
    pairs: list[tuple[int, int]]


def match(detections: list[AxisSegment], gts: list[AxisSegment],
          regime: str | ThresholdRegime,
          image_size: tuple[int, int] | None = None) -> MatchResult:
    """Greedy one-to-one matching in descending detection-score order."""
    for det in detections:
        if det.score is None:
            raise ParameterError("detections must carry scores")
    order = sorted(range(len(detections)),
                   key=lambda k: (-detections[k].score, k))
    taken: set[int] = set()
    pairs = []
    for k in order:
        for g, gt in enumerate(gts):
            if g in taken:
                continue
            if is_true_positive(detections[k], gt, regime, image_size):
                taken.add(g)
                pairs.append((k, g))
                break
    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(detections) - tp, fn=len(gts) - tp,
                       pairs=pairs)


class PRPoint(NamedTuple):
    threshold: float
    precision: float
    recall: float


def pr_curve(detections: list[AxisSegment], gts: list[AxisSegment],
             regime: str | ThresholdRegime,
             image_size: tuple[int, int] | None = None) -> list[PRPoint]:
    """One (precision, recall) sample per distinct score, descending.

    Precision is defined as 1 when no detections clear the threshold.
    """
    if not gts:
        raise ParameterError("empty groundtruth")
    thresholds = sorted({d.score for d in detections if d.score is not None},
                        reverse=True)
    curve = []
    for tau in thresholds:
        kept = [d for d in detections if d.score >= tau]
        result = match(kept, gts, regime, image_size)
        precision = result.tp / (result.tp + result.fp) if kept else 1.0
        recall = result.tp / (result.tp + result.fn)
        curve.append(PRPoint(threshold=tau, precision=precision, recall=recall))
    return curve


def max_f1(curve: list[PRPoint]) -> float:
    """Largest harmonic mean of precision and recall over the curve samples."""
    if not curve:
        raise ParameterError("empty PR curve")
    best = 0.0
    for point in curve:
        denom = point.precision + point.recall
        if denom > 0:
            best = max(best, 2.0 * point.precision * point.recall / denom)
    return best


@dataclass(frozen=True)
class EvalReport:
    """Counts at the all-detections operating point, plus the full PR curve."""

    tp: int
    fp: int
    fn: int
    curve: list[PRPoint]
    max_f1: float


def evaluate_dataset(detections: dict[str, list[AxisSegment]],
                     groundtruth: dict[str, list[AxisSegment]],
                     regime: str | ThresholdRegime,
                     image_sizes: dict[str, tuple[int, int]] | None = None,
                     ) -> EvalReport:
    """Aggregate PR curve and max F1 over a whole dataset.

    Every detection image id must exist in the groundtruth set; groundtruth
    images without detections contribute false negatives.  Thresholds sweep
    the distinct detection scores globally.
    """
    regime = resolve_regime(regime)
    unknown = sorted(set(detections) - set(groundtruth))
    if unknown:
        raise ParameterError(
            f"detection image ids missing from groundtruth: {unknown[:5]}")
    needs_size = regime.zeta_rule == "image_fraction"

    def size_of(image_id):
        if not needs_size:
            return None
        if image_sizes is None or image_id not in image_sizes:
            raise ParameterError(
                f"regime {regime.name} needs the size of image {image_id!r}")
        return image_sizes[image_id]

    total_gt = sum(len(axes) for axes in groundtruth.values())
    thresholds = sorted({d.score for axes in detections.values() for d in axes
                         if d.score is not None}, reverse=True)
    curve = []
    tp = fp = 0
    fn = total_gt
    for tau in thresholds:
        tp = fp = fn = 0
        for image_id, gts in groundtruth.items():
            kept = [d for d in detections.get(image_id, []) if d.score >= tau]
            result = match(kept, gts, regime, size_of(image_id))
            tp += result.tp
            fp += result.fp
            fn += result.fn
        precision = tp / (tp + fp) if tp + fp > 0 else 1.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        curve.append(PRPoint(threshold=tau, precision=precision, recall=recall))
    return EvalReport(tp=tp, fp=fp, fn=fn, curve=curve,
                      max_f1=max_f1(curve) if curve else 0.0)

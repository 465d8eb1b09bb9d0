"""Detection and groundtruth interchange files.

Both formats are line-oriented UTF-8 text with LF endings and
space-separated fields, one axis per line:

    detections:   image_id a_x a_y b_x b_y score
    groundtruth:  image_id a_x a_y b_x b_y

Floats are written with repr(), which round-trips exactly, so writing a
parsed file back is byte-identical.  Groundtruth from the public datasets
comes in per-image endpoint files; the ``psu``, ``nyu`` and ``iccv2017``
dialects read those (``a_x a_y b_x b_y`` lines, image id = file stem, a
directory of ``*.txt`` files is accepted), while ``generic`` reads the
combined format above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParameterError, RecordFormatError
from .evaluation import AxisSegment

GROUNDTRUTH_DIALECTS = ("generic", "psu", "nyu", "iccv2017")


@dataclass
class DetectionRecord:
    """All scored axes detected in one image, descending score."""

    image_id: str
    axes: list[AxisSegment] = field(default_factory=list)


@dataclass
class GroundTruthRecord:
    """All annotated axes of one image."""

    image_id: str
    axes: list[AxisSegment] = field(default_factory=list)


def _parse_floats(path, number, fields, count):
    try:
        return [float(v) for v in fields[:count]]
    except ValueError as exc:
        raise RecordFormatError(path, number, str(exc)) from None


def format_detections(records: list[DetectionRecord]) -> str:
    """Canonical text: records sorted by image id, axes by descending score."""
    lines = []
    for record in sorted(records, key=lambda r: r.image_id):
        ordered = sorted(record.axes,
                         key=lambda a: -(a.score if a.score is not None else 0.0))
        for axis in ordered:
            score = axis.score if axis.score is not None else 0.0
            lines.append(f"{record.image_id} {axis.ax!r} {axis.ay!r} "
                         f"{axis.bx!r} {axis.by!r} {score!r}")
    return "".join(line + "\n" for line in lines)


def write_detections(records: list[DetectionRecord], path) -> None:
    Path(path).write_text(format_detections(records), encoding="utf-8",
                          newline="\n")


def parse_detections(path) -> list[DetectionRecord]:
    by_id: dict[str, DetectionRecord] = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 6:
            raise RecordFormatError(path, number,
                                    f"expected 6 fields, got {len(fields)}")
        ax, ay, bx, by, score = _parse_floats(path, number, fields[1:], 5)
        record = by_id.setdefault(fields[0], DetectionRecord(image_id=fields[0]))
        record.axes.append(AxisSegment(ax, ay, bx, by, score=score))
    return list(by_id.values())


def format_groundtruth(records: list[GroundTruthRecord]) -> str:
    lines = []
    for record in sorted(records, key=lambda r: r.image_id):
        for axis in record.axes:
            lines.append(f"{record.image_id} {axis.ax!r} {axis.ay!r} "
                         f"{axis.bx!r} {axis.by!r}")
    return "".join(line + "\n" for line in lines)


def write_groundtruth(records: list[GroundTruthRecord], path) -> None:
    Path(path).write_text(format_groundtruth(records), encoding="utf-8",
                          newline="\n")


def _parse_generic_groundtruth(path) -> list[GroundTruthRecord]:
    by_id: dict[str, GroundTruthRecord] = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise RecordFormatError(path, number,
                                    f"expected 5 fields, got {len(fields)}")
        ax, ay, bx, by = _parse_floats(path, number, fields[1:], 4)
        record = by_id.setdefault(fields[0], GroundTruthRecord(image_id=fields[0]))
        record.axes.append(AxisSegment(ax, ay, bx, by))
    return list(by_id.values())


def _parse_endpoint_file(path) -> GroundTruthRecord:
    record = GroundTruthRecord(image_id=Path(path).stem)
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.replace(",", " ").strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise RecordFormatError(path, number,
                                    f"expected 4 fields, got {len(fields)}")
        ax, ay, bx, by = _parse_floats(path, number, fields, 4)
        record.axes.append(AxisSegment(ax, ay, bx, by))
    return record


def parse_groundtruth(path, dialect: str = "generic") -> list[GroundTruthRecord]:
    """Parse one groundtruth source into normalized endpoint records."""
    if dialect not in GROUNDTRUTH_DIALECTS:
        raise ParameterError(f"unknown groundtruth dialect {dialect!r}; "
                             f"expected one of {GROUNDTRUTH_DIALECTS}")
    path = Path(path)
    if dialect == "generic":
        return _parse_generic_groundtruth(path)
    if path.is_dir():
        records = [_parse_endpoint_file(p) for p in sorted(path.glob("*.txt"))]
        return [r for r in records if r.axes]
    return [_parse_endpoint_file(path)]


def write_image_sizes(sizes: dict[str, tuple[int, int]], path) -> None:
    lines = [f"{image_id} {w} {h}" for image_id, (w, h) in sorted(sizes.items())]
    Path(path).write_text("".join(line + "\n" for line in lines),
                          encoding="utf-8", newline="\n")


def parse_image_sizes(path) -> dict[str, tuple[int, int]]:
    """`image_id width height` lines -> {image_id: (width, height)}."""
    sizes: dict[str, tuple[int, int]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise RecordFormatError(path, number,
                                    f"expected 3 fields, got {len(fields)}")
        try:
            sizes[fields[0]] = (int(fields[1]), int(fields[2]))
        except ValueError as exc:
            raise RecordFormatError(path, number, str(exc)) from None
    return sizes

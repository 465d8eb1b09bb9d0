"""HTTP service wrapping the detection pipeline and the evaluation metrics.

Images travel as base64-encoded raster bytes inside JSON bodies; responses
are plain JSON.  Core errors map to structured JSON errors with a stable
``code`` field (io, validation, no-features, no-evidence) that the CLI
translates into exit codes.
"""

from __future__ import annotations

import base64
import binascii
import io

import numpy as np
from fastapi import FastAPI, HTTPException
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, Field

from . import __version__
from .config import Config
from .errors import NoFeaturesError, NoSymmetryEvidenceError, ParameterError
from .evaluation import AxisSegment, evaluate_dataset
from .pipeline import detect_array
from .records import DetectionRecord
from .render import heatmap_image, render_overlay


class AxisModel(BaseModel):
    ax: float
    ay: float
    bx: float
    by: float
    score: float | None = None


class DetectRequest(BaseModel):
    image_id: str = "image"
    image_base64: str
    config: dict[str, str | int | float | bool] = Field(default_factory=dict)
    include_heatmap: bool = False


class DetectResponse(BaseModel):
    image_id: str
    width: int
    height: int
    used_color: bool
    feature_count: int
    axes: list[AxisModel]
    heatmap_base64: str | None = None


class RecordModel(BaseModel):
    image_id: str
    axes: list[AxisModel]


class EvaluateRequest(BaseModel):
    regime: str
    detections: list[RecordModel]
    groundtruth: list[RecordModel]
    image_sizes: dict[str, tuple[int, int]] | None = None


class CurvePointModel(BaseModel):
    threshold: float
    precision: float
    recall: float


class EvaluateResponse(BaseModel):
    regime: str
    tp: int
    fp: int
    fn: int
    max_f1: float
    curve: list[CurvePointModel]


class OverlayRequest(BaseModel):
    image_base64: str
    axes: list[AxisModel]
    top_k: int = 5


class ImageResponse(BaseModel):
    image_base64: str


def _error(status, code, message):
    return HTTPException(status_code=status,
                         detail={"code": code, "message": message})


def _decode_image(b64: str) -> np.ndarray:
    try:
        raw = base64.b64decode(b64, validate=True)
    except (binascii.Error, ValueError):
        raise _error(400, "io", "image_base64 is not valid base64") from None
    try:
        with Image.open(io.BytesIO(raw)) as img:
            if img.mode in ("1", "L", "I", "I;16", "F"):
                return np.asarray(img.convert("L"))
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as exc:
        raise _error(400, "io", f"cannot decode image: {exc}") from None


def _encode_png(image) -> str:
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _segments(models: list[AxisModel]) -> list[AxisSegment]:
    return [AxisSegment(m.ax, m.ay, m.bx, m.by, score=m.score) for m in models]


def create_app() -> FastAPI:
    app = FastAPI(title="mirrorsym", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/config/defaults")
    def config_defaults():
        return Config().to_dict()

    @app.post("/detect", response_model=DetectResponse,
              response_model_exclude_none=True)
    def detect(request: DetectRequest):
        image = _decode_image(request.image_base64)
        try:
            config = Config().with_overrides(request.config)
            result = detect_array(image, config, image_id=request.image_id)
        except ParameterError as exc:
            raise _error(400, "validation", str(exc)) from None
        except NoFeaturesError as exc:
            raise _error(422, "no-features", str(exc)) from None
        except NoSymmetryEvidenceError as exc:
            raise _error(422, "no-evidence", str(exc)) from None
        heatmap = None
        if request.include_heatmap:
            heatmap = _encode_png(heatmap_image(result.smoothed))
        return DetectResponse(
            image_id=result.record.image_id, width=result.width,
            height=result.height, used_color=result.used_color,
            feature_count=len(result.features),
            axes=[AxisModel(ax=a.ax, ay=a.ay, bx=a.bx, by=a.by, score=a.score)
                  for a in result.record.axes],
            heatmap_base64=heatmap)

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(request: EvaluateRequest):
        detections = {r.image_id: _segments(r.axes) for r in request.detections}
        groundtruth = {r.image_id: _segments(r.axes) for r in request.groundtruth}
        try:
            report = evaluate_dataset(detections, groundtruth, request.regime,
                                      request.image_sizes)
        except ParameterError as exc:
            raise _error(400, "validation", str(exc)) from None
        return EvaluateResponse(
            regime=request.regime, tp=report.tp, fp=report.fp, fn=report.fn,
            max_f1=report.max_f1,
            curve=[CurvePointModel(threshold=p.threshold, precision=p.precision,
                                   recall=p.recall) for p in report.curve])

    @app.post("/overlay", response_model=ImageResponse)
    def overlay(request: OverlayRequest):
        image = _decode_image(request.image_base64)
        record = DetectionRecord(image_id="overlay",
                                 axes=_segments(request.axes))
        try:
            canvas = render_overlay(image, record, top_k=request.top_k)
        except ParameterError as exc:
            raise _error(400, "validation", str(exc)) from None
        return ImageResponse(image_base64=_encode_png(canvas))

    return app


app = create_app()

"""Command-line client for the detection service.

Every verb talks HTTP to the service: either a remote instance given with
--server, or an in-process instance spun up on demand (no server required).
Local file reading/writing stays on the client side.

Exit codes: 0 success, 3 I/O failure, 4 validation failure, 5 no feature
points, 6 no symmetry evidence (2 is click's own usage-error code).
"""

from __future__ import annotations

import base64
import json
import sys
from pathlib import Path

import click
import httpx

from .config import load_config
from .errors import MirrorSymError, ParameterError, RecordFormatError
from .records import (GROUNDTRUTH_DIALECTS, DetectionRecord, format_detections,
                      parse_detections, parse_groundtruth, parse_image_sizes,
                      write_image_sizes)
from .evaluation import AxisSegment

EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_NO_FEATURES = 5
EXIT_NO_EVIDENCE = 6

_ERROR_EXITS = {"io": EXIT_IO, "validation": EXIT_VALIDATION,
                "no-features": EXIT_NO_FEATURES, "no-evidence": EXIT_NO_EVIDENCE}

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _open_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process transport against the ASGI app; behaves like a remote server
    import warnings
    with warnings.catch_warnings():
        # starlette warns (UserWarning) about its httpx-based TestClient
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import create_app
    return TestClient(create_app())


def _call(client: httpx.Client, method: str, path: str, **kwargs):
    try:
        response = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        _fail(EXIT_IO, f"service request failed: {exc}")
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", {})
        except ValueError:
            detail = {}
        code = detail.get("code", "io") if isinstance(detail, dict) else "io"
        message = detail.get("message", response.text) \
            if isinstance(detail, dict) else str(detail)
        _fail(_ERROR_EXITS.get(code, EXIT_IO), message)
    return response.json()


def _config_overrides(config_path, sets) -> dict:
    overrides = {}
    for item in sets:
        if "=" not in item:
            _fail(EXIT_VALIDATION, f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    try:
        return load_config(config_path, overrides).to_dict()
    except ParameterError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read config: {exc}")


def _read_image_b64(path) -> str:
    try:
        return base64.b64encode(Path(path).read_bytes()).decode("ascii")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read image {path}: {exc}")


def _detect_one(client, path, image_id, config, include_heatmap=False):
    payload = {"image_id": image_id, "image_base64": _read_image_b64(path),
               "config": config, "include_heatmap": include_heatmap}
    return _call(client, "POST", "/detect", json=payload)


def _record_from_response(data) -> DetectionRecord:
    axes = [AxisSegment(a["ax"], a["ay"], a["bx"], a["by"],
                        score=a.get("score")) for a in data["axes"]]
    return DetectionRecord(image_id=data["image_id"], axes=axes)


common_config_options = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 envvar="MIRRORSYM_CONFIG",
                 help="Config file (flat key = value lines); also read from "
                      "the MIRRORSYM_CONFIG environment variable."),
    click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
                 help="Override one config key (repeatable)."),
]


def _with_config_options(command):
    for option in reversed(common_config_options):
        command = option(command)
    return command


@click.group()
@click.version_option()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; defaults to an "
                   "in-process instance.")
@click.pass_context
def main(ctx, server):
    """Detect and score reflection-symmetry axes in images."""
    ctx.obj = server


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--out", type=click.Path(),
              help="Detections file to write (default: <image stem>.axes.txt).")
@click.option("--image-id", default=None, help="Record id (default: file stem).")
@click.option("--heatmap", "heatmap_path", type=click.Path(),
              help="Also write the smoothed vote histogram as a PNG.")
@_with_config_options
@click.pass_obj
def detect(server, image, out, image_id, heatmap_path, config_path, sets):
    """Detect symmetry axes in IMAGE and write a detections file."""
    config = _config_overrides(config_path, sets)
    image_id = image_id or Path(image).stem
    out = Path(out) if out else Path(image).with_suffix(".axes.txt")
    with _open_client(server) as client:
        data = _detect_one(client, image, image_id, config,
                           include_heatmap=heatmap_path is not None)
    record = _record_from_response(data)
    out.write_text(format_detections([record]), encoding="utf-8", newline="\n")
    if heatmap_path:
        Path(heatmap_path).write_bytes(base64.b64decode(data["heatmap_base64"]))
    click.echo(f"{image_id}: {len(record.axes)} axes -> {out}")


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--out", type=click.Path(), default="detections.txt",
              show_default=True, help="Combined detections file.")
@click.option("--sizes-out", type=click.Path(),
              help="Also write an `image_id width height` sizes file.")
@_with_config_options
@click.pass_obj
def batch(server, input_dir, out, sizes_out, config_path, sets):
    """Detect axes in every image under INPUT_DIR (sorted id order).

    Images that yield no features or no symmetry evidence are reported on
    stderr and skipped; the batch still completes.
    """
    config = _config_overrides(config_path, sets)
    paths = sorted(p for p in Path(input_dir).iterdir()
                   if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        _fail(EXIT_IO, f"no images found under {input_dir}")
    records, sizes, skipped = [], {}, 0
    with _open_client(server) as client:
        for path in paths:
            payload = {"image_id": path.stem,
                       "image_base64": _read_image_b64(path), "config": config}
            response = client.request("POST", "/detect", json=payload)
            if response.status_code >= 400:
                detail = response.json().get("detail", {})
                code = detail.get("code", "io")
                if code in ("no-features", "no-evidence"):
                    click.echo(f"skip {path.stem}: {detail.get('message')}",
                               err=True)
                    skipped += 1
                    continue
                _fail(_ERROR_EXITS.get(code, EXIT_IO),
                      f"{path.stem}: {detail.get('message', response.text)}")
            data = response.json()
            records.append(_record_from_response(data))
            sizes[path.stem] = (data["width"], data["height"])
    Path(out).write_text(format_detections(records), encoding="utf-8",
                         newline="\n")
    if sizes_out:
        write_image_sizes(sizes, sizes_out)
    click.echo(f"{len(records)} images detected ({skipped} skipped) -> {out}")


@main.command()
@click.argument("detections", type=click.Path(exists=True))
@click.argument("groundtruth", type=click.Path(exists=True))
@click.option("--regime", default="CVPR2013", show_default=True,
              type=click.Choice(["CVPR2011", "CVPR2013", "ICCV2017"]),
              help="Threshold regime.")
@click.option("--dialect", default="generic", show_default=True,
              type=click.Choice(list(GROUNDTRUTH_DIALECTS)),
              help="Groundtruth file dialect.")
@click.option("--image-sizes", "sizes_path", type=click.Path(exists=True),
              help="`image_id width height` file (required for ICCV2017).")
@click.option("-o", "--out", type=click.Path(),
              help="Report JSON path (default: stdout only).")
@click.pass_obj
def evaluate(server, detections, groundtruth, regime, dialect, sizes_path, out):
    """Score a detections file against groundtruth; print PR curve and max F1."""
    try:
        det_records = parse_detections(detections)
        gt_records = parse_groundtruth(groundtruth, dialect)
        sizes = parse_image_sizes(sizes_path) if sizes_path else None
    except RecordFormatError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except MirrorSymError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))

    def to_models(record):
        return {"image_id": record.image_id,
                "axes": [{"ax": a.ax, "ay": a.ay, "bx": a.bx, "by": a.by,
                          "score": a.score} for a in record.axes]}

    payload = {"regime": regime,
               "detections": [to_models(r) for r in det_records],
               "groundtruth": [to_models(r) for r in gt_records],
               "image_sizes": sizes}
    with _open_client(server) as client:
        report = _call(client, "POST", "/evaluate", json=payload)
    if out:
        Path(out).write_text(json.dumps(report, indent=2) + "\n",
                             encoding="utf-8", newline="\n")
    click.echo(f"regime={report['regime']} tp={report['tp']} fp={report['fp']} "
               f"fn={report['fn']} maxF1={report['max_f1']:.4f}")
    for point in report["curve"]:
        click.echo(f"  threshold={point['threshold']:.4f} "
                   f"precision={point['precision']:.4f} "
                   f"recall={point['recall']:.4f}")


@main.command()
@click.argument("image", type=click.Path())
@click.argument("detections", type=click.Path(exists=True))
@click.option("--image-id", default=None,
              help="Record to draw (default: IMAGE file stem).")
@click.option("-k", "--top-k", default=5, show_default=True,
              help="How many axes to draw.")
@click.option("-o", "--out", type=click.Path(),
              help="Output PNG (default: <image stem>.overlay.png).")
@click.pass_obj
def overlay(server, image, detections, image_id, top_k, out):
    """Draw the top-k detected axes from a detections file over IMAGE."""
    image_id = image_id or Path(image).stem
    try:
        records = {r.image_id: r for r in parse_detections(detections)}
    except MirrorSymError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    record = records.get(image_id, DetectionRecord(image_id=image_id))
    payload = {"image_base64": _read_image_b64(image),
               "axes": [{"ax": a.ax, "ay": a.ay, "bx": a.bx, "by": a.by,
                         "score": a.score} for a in record.axes],
               "top_k": top_k}
    with _open_client(server) as client:
        data = _call(client, "POST", "/overlay", json=payload)
    out = Path(out) if out else Path(image).with_suffix(".overlay.png")
    out.write_bytes(base64.b64decode(data["image_base64"]))
    click.echo(f"{image_id}: overlay -> {out}")


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--out", type=click.Path(),
              help="Output PNG (default: <image stem>.heatmap.png).")
@_with_config_options
@click.pass_obj
def heatmap(server, image, out, config_path, sets):
    """Write the smoothed (rho, theta) vote histogram of IMAGE as a PNG."""
    config = _config_overrides(config_path, sets)
    with _open_client(server) as client:
        data = _detect_one(client, image, Path(image).stem, config,
                           include_heatmap=True)
    out = Path(out) if out else Path(image).with_suffix(".heatmap.png")
    out.write_bytes(base64.b64decode(data["heatmap_base64"]))
    click.echo(f"heatmap -> {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()

"""HTTP query service over a loaded feature bank.

The bank is loaded once at startup and never mutated, so any number of
concurrent requests can share it.  Live queries have no ground truth, so
``use_oad`` maps to the moments estimator; ``use_oad=false`` skips
correction entirely via the null estimator.  All errors come back as
JSON objects ``{"error": code, "detail": text}``.
"""

from __future__ import annotations

import re
import time
from pathlib import Path

from fastapi import FastAPI, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .bank import FeatureBank, load_bank
from .descriptor import DescriptorConfig, extract
from .errors import BankLoadFailureError, BindFailureError, RicbError
from .imaging import correct_orientation, decode_image, decode_image_bytes, png_bytes
from .orientation import EstimatorConfig, estimate
from .search import METRICS, top_k

_MOMENTS = EstimatorConfig(kind="moments")
_NULL = EstimatorConfig(kind="null")


def _error_code(exc: Exception) -> str:
    name = type(exc).__name__
    name = re.sub(r"Error$", "", name)
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def _error_json(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def create_app(bank: FeatureBank, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ricb", docs_url=None, redoc_url=None)

    @app.exception_handler(RicbError)
    async def _ricb_error(request: Request, exc: RicbError) -> JSONResponse:
        return _error_json(400, _error_code(exc), str(exc))

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error_json(400, "invalid_request", str(exc))

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception) -> JSONResponse:
        return _error_json(500, "internal", str(exc))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/bank/info")
    def bank_info() -> dict:
        return {
            "records": len(bank),
            "dim": bank.dim,
            "labels": len(set(bank.labels)),
            "descriptor_id": bank.descriptor_id,
            "oad_estimator": "moments",
        }

    @app.post("/query")
    def query(
        image: UploadFile,
        k: int = 20,
        metric: str = "euclidean",
        use_oad: bool = True,
    ) -> JSONResponse:
        if k < 1:
            return _error_json(400, "invalid_request", "k must be at least 1")
        if metric not in METRICS:
            return _error_json(
                400, "invalid_request", f"metric must be one of {', '.join(METRICS)}"
            )
        try:
            desc = DescriptorConfig.from_tag(bank.descriptor_id)
        except RicbError as exc:
            return _error_json(400, "descriptor_unsupported", str(exc))
        data = image.file.read()
        if not data:
            return _error_json(400, "invalid_request", "empty image upload")
        img = decode_image_bytes(data)
        t0 = time.perf_counter()
        angle = estimate(img, "query", _MOMENTS if use_oad else _NULL)
        upright = correct_orientation(img, angle)
        t1 = time.perf_counter()
        vec = extract(upright, desc)
        t2 = time.perf_counter()
        result = top_k(bank, vec, k, metric)
        t3 = time.perf_counter()
        hits = [
            {
                "id": h.id,
                "label": h.label,
                "distance": h.distance,
                "thumbnail_url": f"/image/{h.id}",
            }
            for h in result.hits
        ]
        return JSONResponse(
            {
                "predicted_angle_deg": angle,
                "hits": hits,
                "latency_ms": {
                    "orientation": (t1 - t0) * 1000.0,
                    "extraction": (t2 - t1) * 1000.0,
                    "scan": (t3 - t2) * 1000.0,
                },
            }
        )

    @app.get("/image/{record_id:path}")
    def image_by_id(record_id: str) -> Response:
        if record_id not in bank:
            return _error_json(404, "unknown_id", f"no record {record_id!r}")
        record = bank.lookup(record_id)
        if not record.source_path:
            return _error_json(404, "no_source", f"record {record_id!r} has no source file")
        try:
            img = decode_image(record.source_path)
        except FileNotFoundError as exc:
            return _error_json(404, "missing_file", str(exc))
        return Response(content=png_bytes(img), media_type="image/png")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")
    return app


def _split_listen(listen_address: str) -> tuple[str, int]:
    host, sep, port = listen_address.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"listen address must look like host:port, got {listen_address!r}")
    return host or "127.0.0.1", int(port)


def serve(
    bank_path: str | Path,
    listen_address: str = "127.0.0.1:8000",
    static_dir: str | Path | None = None,
) -> None:
    """Load the bank, then serve until terminated."""
    import uvicorn

    try:
        bank = load_bank(bank_path)
    except Exception as exc:
        raise BankLoadFailureError(f"could not load bank {bank_path}: {exc}") from exc
    host, port = _split_listen(listen_address)
    app = create_app(bank, static_dir=static_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        raise BindFailureError(f"could not bind {listen_address}: {exc}") from exc

"""Local JSON-over-HTTP service backing the interactive UI.

Images live in a content-addressed on-disk store (PDLAB_DATA_DIR); ids are
hashes of the uploaded bytes, job ids are hashes of (operation, image id,
parameters), so identical requests are idempotent and results are cached.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, UploadFile
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .denoise import DctThreshold, LearnedToy, PdConfig, pd_refine
from .estimate import DEFAULT_S_MAX, DEFAULT_TAU, adapt_stride, estimate_map_classical, estimate_map_learned
from .image import ImageError, load_image, save_image
from .noise import save_map_visualization

MAX_PIXELS = 16_000_000


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _default_data_dir() -> Path:
    env = os.environ.get("PDLAB_DATA_DIR")
    if env:
        return Path(env)
    return Path(tempfile.gettempdir()) / "pdlab-store"


def _job_id(op: str, image_id: str, params: dict) -> str:
    blob = f"{op}:{image_id}:{json.dumps(params, sort_keys=True)}".encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def create_app(data_dir=None, model_path=None, static_dir=None) -> FastAPI:
    store = Path(data_dir) if data_dir else _default_data_dir()
    store.mkdir(parents=True, exist_ok=True)
    model = None
    if model_path:
        from .nn.checkpoint import load_checkpoint

        model, _ = load_checkpoint(model_path)

    app = FastAPI(title="pdlab", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    def image_path(image_id: str) -> Path:
        path = store / f"{image_id}.png"
        if not path.is_file():
            raise ApiError(404, f"unknown image id {image_id}")
        return path

    def load_stored(image_id: str):
        return load_image(image_path(image_id))

    async def read_body(request: Request) -> dict:
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise ApiError(400, "request body must be JSON")
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be a JSON object")
        return body

    def require_image_id(body: dict) -> str:
        image_id = body.get("id")
        if not isinstance(image_id, str):
            raise ApiError(400, "missing image id")
        return image_id

    @app.post("/images")
    async def upload(file: UploadFile):
        blob = await file.read()
        from PIL import Image as PILImage
        from PIL import UnidentifiedImageError

        try:
            with PILImage.open(io.BytesIO(blob)) as probe:
                width, height = probe.size
        except UnidentifiedImageError:
            raise ApiError(400, "not a decodable image")
        if width * height > MAX_PIXELS:
            raise ApiError(413, f"image too large ({width}x{height}, cap {MAX_PIXELS} pixels)")
        image_id = "img-" + hashlib.sha256(blob).hexdigest()[:16]
        path = store / f"{image_id}.png"
        path.write_bytes(blob)
        try:
            img = load_image(path)
        except ImageError as exc:
            path.unlink(missing_ok=True)
            raise ApiError(400, str(exc))
        if blob[:8] != b"\x89PNG\r\n\x1a\n":
            save_image(img, path)  # normalize PPM/PGM uploads to PNG in the store
        return {
            "id": image_id,
            "width": img.width,
            "height": img.height,
            "channels": img.channels,
        }

    @app.get("/images/{image_id}")
    async def get_image(image_id: str):
        return FileResponse(image_path(image_id), media_type="image/png")

    @app.get("/results/{result_id}.png")
    async def get_result(result_id: str):
        return FileResponse(image_path(result_id), media_type="image/png")

    @app.post("/estimate")
    async def estimate(request: Request):
        body = await read_body(request)
        image_id = require_image_id(body)
        estimator = body.get("estimator", "classical")
        if estimator not in ("classical", "learned"):
            raise ApiError(400, f"unknown estimator {estimator!r}")
        if estimator == "learned" and model is None:
            raise ApiError(400, "service started without a model checkpoint")
        img = load_stored(image_id)
        job = _job_id("estimate", image_id, {"estimator": estimator})
        result_id = f"res-{job}"
        vis_path = store / f"{result_id}.png"
        nmap = (
            estimate_map_learned(img, model)
            if estimator == "learned"
            else estimate_map_classical(img)
        )
        if not vis_path.is_file():
            save_map_visualization(nmap, vis_path)
        return {
            "job": job,
            "image": image_id,
            "vis_result": result_id,
            "stats": {
                "awgn_mean": [round(float(c.mean()), 5) for c in nmap.awgn],
                "rvin_mean": [round(float(c.mean()), 5) for c in nmap.rvin],
            },
        }

    @app.post("/adapt")
    async def adapt(request: Request):
        body = await read_body(request)
        image_id = require_image_id(body)
        tau = body.get("tau", DEFAULT_TAU)
        smax = body.get("smax", DEFAULT_S_MAX)
        if not isinstance(tau, (int, float)) or tau <= 0:
            raise ApiError(400, "tau must be a positive number")
        if not isinstance(smax, int) or smax < 2:
            raise ApiError(400, "smax must be an integer >= 2")
        img = load_stored(image_id)
        job = _job_id("adapt", image_id, {"tau": tau, "smax": smax})
        try:
            result = adapt_stride(img, tau=tau, s_max=smax)
        except ImageError as exc:
            raise ApiError(400, str(exc))
        return {"job": job, "image": image_id, **result.to_json()}

    @app.post("/denoise")
    async def denoise(request: Request):
        body = await read_body(request)
        image_id = require_image_id(body)
        stride = body.get("stride", "auto")
        k = body.get("k", 0.0)
        denoiser = body.get("denoiser", "dct")
        mode = body.get("mode", "full")
        if stride != "auto" and not (isinstance(stride, int) and stride >= 1):
            raise ApiError(400, "stride must be 'auto' or an integer >= 1")
        if not isinstance(k, (int, float)) or not 0.0 <= k <= 1.0:
            raise ApiError(400, "k must be in [0,1]")
        if denoiser not in ("dct", "learned"):
            raise ApiError(400, f"unknown denoiser {denoiser!r}")
        if mode not in ("full", "i-only", "di-only"):
            raise ApiError(400, f"unknown mode {mode!r}")
        if denoiser == "learned" and model is None:
            raise ApiError(400, "service started without a model checkpoint")
        img = load_stored(image_id)
        params = {"stride": stride, "k": k, "denoiser": denoiser, "mode": mode}
        job = _job_id("denoise", image_id, params)
        result_id = f"res-{job}"
        result_path = store / f"{result_id}.png"
        cfg = PdConfig(
            stride_override=None if stride == "auto" else stride,
            k=float(k),
            denoiser=LearnedToy(model) if denoiser == "learned" else DctThreshold(),
            estimator="learned" if denoiser == "learned" else "classical",
            model=model if denoiser == "learned" else None,
            mode=mode,
        )
        try:
            out, report = pd_refine(img, cfg)
        except ImageError as exc:
            raise ApiError(400, str(exc))
        if not result_path.is_file():
            save_image(out, result_path)
        return {"job": job, "image": image_id, "result": result_id, "report": report}

    if static_dir is None:
        static_dir = os.environ.get("PDLAB_WEBUI_DIR")
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")

    return app

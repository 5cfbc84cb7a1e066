"""HTTP inference service.

Endpoints:

    GET  /api/health        liveness + which checkpoints are loaded
    POST /api/palettes      {text, count, seed?} -> palettes + attention
    POST /api/colorize      multipart image + palette JSON -> PNG
    GET  /api/gallery       newest-first listing of colorization results
    GET  /api/gallery/{id}  one gallery entry

Checkpoints load once at startup and are treated as immutable; model
inference is serialized so identical seeded requests return identical
bodies no matter how many arrive in parallel.  When a UI directory is
configured it is served statically at the root path.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import random
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError

from . import __version__
from .colorspace import Palette
from .errors import InputError
from .gallery import GalleryEntry, GalleryStore, new_entry_id, utc_now_iso
from .pcn import colorize_full
from .tpn import sample_palettes
from .training import load_pcn, load_tpn

DEFAULT_GALLERY = "gallery.jsonl"
DEFAULT_MAX_UPLOAD = 5 * 1024 * 1024  # bytes
MAX_COUNT = 20


def _file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _parse_palette_json(raw: str) -> Palette:
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"palette is not valid JSON: {exc.msg}") from exc
    try:
        return Palette.from_json_payload(payload)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid palette: {exc}") from exc


def create_app(
    tpn_path: str | Path | None = None,
    pcn_path: str | Path | None = None,
    gallery_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
) -> FastAPI:
    """Build the service; explicit arguments win over PF_* environment vars."""
    tpn_path = tpn_path or os.environ.get("PF_TPN_CKPT") or None
    pcn_path = pcn_path or os.environ.get("PF_PCN_CKPT") or None
    gallery_path = gallery_path or os.environ.get("PF_GALLERY_PATH") or DEFAULT_GALLERY

    tpn = load_tpn(tpn_path) if tpn_path else None
    pcn = load_pcn(pcn_path) if pcn_path else None
    pcn_hash = _file_sha256(pcn_path) if pcn_path else None
    gallery = GalleryStore(gallery_path)
    inference_lock = threading.Lock()

    app = FastAPI(title="paletteforge", version=__version__)

    @app.exception_handler(InputError)
    async def _input_error(request: Request, exc: InputError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "tpn_loaded": tpn is not None,
            "pcn_loaded": pcn is not None,
        }

    @app.post("/api/palettes")
    async def palettes_endpoint(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise HTTPException(status_code=400, detail="request body must be JSON")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="request body must be a JSON object")
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="'text' must be a non-empty string")
        count = body.get("count", 5)
        if not isinstance(count, int) or isinstance(count, bool) or not 1 <= count <= MAX_COUNT:
            raise HTTPException(
                status_code=400, detail=f"'count' must be an integer in [1, {MAX_COUNT}]"
            )
        seed = body.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise HTTPException(status_code=400, detail="'seed' must be an integer")
        if tpn is None:
            raise HTTPException(status_code=503, detail="no palette checkpoint loaded")
        if seed is None:
            seed = random.SystemRandom().randrange(2**31)

        with inference_lock:
            result = sample_palettes(tpn.model, tpn.vocab, text, count=count, seed=seed)
        return {
            "palettes": [
                {"lab": palette.to_json(), "hex": palette.hex_codes()}
                for palette in result.palettes
            ],
            "attention": result.attention.tolist(),
            "tokens": list(result.tokens),
            "seed": seed,
            "all_tokens_unknown": result.all_tokens_unknown,
        }

    @app.post("/api/colorize")
    async def colorize_endpoint(
        image: UploadFile = File(...),
        palette: str = Form(...),
        text: str | None = Form(None),
    ):
        raw = await image.read()
        if len(raw) > max_upload_bytes:
            raise HTTPException(
                status_code=413,
                detail=f"image exceeds the {max_upload_bytes} byte limit",
            )
        if pcn is None:
            raise HTTPException(status_code=503, detail="no colorization checkpoint loaded")
        parsed = _parse_palette_json(palette)
        try:
            with Image.open(io.BytesIO(raw)) as decoded:
                decoded.load()
                source = decoded.convert("RGB")
        except (UnidentifiedImageError, OSError) as exc:
            raise HTTPException(status_code=400, detail=f"cannot decode image: {exc}")

        with inference_lock:
            result = colorize_full(
                pcn.model, source, parsed, working_size=pcn.config.image_size
            )
        buffer = io.BytesIO()
        result.save(buffer, format="PNG")
        png = buffer.getvalue()

        entry_id = new_entry_id()
        image_name = gallery.save_image(entry_id, png)
        gallery.append(
            GalleryEntry(
                id=entry_id,
                timestamp=utc_now_iso(),
                text=text,
                palette=parsed.to_json(),
                image_path=image_name,
                checkpoint_hash=pcn_hash,
            )
        )
        return Response(content=png, media_type="image/png", headers={"X-Gallery-Id": entry_id})

    @app.get("/api/gallery")
    def gallery_listing():
        return {"entries": [entry.to_dict() for entry in gallery.entries()]}

    @app.get("/api/gallery/{entry_id}")
    def gallery_entry(entry_id: str):
        try:
            return gallery.get(entry_id).to_dict()
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no gallery entry {entry_id!r}")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app

"""HTTP interface over a registry: system listing and upload, combination
queries, and pairwise bucket heatmaps. Backs the combination-exploration UI.

Responses are pure functions of (registry state, checkpoint, request); an
in-memory memo keyed by the canonical request body short-circuits repeated
combine queries and is dropped whenever a system is registered.
"""

import json

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .model import CHECKPOINT_FORMAT
from .registry import METHODS, Registry


def create_app(registry_root) -> FastAPI:
    app = FastAPI(title="nerspan registry", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.registry = Registry.load(registry_root)
    app.state.memo = {}

    def registry() -> Registry:
        return app.state.registry

    @app.get("/health")
    def health():
        reg = registry()
        return {
            "status": "ok",
            "service": "nerspan",
            "version": __version__,
            "checkpoint_format": CHECKPOINT_FORMAT,
            "systems": len(reg.entries),
            "has_checkpoint": reg.checkpoint_file is not None,
        }

    @app.get("/systems")
    def list_systems():
        reg = registry()
        return {
            "corpus": reg.corpus_file,
            "train_corpus": reg.train_file,
            "checkpoint": reg.checkpoint_file,
            "methods": list(METHODS),
            "systems": [e.to_dict() for e in reg.entries],
        }

    @app.post("/systems", status_code=201)
    async def upload_system(name: str = Form(...), file: UploadFile = File(...)):
        reg = registry()
        text = (await file.read()).decode("utf-8")
        try:
            entry = reg.register(name, text)
        except ValueError as exc:
            status = 409 if "already registered" in str(exc) else 400
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        app.state.memo.clear()
        return {"registered": entry.to_dict(),
                "systems": [e.to_dict() for e in reg.entries]}

    @app.post("/combine")
    def combine(request: dict):
        method = request.get("method")
        systems = request.get("systems")
        interval = request.get("interval")
        include_spans = bool(request.get("include_spans", False))
        key = json.dumps(
            {"method": method, "systems": systems, "interval": interval,
             "include_spans": include_spans},
            sort_keys=True,
        )
        if key in app.state.memo:
            return app.state.memo[key]
        try:
            response = registry().combine(
                method, systems=systems, interval=interval,
                include_spans=include_spans,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        app.state.memo[key] = response
        return response

    @app.get("/buckets")
    def buckets(attr: str, a: str, b: str):
        try:
            return registry().bucket_diff(attr, a, b)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    return app


def serve(registry_root, host: str = "127.0.0.1", port: int = 8570) -> None:
    import uvicorn

    uvicorn.run(create_app(registry_root), host=host, port=port)

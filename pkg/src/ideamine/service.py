"""HTTP API over the engine plus static hosting for the web console.

Endpoints are JSON except the per-run event stream, which is server-sent
events so progress can be watched with curl or an EventSource.
"""

from __future__ import annotations

import json
import mimetypes
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    EngineError,
    NotFound,
    PreconditionError,
    UnknownIdeaId,
    ValidationError,
    WrongState,
)
from .runs import Engine

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>ideamine</title></head>
<body><h1>ideamine</h1>
<p>The API is up. UI assets were not found; build the frontend and restart
with --ui pointing at its dist directory.</p></body></html>
"""


def _error_response(e: Exception):
    if isinstance(e, ValidationError):
        return JSONResponse(
            status_code=400,
            content={"errors": [{"field": f, "message": m} for f, m in e.errors]},
        )
    if isinstance(e, NotFound):
        return JSONResponse(status_code=404, content={"error": str(e)})
    if isinstance(e, WrongState):
        return JSONResponse(status_code=409, content={"error": str(e)})
    if isinstance(e, (UnknownIdeaId, PreconditionError)):
        return JSONResponse(status_code=400, content={"error": str(e)})
    return JSONResponse(status_code=500, content={"error": str(e)})


def create_app(engine: Engine, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ideamine")

    @app.get("/api/health")
    def health():
        reports = engine.gateway.health()
        return {
            "status": "ok",
            "backends": {name: r.to_dict() for name, r in reports.items()},
        }

    @app.post("/api/runs", status_code=201)
    def create_run(request: dict = Body(...)):
        try:
            record = engine.create_run(request)
        except EngineError as e:
            return _error_response(e)
        return record.to_dict()

    @app.get("/api/runs")
    def list_runs():
        return {"runs": [r.to_dict() for r in engine.list_runs()]}

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        try:
            record = engine.get_run(run_id)
        except EngineError as e:
            return _error_response(e)
        return record.to_dict()

    @app.post("/api/runs/{run_id}/select")
    def select_ideas(run_id: str, payload: dict = Body(...)):
        idea_ids = payload.get("idea_ids")
        if not isinstance(idea_ids, list) or not idea_ids:
            return _error_response(
                ValidationError([("idea_ids", "required non-empty list")])
            )
        try:
            record = engine.select_ideas(run_id, [str(i) for i in idea_ids])
        except EngineError as e:
            return _error_response(e)
        return record.to_dict()

    @app.post("/api/runs/{run_id}/followup")
    def followup(run_id: str, payload: dict = Body(...)):
        question = payload.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error_response(
                ValidationError([("question", "required non-empty string")])
            )
        try:
            return engine.followup(run_id, question)
        except EngineError as e:
            return _error_response(e)

    @app.get("/api/runs/{run_id}/events")
    def events(run_id: str, offset: int = 0):
        try:
            engine.get_run(run_id)
        except EngineError as e:
            return _error_response(e)

        def stream():
            for event in engine.stream_events(run_id, offset=offset):
                data = json.dumps(event, sort_keys=True, ensure_ascii=False)
                yield f"id: {event['seq']}\ndata: {data}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/api/runs/{run_id}/artifacts/{path:path}")
    def artifact(run_id: str, path: str):
        try:
            file_path = engine.store.artifact_path(run_id, path)
        except EngineError as e:
            return _error_response(e)
        media_type = mimetypes.guess_type(file_path.name)[0] or "application/octet-stream"
        if file_path.suffix in (".json", ".ndjson"):
            media_type = "application/json" if file_path.suffix == ".json" else "application/x-ndjson"
        elif file_path.suffix == ".md":
            media_type = "text/markdown"
        return FileResponse(file_path, media_type=media_type)

    @app.post("/api/corpus/ingest")
    def ingest(payload: dict = Body(default={})):
        try:
            store = engine.ingest_corpus(payload.get("source_dir"))
        except EngineError as e:
            return _error_response(e)
        return {"chunks": store.size, "documents": len({c.doc_id for c in store.chunks})}

    ui_path = Path(ui_dir) if ui_dir else None
    if ui_path and ui_path.is_dir():
        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def root():
            return _FALLBACK_PAGE

    return app

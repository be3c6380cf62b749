"""HTTP API over the session store.

Every error body is ``{"code": <name>, "message": <text>}``: 404 for unknown
sessions, 409 for sessions whose automatic phase has not finished, 422 for
invalid inputs or operations that cannot produce a result.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError

from .errors import SessionNotFoundError, TsxplainError
from .session import (
    Session,
    SessionStore,
    _jsonable,
    describe_sample,
    run_automatic_phase,
    run_counterfactual,
    run_neighbors,
    run_whatif,
    visible_cells,
)
from .whatif import parse_edit


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _json_response(doc, status: int = 200) -> Response:
    body = json.dumps(doc, default=_jsonable, allow_nan=False)
    return Response(content=body, status_code=status, media_type="application/json")


def _error(status: int, code: str, message: str) -> Response:
    return _json_response({"code": code, "message": message}, status=status)


def create_app(store_root: str, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="tsxplain", docs_url=None, redoc_url=None)
    app.state.store = SessionStore(store_root)
    app.state.executor = ThreadPoolExecutor(max_workers=os.cpu_count() or 2)
    app.state.sessions = {}  # id -> Session, shared so fitted caches persist

    def get_session(session_id: str) -> Session:
        cached = app.state.sessions.get(session_id)
        if cached is not None:
            return cached
        session = app.state.store.load(session_id)
        app.state.sessions[session_id] = session
        return session

    def require_done(session: Session) -> None:
        status = session.status()
        if status["state"] != "done":
            raise ApiError(
                409,
                "SessionNotReady",
                f"session is {status['state']} (stage {status['stage']})",
            )

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return _error(exc.status, exc.code, exc.message)

    @app.exception_handler(SessionNotFoundError)
    async def _not_found(request: Request, exc: SessionNotFoundError):
        return _error(404, "SessionNotFound", str(exc))

    @app.exception_handler(FileNotFoundError)
    async def _file_missing(request: Request, exc: FileNotFoundError):
        return _error(422, "FileNotFound", str(exc))

    @app.exception_handler(TsxplainError)
    async def _domain_error(request: Request, exc: TsxplainError):
        return _error(422, type(exc).__name__, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return _error(422, "ValidationError", str(exc.errors()))

    @app.post("/api/sessions")
    def create_session(config: dict):
        session = app.state.store.create(config)
        app.state.sessions[session.id] = session
        app.state.executor.submit(run_automatic_phase, session)
        return _json_response({"id": session.id, "state": "pending"}, status=201)

    @app.get("/api/sessions")
    def list_sessions():
        rows = []
        for session in app.state.store.list():
            status = session.status()
            rows.append(
                {"id": session.id, "state": status["state"], "stage": status["stage"]}
            )
        return _json_response({"sessions": rows})

    @app.get("/api/sessions/{session_id}/status")
    def session_status(session_id: str):
        return _json_response(get_session(session_id).status())

    @app.get("/api/sessions/{session_id}/ranking")
    def session_ranking(session_id: str):
        session = get_session(session_id)
        require_done(session)
        return _json_response(session.artifact("ranking"))

    @app.get("/api/sessions/{session_id}/projections")
    def session_projections(session_id: str):
        session = get_session(session_id)
        require_done(session)
        preds = session.artifact("predictions")
        doc = dict(session.artifact("projections"))
        doc["samples"] = {
            "labels": preds["labels"],
            "preds": preds["preds"],
            "confusion": preds["confusion"],
            "color_index": preds["color_index"],
            "origin_split": preds["origin_split"],
            "class_count": preds["class_count"],
        }
        return _json_response(doc)

    @app.get("/api/sessions/{session_id}/samples/{index}")
    def session_sample(session_id: str, index: int):
        session = get_session(session_id)
        require_done(session)
        return _json_response(describe_sample(session, index))

    @app.get("/api/sessions/{session_id}/neighbors")
    def session_neighbors(
        session_id: str, idx: int, space: str = "euclidean", k: int = 5
    ):
        session = get_session(session_id)
        require_done(session)
        if k < 1:
            raise ApiError(422, "InvalidParams", "k must be >= 1")
        return _json_response(run_neighbors(session, idx, space, k))

    @app.post("/api/sessions/{session_id}/whatif")
    def session_whatif(session_id: str, body: dict):
        session = get_session(session_id)
        require_done(session)
        if "base" not in body or "edits" not in body:
            raise ApiError(422, "InvalidParams", "body needs 'base' and 'edits'")
        base = body["base"]
        if isinstance(base, bool) or not isinstance(base, (int, list)):
            raise ApiError(422, "InvalidParams", "'base' must be an index or a series")
        if isinstance(base, list) and not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in base
        ):
            raise ApiError(422, "InvalidParams", "'base' series must be numeric")
        if not isinstance(body["edits"], list):
            raise ApiError(422, "InvalidParams", "'edits' must be a list")
        edits = [parse_edit(e) for e in body["edits"]]
        return _json_response(run_whatif(session, base, edits))

    @app.post("/api/sessions/{session_id}/counterfactual")
    def session_counterfactual(session_id: str, body: dict):
        session = get_session(session_id)
        require_done(session)
        idx = body.get("idx")
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise ApiError(422, "InvalidParams", "body needs an integer 'idx'")
        method = body.get("method", "native")
        return _json_response(run_counterfactual(session, idx, method))

    @app.get("/api/sessions/{session_id}/cells")
    def session_cells(session_id: str):
        session = get_session(session_id)
        require_done(session)
        return _json_response({"cells": visible_cells(session)})

    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app

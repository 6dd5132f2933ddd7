"""HTTP front door for dynamic elicitation sessions.

Sessions live in process memory and carry no authentication: the
service is a desk tool, one operator at a time per session.  A
session accepts at most one in-flight submission; a second concurrent
submission is turned away with a `busy` conflict rather than queued.
"""

from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .fixtures import load_fixture
from .instance import InstanceError, parse_instance
from .mechanisms import EmptyMenuError
from .session import (
    DynamicSession,
    RankingRejectedError,
    SessionCompleteError,
    SessionIncompleteError,
    WrongTurnError,
)


class CreateSession(BaseModel, extra="forbid"):
    fixture: str | None = None
    instance: dict[str, Any] | None = None
    disclosure: str = "full"


class SubmitRanking(BaseModel, extra="forbid"):
    officer_id: str
    ranking: list[str]


class _Entry:
    def __init__(self, session: DynamicSession):
        self.session = session
        self.lock = threading.Lock()


def _conflict(status: int, code: str, message: str, **extra: Any) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"code": code, "message": message, **extra}
    )


def _state_payload(session: DynamicSession) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "session_id": session.id,
        "status": session.status,
        "round": session.round,
        "committed": session.committed(),
        "view": None,
        "allocation": None,
    }
    if session.complete:
        payload["allocation"] = dict(session.allocation().items)
    else:
        payload["view"] = session.view().payload()
    return payload


def create_app() -> FastAPI:
    app = FastAPI(title="fairalloc session service")
    # the console is usually served from a different local port
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, _Entry] = {}
    app.state.sessions = sessions

    @app.post("/sessions", status_code=201)
    def create(body: CreateSession) -> Any:
        if (body.fixture is None) == (body.instance is None):
            return _conflict(
                422,
                "bad_request",
                "provide exactly one of fixture or instance",
            )
        try:
            doc = (
                load_fixture(body.fixture)
                if body.fixture is not None
                else parse_instance(body.instance)
            )
            session = DynamicSession(doc, disclosure=body.disclosure)
        except (InstanceError, ValueError) as exc:
            return _conflict(422, "bad_instance", str(exc))
        sessions[session.id] = _Entry(session)
        try:
            return _state_payload(session)
        except EmptyMenuError as exc:
            return _conflict(409, "empty_menu", str(exc))

    @app.get("/sessions/{session_id}")
    def show(session_id: str) -> Any:
        entry = sessions.get(session_id)
        if entry is None:
            return _conflict(404, "unknown_session", f"no session {session_id!r}")
        return _state_payload(entry.session)

    @app.post("/sessions/{session_id}/rankings")
    def submit(session_id: str, body: SubmitRanking) -> Any:
        entry = sessions.get(session_id)
        if entry is None:
            return _conflict(404, "unknown_session", f"no session {session_id!r}")
        if not entry.lock.acquire(blocking=False):
            return _conflict(
                409, "busy", "another submission is in flight for this session"
            )
        try:
            session = entry.session
            try:
                result = session.submit(body.officer_id, body.ranking)
            except SessionCompleteError as exc:
                return _conflict(409, exc.code, str(exc))
            except WrongTurnError as exc:
                return _conflict(409, exc.code, str(exc), expected=exc.expected)
            except RankingRejectedError as exc:
                return _conflict(422, exc.code, str(exc), menu=list(exc.menu))
            except EmptyMenuError as exc:
                return _conflict(409, "empty_menu", str(exc))
            payload = dict(result)
            payload["session_id"] = session.id
            payload["allocation"] = (
                dict(session.allocation().items) if session.complete else None
            )
            try:
                payload["view"] = (
                    None if session.complete else session.view().payload()
                )
            except EmptyMenuError as exc:
                return _conflict(409, "empty_menu", str(exc))
            return payload
        finally:
            entry.lock.release()

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str) -> Any:
        entry = sessions.get(session_id)
        if entry is None:
            return _conflict(404, "unknown_session", f"no session {session_id!r}")
        try:
            run_report = entry.session.report()
        except SessionIncompleteError as exc:
            return _conflict(409, exc.code, str(exc))
        return Response(
            content=run_report.to_json(), media_type="application/json"
        )

    @app.get("/fixtures")
    def fixtures() -> Any:
        from .fixtures import fixture_names

        return {"fixtures": fixture_names()}

    @app.get("/fixtures/{name}")
    def fixture(name: str) -> Any:
        from .fixtures import fixture_text

        try:
            return Response(
                content=fixture_text(name), media_type="application/json"
            )
        except InstanceError as exc:
            return _conflict(404, "unknown_fixture", str(exc))

    return app


app = create_app()


def serve(host: str = "127.0.0.1", port: int = 8008) -> None:
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")

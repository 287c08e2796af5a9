"""HTTP + websocket API over the session engine.

Mode gating summary (rejections are 403):
  GET  /sessions/{id}/policy   human-led-mod, ai-led-mod, static-interpretable
  PUT  /sessions/{id}/policy   human-led-mod, between episodes only
  POST /sessions/{id}/optimize ai-led-mod, after >= 1 completed episode
Everything else is mode-independent. Conflicting phases return 409.
"""

from __future__ import annotations

import asyncio
import json
import os

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from ..env.layout import Layout, builtin_layout, builtin_layout_names
from ..policy import (
    DepthLimitExceeded,
    InvalidProbs,
    SchemaError,
    StaleParent,
    UnknownNode,
    serialize,
)
from .config import ServiceConfig
from .registry import NoPretrainedPolicy, PolicyRegistry
from .schemas import (
    CreateSessionRequest,
    EditRequest,
    EpisodeStartResponse,
    LayoutView,
    OptimizeStartResponse,
    OptimizeStatus,
    PolicyResponse,
    SessionView,
)
from .sessions import Session, SessionError, SessionManager

EDIT_ERRORS = (DepthLimitExceeded, UnknownNode, InvalidProbs, SchemaError, StaleParent)


def _doc_payload(doc) -> dict:
    return json.loads(serialize(doc).decode())


def _session_view(s: Session) -> SessionView:
    return SessionView(
        id=s.id, mode=s.mode, tutorial=s.tutorial, layout=s.layout.name, human_seat=s.human_seat,
        iteration=min(s.iteration, s.max_iterations), max_iterations=s.max_iterations,
        phase=s.phase, episodes_completed=s.episodes_completed,
        policy_hash=s.doc.hash if s.doc is not None else None,
        can_view_policy=s.can_view_policy, can_edit_policy=s.can_edit_policy,
    )


def _layout_view(layout: Layout) -> LayoutView:
    return LayoutView(
        name=layout.name, grid=list(layout.grid),
        shared_counters=[list(p) for p in sorted(layout.shared_counters)],
        cook_time=layout.cook_time, horizon=layout.horizon,
        recipes={",".join(k): v for k, v in sorted(layout.recipe_table.items())},
    )


def create_app(cfg: ServiceConfig | None = None) -> FastAPI:
    cfg = cfg or ServiceConfig.load()
    registry = PolicyRegistry(cfg.registry_path)
    manager = SessionManager(cfg, registry)
    app = FastAPI(title="treechef teaming service")
    app.state.cfg = cfg
    app.state.registry = registry
    app.state.manager = manager

    @app.exception_handler(SessionError)
    async def session_error(_, exc: SessionError):
        return JSONResponse(status_code=exc.status, content={"error": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    if cfg.ui_dir and os.path.isdir(cfg.ui_dir):
        app.mount("/ui", StaticFiles(directory=cfg.ui_dir, html=True), name="ui")

    @app.get("/layouts")
    def layouts():
        return {"layouts": list(builtin_layout_names())}

    @app.get("/layouts/{name}")
    def layout_view(name: str):
        try:
            return _layout_view(builtin_layout(name))
        except KeyError:
            return JSONResponse(status_code=404, content={"error": f"unknown layout {name!r}"})

    @app.post("/sessions", response_model=SessionView)
    def create_session(req: CreateSessionRequest):
        try:
            layout = builtin_layout(req.layout)
        except KeyError:
            raise SessionError(404, f"unknown layout {req.layout!r}") from None
        try:
            session = manager.create(req.mode, layout, req.human_seat, req.seed,
                                     tutorial=req.tutorial)
        except NoPretrainedPolicy as exc:
            raise SessionError(409, str(exc)) from None
        return _session_view(session)

    @app.get("/sessions/{sid}", response_model=SessionView)
    def get_session(sid: str):
        return _session_view(manager.get(sid))

    @app.get("/sessions/{sid}/layout", response_model=LayoutView)
    def session_layout(sid: str):
        return _layout_view(manager.get(sid).layout)

    @app.get("/sessions/{sid}/policy", response_model=PolicyResponse)
    def get_policy(sid: str):
        doc = manager.get(sid).view_policy()
        return PolicyResponse(document=_doc_payload(doc))

    @app.put("/sessions/{sid}/policy", response_model=PolicyResponse)
    def put_policy(sid: str, req: EditRequest):
        session = manager.get(sid)
        try:
            doc = session.submit_edit(req.ops, req.parent_hash)
        except StaleParent as exc:
            raise SessionError(409, str(exc)) from None
        except EDIT_ERRORS as exc:
            raise SessionError(422, f"{type(exc).__name__}: {exc}") from None
        return PolicyResponse(document=_doc_payload(doc))

    @app.post("/sessions/{sid}/episodes", response_model=EpisodeStartResponse)
    def start_episode(sid: str):
        session = manager.get(sid)
        episode_id = session.start_episode()
        return EpisodeStartResponse(
            episode_id=episode_id,
            socket_path=f"/sessions/{sid}/episodes/{episode_id}/ws",
            tick_rate=cfg.tick_rate,
            horizon=session.layout.horizon,
        )

    @app.websocket("/sessions/{sid}/episodes/{episode_id}/ws")
    async def episode_ws(websocket: WebSocket, sid: str, episode_id: int):
        try:
            session = manager.get(sid)
        except SessionError:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        try:
            await session.run_episode_ws(websocket, episode_id)
        except SessionError as exc:
            await websocket.send_json({"type": "error", "error": str(exc)})
        except WebSocketDisconnect:
            pass
        finally:
            try:
                await websocket.close()
            except Exception:
                pass

    @app.post("/sessions/{sid}/optimize", response_model=OptimizeStartResponse, status_code=202)
    async def optimize(sid: str):
        session = manager.get(sid)
        job = session.start_optimize()
        asyncio.get_running_loop().run_in_executor(None, session.run_optimize_job, job)
        return OptimizeStartResponse(job_id=job.id, status="running")

    @app.get("/sessions/{sid}/optimize/status", response_model=OptimizeStatus)
    def optimize_status(sid: str):
        session = manager.get(sid)
        job = session.job
        if job is None:
            raise SessionError(404, "no optimization job")
        return OptimizeStatus(job_id=job.id, status=job.status, progress=job.progress,
                              detail=job.detail, accepted=job.accepted)

    @app.get("/sessions/{sid}/optimize/events")
    async def optimize_events(sid: str):
        session = manager.get(sid)
        job = session.job
        if job is None:
            raise SessionError(404, "no optimization job")

        async def stream():
            sent = 0
            while True:
                while sent < len(job.events):
                    yield f"data: {json.dumps(job.events[sent])}\n\n"
                    sent += 1
                if job.status != "running" and sent >= len(job.events):
                    return
                await asyncio.sleep(0.05)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app

"""HTTP surface of the sandbox: sessions, tool calls, logs, replay and the schema registry."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from graphsim import __version__, registry
from graphsim.core import plain
from graphsim.errors import GraphSimError
from graphsim.sandbox import Sandbox

STATUS_FOR_CODE = {
    "invalid_argument": 400,
    "unknown_operation": 400,
    "not_found": 404,
    "session_not_found": 404,
    "conflict": 409,
}


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    session_ttl: float | None = None
    log_dir: str | None = None

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict[str, str] | None = None) -> ServiceConfig:
        """JSON file first, then GRAPHSIM_HOST / _PORT / _SESSION_TTL / _LOG_DIR override it."""
        env = os.environ if env is None else env
        doc: dict[str, Any] = {}
        if path:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for name in known:
            raw = env.get(f"GRAPHSIM_{name.upper()}")
            if raw is not None:
                doc[name] = raw
        cfg = cls(**doc)
        cfg.port = int(cfg.port)
        if cfg.session_ttl in ("", None):
            cfg.session_ttl = None
        else:
            cfg.session_ttl = float(cfg.session_ttl)
        return cfg


def _json(payload: Any, status: int = 200) -> JSONResponse:
    return JSONResponse(plain(payload), status_code=status)


def _error(exc: GraphSimError) -> JSONResponse:
    return _json(exc.to_result(), STATUS_FOR_CODE.get(exc.code, 400))


def create_app(sandbox: Sandbox | None = None, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    sandbox = sandbox or Sandbox(log_dir=config.log_dir, session_ttl=config.session_ttl)
    app = FastAPI(title="graphsim", version=__version__)
    app.state.sandbox = sandbox

    @app.exception_handler(GraphSimError)
    async def _handle(request: Request, exc: GraphSimError):
        return _error(exc)

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(sandbox), "version": __version__}

    @app.get("/schemas")
    def schemas():
        return registry.export_schemas()

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        snapshot = body.get("snapshot", body)
        gid = sandbox.create_session(snapshot, body.get("graph_id") if "snapshot" in body else None)
        return {"status": "ok", "graph_id": gid}

    @app.post("/call")
    def call(body: dict = Body(...)):
        """Function-calling entry point: {"name": ..., "arguments": {"graph_id": ..., ...}}."""
        name = body.get("name")
        args = body.get("arguments", body.get("args", {}))
        if not isinstance(name, str) or not isinstance(args, dict):
            return _json({"status": "error", "error": {"code": "invalid_argument",
                                                       "message": "body needs a string name and an arguments object"}},
                         400)
        gid = args.get("graph_id")
        if not isinstance(gid, str):
            return _json({"status": "error", "error": {"code": "invalid_argument",
                                                       "message": "arguments.graph_id is required"}}, 400)
        sandbox.session(gid)  # 404 before anything is logged
        result = sandbox.call(gid, name, args)
        status = 200 if result["status"] == "ok" else STATUS_FOR_CODE.get(result["error"]["code"], 400)
        return _json(result, status)

    @app.get("/sessions/{graph_id}/log")
    def get_log(graph_id: str):
        return {"status": "ok", "entries": [e.to_dict() for e in sandbox.get_log(graph_id)]}

    @app.post("/sessions/{graph_id}/replay")
    def replay_verify(graph_id: str):
        return {"status": "ok", **sandbox.replay_verify(graph_id).to_dict()}

    @app.get("/sessions/{graph_id}/snapshot")
    def snapshot(graph_id: str):
        g = sandbox.export_snapshot(graph_id)
        return {"status": "ok", "graph_id": graph_id, "snapshot": g.to_dict(),
                "state_hash": sandbox.state_hash(graph_id).hex()}

    @app.delete("/sessions/{graph_id}")
    def drop(graph_id: str):
        return sandbox.drop_session(graph_id)

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config=config), host=config.host, port=config.port, log_level="info")


"""Session-isolated sandbox with an append-only operation log and replay verification."""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator

from graphsim import registry
from graphsim.core import PropertyGraph, StateHash, canonical_json, dump_snapshot, plain, state_hash
from graphsim.errors import InvalidArgument, SessionNotFound, ValidationError

logger = logging.getLogger(__name__)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


def new_graph_id() -> str:
    return str(uuid.uuid4())


class FifoLock:
    """Reentrant lock that admits waiting threads strictly in arrival order."""

    def __init__(self) -> None:
        self._cond = threading.Condition(threading.Lock())
        self._queue: deque[object] = deque()
        self._owner: int | None = None
        self._depth = 0

    def acquire(self) -> None:
        me = threading.get_ident()
        with self._cond:
            if self._owner == me:
                self._depth += 1
                return
            ticket = object()
            self._queue.append(ticket)
            while self._owner is not None or self._queue[0] is not ticket:
                self._cond.wait()
            self._queue.popleft()
            self._owner = me
            self._depth = 1

    def release(self) -> None:
        with self._cond:
            if self._owner != threading.get_ident():
                raise RuntimeError("release of a lock not held by this thread")
            self._depth -= 1
            if self._depth == 0:
                self._owner = None
                self._cond.notify_all()

    def __enter__(self) -> FifoLock:
        self.acquire()
        return self

    def __exit__(self, *exc: object) -> None:
        self.release()


@dataclass(frozen=True)
class OpLogEntry:
    seq: int
    name: str
    args: dict[str, Any]
    result: dict[str, Any]
    timestamp: str

    @property
    def ok(self) -> bool:
        return self.result.get("status") == "ok"

    def to_line(self) -> str:
        """One log line with fields in the fixed order seq, timestamp, name, args, result."""
        return (
            f'{{"seq":{self.seq},"timestamp":{json.dumps(self.timestamp)},"name":{json.dumps(self.name)},'
            f'"args":{canonical_json(self.args)},"result":{canonical_json(self.result)}}}'
        )

    def to_dict(self) -> dict[str, Any]:
        return {"seq": self.seq, "timestamp": self.timestamp, "name": self.name,
                "args": self.args, "result": self.result}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> OpLogEntry:
        return cls(int(doc["seq"]), doc["name"], plain(doc.get("args") or {}), plain(doc["result"]),
                   doc.get("timestamp", ""))


class OpLog:
    """Gap-free, append-only sequence of entries, optionally mirrored to a file."""

    def __init__(self, path: Path | None = None) -> None:
        self._entries: list[OpLogEntry] = []
        self.path = path

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[OpLogEntry]:
        return iter(list(self._entries))

    def entries(self) -> list[OpLogEntry]:
        return list(self._entries)

    def append(self, name: str, args: dict[str, Any], result: dict[str, Any]) -> OpLogEntry:
        entry = OpLogEntry(len(self._entries) + 1, name, args, result, utc_now())
        self._entries.append(entry)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(entry.to_line() + "\n")
        return entry


def read_log(path: str | Path) -> list[OpLogEntry]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [OpLogEntry.from_dict(json.loads(line)) for line in lines if line.strip()]


def write_log(entries: Iterable[OpLogEntry], path: str | Path) -> None:
    Path(path).write_text("".join(e.to_line() + "\n" for e in entries), encoding="utf-8")


@dataclass
class Session:
    id: str
    snapshot: PropertyGraph
    graph: PropertyGraph
    log: OpLog
    created_at: str = field(default_factory=utc_now)
    last_used: float = field(default_factory=time.monotonic)
    lock: FifoLock = field(default_factory=FifoLock, repr=False)


@dataclass
class ReplayReport:
    ok: bool
    first_divergence: int | None
    expected_hash: StateHash
    actual_hash: StateHash
    per_entry_result_match: list[bool]

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "first_divergence": self.first_divergence,
            "expected_hash": self.expected_hash.hex(),
            "actual_hash": self.actual_hash.hex(),
            "per_entry_result_match": list(self.per_entry_result_match),
        }


def replay(snapshot: PropertyGraph, entries: Iterable[OpLogEntry], expected: StateHash | None = None) -> ReplayReport:
    """Re-execute logged calls on a fresh copy of ``snapshot`` and compare results and final state.

    Without ``expected`` only per-entry results are checked and the replayed hash is reported on both sides.
    """
    graph = snapshot.copy()
    matches = []
    first = None
    for entry in entries:
        graph, _, _, result = registry.execute(graph, entry.name, entry.args)
        same = canonical_json(result) == canonical_json(entry.result)
        matches.append(same)
        if not same and first is None:
            first = entry.seq
    actual = state_hash(graph)
    expected = actual if expected is None else expected
    return ReplayReport(first is None and actual == expected, first, expected, actual, matches)


class Sandbox:
    """Registry of live sessions keyed by graph id.

    Calls on one session are serialized first-come first-served; different
    sessions run in parallel. With ``log_dir`` set each session also writes an
    append-only ``<graph_id>.jsonl`` log next to its ``<graph_id>.snapshot.json``.
    """

    def __init__(self, log_dir: str | Path | None = None, session_ttl: float | None = None) -> None:
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.log_dir = Path(log_dir) if log_dir else None
        self.session_ttl = session_ttl
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)

    def __contains__(self, graph_id: str) -> bool:
        return graph_id in self._sessions

    def __len__(self) -> int:
        return len(self._sessions)

    def session_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)

    # -- lifecycle ---------------------------------------------------------

    def create_session(self, snapshot: PropertyGraph | dict, graph_id: str | None = None) -> str:
        if not isinstance(snapshot, PropertyGraph):
            snapshot = PropertyGraph.from_dict(snapshot)
        problems = snapshot.integrity_violations()
        if problems:
            raise ValidationError(problems)
        self.expire_idle()
        with self._lock:
            if graph_id is None:
                graph_id = new_graph_id()
                while graph_id in self._sessions:
                    graph_id = new_graph_id()
            elif graph_id in self._sessions:
                raise InvalidArgument(f"graph id already live: {graph_id}")
            log_path = None
            if self.log_dir:
                log_path = self.log_dir / f"{graph_id}.jsonl"
                dump_snapshot(snapshot, self.log_dir / f"{graph_id}.snapshot.json")
            frozen = snapshot.copy()
            self._sessions[graph_id] = Session(graph_id, frozen, frozen.copy(), OpLog(log_path))
        logger.debug("session %s created (%d nodes, %d edges)", graph_id, len(snapshot.nodes), len(snapshot.edges))
        return graph_id

    def drop_session(self, graph_id: str) -> dict[str, Any]:
        with self._lock:
            if graph_id not in self._sessions:
                raise SessionNotFound(f"session not found: {graph_id}", graph_id=graph_id)
            del self._sessions[graph_id]
        return {"status": "ok", "dropped": graph_id}

    def expire_idle(self) -> list[str]:
        if not self.session_ttl:
            return []
        cutoff = time.monotonic() - self.session_ttl
        with self._lock:
            stale = [gid for gid, s in self._sessions.items() if s.last_used < cutoff]
            for gid in stale:
                del self._sessions[gid]
        return stale

    def session(self, graph_id: str) -> Session:
        try:
            return self._sessions[graph_id]
        except KeyError:
            raise SessionNotFound(f"session not found: {graph_id}", graph_id=graph_id) from None

    @contextmanager
    def hold(self, graph_id: str) -> Iterator[Session]:
        """Hold a session exclusively across several calls (the lock is reentrant)."""
        session = self.session(graph_id)
        with session.lock:
            yield session

    # -- execution ---------------------------------------------------------

    def call(self, graph_id: str, name: str, args: dict[str, Any] | None = None) -> dict[str, Any]:
        """Execute one operation atomically and log it, whether it succeeds or fails."""
        session = self.session(graph_id)
        with session.lock:
            graph, logged_name, logged_args, result = registry.execute(session.graph, name, args or {})
            session.graph = graph
            session.log.append(logged_name, logged_args, result)
            session.last_used = time.monotonic()
        return result

    def get_log(self, graph_id: str) -> list[OpLogEntry]:
        return self.session(graph_id).log.entries()

    def export_snapshot(self, graph_id: str) -> PropertyGraph:
        session = self.session(graph_id)
        with session.lock:
            return session.graph.copy()

    def state_hash(self, graph_id: str) -> StateHash:
        session = self.session(graph_id)
        with session.lock:
            return state_hash(session.graph)

    def replay_verify(self, graph_id: str) -> ReplayReport:
        session = self.session(graph_id)
        with session.lock:
            entries = session.log.entries()
            expected = state_hash(session.graph)
        return replay(session.snapshot, entries, expected)


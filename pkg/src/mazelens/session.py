"""Session state and persistence.

A session is a directory holding maze text files and classification
JSON documents, with in-memory registries layered on top for traces
(too big to persist) and per-classification undo stacks. Writers on one
session are serialized by a lock; different sessions never share state.
"""

from __future__ import annotations

import json
import shutil
import threading
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from . import maze as maze_mod
from .analysis import pixels
from .errors import ConflictError, FormatError, NotFoundError
from .nn.network import ActivationTrace

BUNDLE_VERSION = 1
UNDO_LIMIT = 100


@dataclass
class _ClassificationSlot:
    current: pixels.Classification
    rev: int = 0
    undo: deque = field(default_factory=lambda: deque(maxlen=UNDO_LIMIT))
    redo: list = field(default_factory=list)


class Session:
    """One working session: maze registry, trace registry and cache,
    classification registry with bounded undo history."""

    def __init__(self, session_id: str, root: Path):
        self.id = session_id
        self.root = Path(root)
        self.lock = threading.RLock()
        self.weights_checksum: str | None = None
        self._mazes: dict[str, maze_mod.MazeGrid] = {}
        self._traces: dict[str, ActivationTrace] = {}
        self._trace_cache: dict[tuple, str] = {}
        self._classifications: dict[str, _ClassificationSlot] = {}
        self._counter = 0
        (self.root / "mazes").mkdir(parents=True, exist_ok=True)
        (self.root / "classifications").mkdir(parents=True, exist_ok=True)

    def _new_id(self, prefix: str) -> str:
        with self.lock:
            while True:
                self._counter += 1
                cand = f"{prefix}{self._counter:04d}"
                if (
                    cand not in self._mazes
                    and cand not in self._traces
                    and cand not in self._classifications
                ):
                    return cand

    # mazes ------------------------------------------------------------

    def put_maze(self, grid: maze_mod.MazeGrid, maze_id: str | None = None) -> str:
        with self.lock:
            mid = maze_id or self._new_id("m")
            self._mazes[mid] = grid
            (self.root / "mazes" / f"{mid}.maze").write_text(maze_mod.to_text(grid))
            return mid

    def get_maze(self, maze_id: str) -> maze_mod.MazeGrid:
        with self.lock:
            if maze_id not in self._mazes:
                raise NotFoundError(f"maze {maze_id!r} not in session {self.id}")
            return self._mazes[maze_id]

    def list_mazes(self) -> list[str]:
        with self.lock:
            return sorted(self._mazes)

    # traces -----------------------------------------------------------

    def trace_cache_key(self, grid: maze_mod.MazeGrid, capture) -> tuple:
        return (self.weights_checksum, grid.content_key(), frozenset(capture))

    def find_cached_trace(self, key: tuple) -> str | None:
        with self.lock:
            return self._trace_cache.get(key)

    def put_trace(self, trace: ActivationTrace, cache_key: tuple | None = None) -> str:
        with self.lock:
            tid = self._new_id("t")
            self._traces[tid] = trace
            if cache_key is not None:
                self._trace_cache[cache_key] = tid
            return tid

    def get_trace(self, trace_id: str) -> ActivationTrace:
        with self.lock:
            if trace_id not in self._traces:
                raise NotFoundError(f"trace {trace_id!r} not in session {self.id}")
            return self._traces[trace_id]

    # classifications ----------------------------------------------------

    def put_classification(
        self, classification: pixels.Classification, cls_id: str | None = None
    ) -> str:
        """Create (fresh id) or replace (existing id, pushing the prior
        version onto the undo stack and clearing redo)."""
        with self.lock:
            if cls_id is None:
                cls_id = self._new_id("c")
            slot = self._classifications.get(cls_id)
            if slot is None:
                self._classifications[cls_id] = _ClassificationSlot(
                    current=classification
                )
            else:
                slot.undo.append(slot.current)
                slot.redo.clear()
                slot.current = classification
                slot.rev += 1
            self._write_classification(cls_id)
            return cls_id

    def get_classification(self, cls_id: str) -> tuple[pixels.Classification, int]:
        with self.lock:
            slot = self._slot(cls_id)
            return slot.current, slot.rev

    def replace_classification(
        self, cls_id: str, classification: pixels.Classification, base_rev: int | None
    ) -> int:
        """Replace with optimistic concurrency: when base_rev is given it
        must match the stored revision, otherwise the write is stale."""
        with self.lock:
            slot = self._slot(cls_id)
            if base_rev is not None and base_rev != slot.rev:
                raise ConflictError(
                    f"classification {cls_id!r} is at rev {slot.rev}, "
                    f"write was based on rev {base_rev}"
                )
            self.put_classification(classification, cls_id)
            return slot.rev

    def undo(self, cls_id: str) -> tuple[pixels.Classification, int]:
        with self.lock:
            slot = self._slot(cls_id)
            if not slot.undo:
                raise ConflictError(f"nothing to undo for {cls_id!r}")
            slot.redo.append(slot.current)
            slot.current = slot.undo.pop()
            slot.rev += 1
            self._write_classification(cls_id)
            return slot.current, slot.rev

    def redo(self, cls_id: str) -> tuple[pixels.Classification, int]:
        with self.lock:
            slot = self._slot(cls_id)
            if not slot.redo:
                raise ConflictError(f"nothing to redo for {cls_id!r}")
            slot.undo.append(slot.current)
            slot.current = slot.redo.pop()
            slot.rev += 1
            self._write_classification(cls_id)
            return slot.current, slot.rev

    def undo_depth(self, cls_id: str) -> int:
        with self.lock:
            return len(self._slot(cls_id).undo)

    def list_classifications(self) -> list[str]:
        with self.lock:
            return sorted(self._classifications)

    def _slot(self, cls_id: str) -> _ClassificationSlot:
        if cls_id not in self._classifications:
            raise NotFoundError(f"classification {cls_id!r} not in session {self.id}")
        return self._classifications[cls_id]

    def _write_classification(self, cls_id: str) -> None:
        slot = self._classifications[cls_id]
        path = self.root / "classifications" / f"{cls_id}.json"
        path.write_bytes(pixels.canonical_json_bytes(slot.current))

    # bundles ------------------------------------------------------------

    def export_bundle(self, dest, weights_path=None) -> Path:
        """Write a self-contained directory: manifest, maze files,
        classification documents, optionally a copy of the weights."""
        with self.lock:
            dest = Path(dest)
            (dest / "mazes").mkdir(parents=True, exist_ok=True)
            (dest / "classifications").mkdir(parents=True, exist_ok=True)
            for mid, grid in self._mazes.items():
                (dest / "mazes" / f"{mid}.maze").write_text(maze_mod.to_text(grid))
            for cid, slot in self._classifications.items():
                (dest / "classifications" / f"{cid}.json").write_bytes(
                    pixels.canonical_json_bytes(slot.current)
                )
            weights_entry = None
            if weights_path is not None:
                shutil.copyfile(weights_path, dest / "weights.impw")
                weights_entry = "weights.impw"
            manifest = {
                "version": BUNDLE_VERSION,
                "session": self.id,
                "mazes": sorted(self._mazes),
                "classifications": sorted(self._classifications),
                "weights": weights_entry,
            }
            (dest / "manifest.json").write_text(
                json.dumps(manifest, sort_keys=True, indent=2) + "\n"
            )
            return dest


class SessionStore:
    """Registry of sessions rooted at one directory. Cross-session
    operations are fully independent."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create_session(self, session_id: str | None = None) -> Session:
        with self._lock:
            sid = session_id or uuid.uuid4().hex[:12]
            if sid in self._sessions:
                raise ConflictError(f"session {sid!r} already exists")
            session = Session(sid, self.root / sid)
            self._sessions[sid] = session
            return session

    def get_session(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise NotFoundError(f"unknown session {session_id!r}")
            return self._sessions[session_id]

    def import_bundle(self, src) -> Session:
        """Recreate a session from an exported bundle directory."""
        src = Path(src)
        manifest_path = src / "manifest.json"
        if not manifest_path.exists():
            raise FormatError(f"{src}: no manifest.json")
        try:
            manifest = json.loads(manifest_path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{src}: manifest is not valid JSON") from exc
        if manifest.get("version") != BUNDLE_VERSION:
            raise FormatError(
                f"{src}: unsupported bundle version {manifest.get('version')!r}"
            )
        session = self.create_session()
        for mid in manifest.get("mazes", []):
            text = (src / "mazes" / f"{mid}.maze").read_text()
            session.put_maze(maze_mod.from_text(text), mid)
        for cid in manifest.get("classifications", []):
            doc = json.loads((src / "classifications" / f"{cid}.json").read_text())
            session.put_classification(pixels.from_document(doc), cid)
        return session

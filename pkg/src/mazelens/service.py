"""HTTP facade over the core modules.

Every route is a thin adapter: it parses the request, calls the same
functions a library user would, and serializes the result. No numerics
live here. Long clustering runs execute on a bounded worker pool as
cancelable jobs; per-session writes are serialized by the session lock.
"""

from __future__ import annotations

import tempfile
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import maze as maze_mod
from . import wire
from .analysis import (
    ClusteringCancelled,
    ProjectionState,
    action_distribution_map,
    agglomerative,
    flatten_activations,
    from_document,
    grand_tour_step,
    kmeans,
    parse_target,
    project,
    reassign_points,
    saliency_for,
    to_document,
)
from .errors import NotFoundError, ParameterError, WorkbenchError
from .nn import NetworkSpec, forward_with_capture, init_random_weights, load_weights
from .session import SessionStore

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8737

_STATUS = {
    "not_found": 404,
    "conflict": 409,
}


@dataclass
class ClusterJob:
    id: str
    status: str = "queued"  # queued | running | done | error | cancelled
    progress: float = 0.0
    classification: str | None = None
    error: str | None = None
    cancel: threading.Event = field(default_factory=threading.Event)


class MazeBody(BaseModel):
    seed: int = 0
    size: int = 15


class CellBody(BaseModel):
    row: int
    col: int
    kind: str  # "FREE" | "BLOCKED"


class EntityBody(BaseModel):
    entity: str  # "mouse" | "cheese"
    action: str = "place"  # "place" | "remove"
    row: int | None = None
    col: int | None = None


class ForwardBody(BaseModel):
    maze: str
    capture: list[str] = []


class ClusterBody(BaseModel):
    trace: str
    layer: str
    method: str  # "kmeans" | "agglomerative"
    params: dict = {}


class PutClassificationBody(BaseModel):
    document: dict
    rev: int | None = None


class ReassignBody(BaseModel):
    points: list[int]
    target: int | str  # class id or "new"


class SaliencyBody(BaseModel):
    maze: str
    target: str  # "logit:K" | "group:NAME"
    reduction: str = "l2"


class ProjectionBody(BaseModel):
    classification: str
    dt: float = 0.05
    steps: int = 1
    basis: list[list[float]] | None = None


def create_app(
    weights_path: str | None = None,
    seed: int = 0,
    store_root: str | None = None,
    cors_origins: tuple[str, ...] = ("*",),
    workers: int = 2,
    ui_dir: str | None = None,
) -> FastAPI:
    spec = NetworkSpec()
    if weights_path is not None:
        weights = load_weights(weights_path, spec)
    else:
        weights = init_random_weights(spec, seed)
    store = SessionStore(store_root or tempfile.mkdtemp(prefix="mazelens-"))

    app = FastAPI(title="mazelens workbench", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = app.state
    state.spec = spec
    state.weights = weights
    state.weights_checksum = weights.checksum()
    state.store = store
    state.jobs: dict[tuple[str, str], ClusterJob] = {}
    state.cls_sources: dict[tuple[str, str], tuple[str, str]] = {}
    state.proj_states: dict[tuple[str, str], ProjectionState] = {}
    state.executor = ThreadPoolExecutor(max_workers=workers)

    @app.exception_handler(WorkbenchError)
    async def workbench_error_handler(request: Request, exc: WorkbenchError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 422),
            content={
                "error": {
                    "code": exc.code,
                    "message": str(exc),
                    "details": {"type": type(exc).__name__},
                }
            },
        )

    def session_of(sid: str):
        return store.get_session(sid)

    def maze_payload(mid: str, grid) -> dict:
        report = maze_mod.validate_grid(grid)
        return {
            "id": mid,
            "size": grid.size,
            "rows": maze_mod.to_text(grid).splitlines()[1:],
            "mouse": list(grid.mouse),
            "cheese": list(grid.cheese) if grid.cheese is not None else None,
            "validity": {
                "connected": report.connected,
                "spanning_tree": report.is_spanning_tree,
                "rooms": report.room_count,
                "corridors": report.corridor_count,
                "problems": list(report.problems),
            },
        }

    def run_forward(session, mid: str, capture: frozenset[str]):
        """Trace cache: (weights, maze content, capture set)."""
        grid = session.get_maze(mid)
        key = session.trace_cache_key(grid, capture)
        tid = session.find_cached_trace(key)
        if tid is not None:
            return tid, session.get_trace(tid), True
        obs = maze_mod.render_observation(grid)
        trace = forward_with_capture(spec, weights, obs, capture)
        tid = session.put_trace(trace, key)
        return tid, trace, False

    # --- meta ---------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/network")
    def network():
        return {
            "input_shape": list(spec.input_shape),
            "actions": spec.actions,
            "layers": [
                {"name": l.name, "kind": l.kind, "shape": list(l.out_shape)}
                for l in spec.layers
            ],
            "weights_checksum": state.weights_checksum,
        }

    # --- sessions and mazes -------------------------------------------

    @app.post("/api/sessions")
    def create_session():
        session = store.create_session()
        session.weights_checksum = state.weights_checksum
        return {"session": session.id}

    @app.post("/api/sessions/{sid}/mazes")
    def create_maze(sid: str, body: MazeBody):
        session = session_of(sid)
        grid = maze_mod.generate_kruskal(body.seed, body.size)
        mid = session.put_maze(grid)
        return maze_payload(mid, grid)

    @app.get("/api/sessions/{sid}/mazes/{mid}")
    def get_maze(sid: str, mid: str):
        return maze_payload(mid, session_of(sid).get_maze(mid))

    @app.put("/api/sessions/{sid}/mazes/{mid}/cells")
    def edit_cell(sid: str, mid: str, body: CellBody):
        session = session_of(sid)
        kinds = {"FREE": maze_mod.FREE, "BLOCKED": maze_mod.BLOCKED}
        if body.kind not in kinds:
            raise ParameterError(f"cell kind must be FREE or BLOCKED, got {body.kind!r}")
        grid = maze_mod.set_cell(session.get_maze(mid), body.row, body.col, kinds[body.kind])
        session.put_maze(grid, mid)
        return maze_payload(mid, grid)

    @app.post("/api/sessions/{sid}/mazes/{mid}/entities")
    def edit_entity(sid: str, mid: str, body: EntityBody):
        session = session_of(sid)
        grid = session.get_maze(mid)
        if body.entity not in ("mouse", "cheese"):
            raise ParameterError(f"entity must be mouse or cheese, got {body.entity!r}")
        if body.action == "remove":
            if body.entity != "cheese":
                raise ParameterError("only the cheese can be removed")
            grid = maze_mod.remove_cheese(grid)
        elif body.action == "place":
            if body.row is None or body.col is None:
                raise ParameterError("place needs row and col")
            if body.entity == "mouse":
                grid = maze_mod.place_mouse(grid, body.row, body.col)
            else:
                grid = maze_mod.place_cheese(grid, body.row, body.col)
        else:
            raise ParameterError(f"action must be place or remove, got {body.action!r}")
        session.put_maze(grid, mid)
        return maze_payload(mid, grid)

    @app.get("/api/sessions/{sid}/mazes/{mid}/observation")
    def get_observation(sid: str, mid: str):
        grid = session_of(sid).get_maze(mid)
        obs = maze_mod.render_observation(grid)
        return Response(wire.encode_tensor(obs), media_type="application/octet-stream")

    # --- forward and tensors ------------------------------------------

    @app.post("/api/sessions/{sid}/forward")
    def forward(sid: str, body: ForwardBody):
        session = session_of(sid)
        tid, trace, cached = run_forward(session, body.maze, frozenset(body.capture))
        return {
            "trace": tid,
            "cached": cached,
            "logits": [float(v) for v in trace.logits],
            "value": trace.value,
            "actions": action_distribution_map(trace.logits),
        }

    @app.get("/api/sessions/{sid}/traces/{tid}/layers/{name}")
    def get_layer_tensor(sid: str, tid: str, name: str):
        trace = session_of(sid).get_trace(tid)
        tensor = trace.layer(name)  # UnknownLayerError -> 422
        return Response(wire.encode_tensor(tensor), media_type="application/octet-stream")

    # --- clustering jobs ----------------------------------------------

    @app.post("/api/sessions/{sid}/cluster")
    def start_cluster(sid: str, body: ClusterBody):
        session = session_of(sid)
        trace = session.get_trace(body.trace)
        dataset = flatten_activations(trace, body.layer)  # validates layer now
        if body.method not in ("kmeans", "agglomerative"):
            raise ParameterError(f"unknown clustering method {body.method!r}")
        job = ClusterJob(id=uuid.uuid4().hex[:10])
        state.jobs[(sid, job.id)] = job
        params = dict(body.params)

        def run():
            job.status = "running"
            try:
                standardize = bool(params.get("standardize", False))
                if body.method == "kmeans":
                    result = kmeans(
                        dataset,
                        k=int(params.get("k", 8)),
                        seed=int(params.get("seed", 0)),
                        max_iters=int(params.get("max_iters", 100)),
                        tol=float(params.get("tol", 1e-4)),
                        standardize=standardize,
                        should_stop=job.cancel.is_set,
                        progress=lambda f: setattr(job, "progress", f),
                    )
                else:
                    threshold = params.get("threshold")
                    count = params.get("count")
                    result = agglomerative(
                        dataset,
                        threshold=None if threshold is None else float(threshold),
                        count=None if count is None else int(count),
                        standardize=standardize,
                        should_stop=job.cancel.is_set,
                        progress=lambda f: setattr(job, "progress", f),
                    )
                cid = session.put_classification(result)
                state.cls_sources[(sid, cid)] = (body.trace, body.layer)
                job.classification = cid
                job.progress = 1.0
                job.status = "done"
            except ClusteringCancelled:
                job.status = "cancelled"
            except WorkbenchError as exc:
                job.status = "error"
                job.error = str(exc)

        state.executor.submit(run)
        return {"job": job.id}

    def job_of(sid: str, jid: str) -> ClusterJob:
        job = state.jobs.get((sid, jid))
        if job is None:
            raise NotFoundError(f"unknown job {jid!r} in session {sid!r}")
        return job

    @app.get("/api/sessions/{sid}/jobs/{jid}")
    def job_status(sid: str, jid: str):
        job = job_of(sid, jid)
        return {
            "job": job.id,
            "status": job.status,
            "progress": job.progress,
            "classification": job.classification,
            "error": job.error,
        }

    @app.delete("/api/sessions/{sid}/jobs/{jid}")
    def cancel_job(sid: str, jid: str):
        job = job_of(sid, jid)
        job.cancel.set()
        return {"job": job.id, "status": job.status}

    # --- classifications ----------------------------------------------

    @app.get("/api/sessions/{sid}/classifications/{cid}")
    def get_classification(sid: str, cid: str):
        classification, rev = session_of(sid).get_classification(cid)
        return {"rev": rev, "document": to_document(classification)}

    @app.put("/api/sessions/{sid}/classifications/{cid}")
    def put_classification(sid: str, cid: str, body: PutClassificationBody):
        session = session_of(sid)
        classification = from_document(body.document)
        rev = session.replace_classification(cid, classification, body.rev)
        return {"rev": rev}

    @app.post("/api/sessions/{sid}/classifications/{cid}/reassign")
    def reassign(sid: str, cid: str, body: ReassignBody):
        session = session_of(sid)
        with session.lock:  # read-modify-write as one serialized edit
            current, _ = session.get_classification(cid)
            target = None if body.target == "new" else int(body.target)
            edited = reassign_points(current, body.points, target)
            rev = session.replace_classification(cid, edited, None)
        return {"rev": rev, "document": to_document(edited)}

    @app.post("/api/sessions/{sid}/classifications/{cid}/undo")
    def undo(sid: str, cid: str):
        classification, rev = session_of(sid).undo(cid)
        return {"rev": rev, "document": to_document(classification)}

    @app.post("/api/sessions/{sid}/classifications/{cid}/redo")
    def redo(sid: str, cid: str):
        classification, rev = session_of(sid).redo(cid)
        return {"rev": rev, "document": to_document(classification)}

    # --- saliency and projection --------------------------------------

    @app.post("/api/sessions/{sid}/saliency")
    def saliency(sid: str, body: SaliencyBody):
        session = session_of(sid)
        _, trace, _ = run_forward(session, body.maze, frozenset())
        target = parse_target(body.target)
        sal = saliency_for(trace, target, reduction=body.reduction)
        return {
            "target": sal.target,
            "reduction": sal.reduction,
            "shape": [64, 64],
            "values": [float(v) for v in sal.values.ravel()],
        }

    @app.post("/api/sessions/{sid}/projection")
    def projection_step(sid: str, body: ProjectionBody):
        session = session_of(sid)
        session.get_classification(body.classification)  # 404 when absent
        source = state.cls_sources.get((sid, body.classification))
        if source is None:
            raise NotFoundError(
                f"classification {body.classification!r} has no source dataset "
                "(imported documents cannot be projected)"
            )
        trace = session.get_trace(source[0])
        dataset = flatten_activations(trace, source[1])
        if body.basis is not None:
            basis = np.asarray(body.basis, dtype=np.float64)
            if basis.shape != (dataset.d, 2):
                raise ParameterError(
                    f"basis shape {basis.shape} does not match d={dataset.d}"
                )
            proj = ProjectionState(d=dataset.d, basis=basis)
            if proj.orthonormality_error() > 1e-3:
                raise ParameterError("supplied basis is not orthonormal")
        else:
            proj = state.proj_states.get((sid, body.classification))
            if proj is None:
                proj = ProjectionState.initial(dataset.d)
        if body.steps < 0:
            raise ParameterError("steps must be >= 0")
        for _ in range(body.steps):
            proj = grand_tour_step(proj, body.dt)
        state.proj_states[(sid, body.classification)] = proj
        points = project(proj, dataset)
        return {
            "basis": [[float(a), float(b)] for a, b in proj.basis],
            "points": [[float(a), float(b)] for a, b in points],
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so the /api routes keep precedence
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def run_server(
    host: str = DEFAULT_HOST,
    port: int = DEFAULT_PORT,
    weights_path: str | None = None,
    seed: int = 0,
    store_root: str | None = None,
    ui_dir: str | None = None,
):
    import uvicorn

    app = create_app(
        weights_path=weights_path, seed=seed, store_root=store_root, ui_dir=ui_dir
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")

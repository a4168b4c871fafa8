"""HTTP facade: route contracts, delegation fidelity, job lifecycle."""

import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mazelens import maze, wire
from mazelens.analysis import (
    ProjectionState,
    canonical_json_bytes,
    from_document,
    grand_tour_step,
)
from mazelens.nn import NetworkSpec, forward_with_capture, init_random_weights
from mazelens.service import create_app

import json


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    app = create_app(seed=0, store_root=str(tmp_path_factory.mktemp("svc")))
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def sid(client):
    return client.post("/api/sessions").json()["session"]


def make_maze(client, sid, seed=42, size=15):
    r = client.post(f"/api/sessions/{sid}/mazes", json={"seed": seed, "size": size})
    assert r.status_code == 200, r.text
    return r.json()


def wait_job(client, sid, jid, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        r = client.get(f"/api/sessions/{sid}/jobs/{jid}").json()
        if r["status"] in ("done", "error", "cancelled"):
            return r
        time.sleep(0.02)
    raise TimeoutError("job did not finish")


def cluster_classification(client, sid, maze_id=None, layer="block2.res1.resadd", k=5):
    m = maze_id or make_maze(client, sid)["id"]
    fwd = client.post(
        f"/api/sessions/{sid}/forward", json={"maze": m, "capture": [layer]}
    ).json()
    r = client.post(
        f"/api/sessions/{sid}/cluster",
        json={"trace": fwd["trace"], "layer": layer, "method": "kmeans",
              "params": {"k": k, "seed": 1}},
    )
    assert r.status_code == 200, r.text
    job = wait_job(client, sid, r.json()["job"])
    assert job["status"] == "done", job
    return job["classification"], fwd["trace"]


def test_health_and_network(client):
    assert client.get("/api/health").json() == {"status": "ok"}
    net = client.get("/api/network").json()
    assert net["input_shape"] == [3, 64, 64]
    names = [l["name"] for l in net["layers"]]
    assert "block2.res1.resadd" in names


def test_maze_crud_and_validity(client, sid):
    m = make_maze(client, sid, seed=1, size=9)
    assert m["validity"]["spanning_tree"]
    assert len(m["rows"]) == 9

    r = client.put(
        f"/api/sessions/{sid}/mazes/{m['id']}/cells",
        json={"row": 2, "col": 2, "kind": "FREE"},
    )
    assert r.status_code == 200
    assert not r.json()["validity"]["spanning_tree"]

    r = client.post(
        f"/api/sessions/{sid}/mazes/{m['id']}/entities",
        json={"entity": "cheese", "action": "remove"},
    )
    assert r.json()["cheese"] is None

    r = client.post(
        f"/api/sessions/{sid}/mazes/{m['id']}/entities",
        json={"entity": "mouse", "action": "place", "row": 0, "col": 0},
    )
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "invalid_placement"


def test_unknown_ids_are_404(client, sid):
    assert client.get("/api/sessions/zzz/mazes/m1").status_code == 404
    assert client.get(f"/api/sessions/{sid}/mazes/m999").status_code == 404
    assert client.get(f"/api/sessions/{sid}/traces/t9/layers/block1.conv").status_code == 404
    assert client.get(f"/api/sessions/{sid}/classifications/c9").status_code == 404
    assert client.get(f"/api/sessions/{sid}/jobs/j9").status_code == 404


def test_forward_returns_logits_and_action_distribution(client, sid):
    m = make_maze(client, sid)
    r = client.post(
        f"/api/sessions/{sid}/forward", json={"maze": m["id"], "capture": []}
    ).json()
    assert len(r["logits"]) == 15
    total = sum(r["actions"].values())
    assert abs(total - 1.0) < 1e-6
    # identical request hits the trace cache
    r2 = client.post(
        f"/api/sessions/{sid}/forward", json={"maze": m["id"], "capture": []}
    ).json()
    assert r2["trace"] == r["trace"]
    assert r2["cached"]


def test_forward_matches_direct_core_call(client, sid):
    m = make_maze(client, sid, seed=7, size=11)
    r = client.post(
        f"/api/sessions/{sid}/forward",
        json={"maze": m["id"], "capture": ["block2.res1.resadd"]},
    ).json()
    spec = NetworkSpec()
    weights = init_random_weights(spec, 0)
    obs = maze.render_observation(maze.generate_kruskal(7, 11))
    trace = forward_with_capture(spec, weights, obs, {"block2.res1.resadd"})
    np.testing.assert_allclose(r["logits"], trace.logits, atol=1e-7)

    # tensor endpoint byte-equals a direct encoding of the same tensor
    t = client.get(
        f"/api/sessions/{sid}/traces/{r['trace']}/layers/block2.res1.resadd"
    )
    assert t.status_code == 200
    assert t.content == wire.encode_tensor(trace.layer("block2.res1.resadd"))
    decoded = wire.decode_tensor(t.content)
    assert decoded.shape == (128, 16, 16)


def test_tensor_endpoint_reports_dims(client, sid):
    m = make_maze(client, sid)
    r = client.post(
        f"/api/sessions/{sid}/forward",
        json={"maze": m["id"], "capture": ["block2.res1.resadd"]},
    ).json()
    data = client.get(
        f"/api/sessions/{sid}/traces/{r['trace']}/layers/block2.res1.resadd"
    ).content
    assert data[:4] == b"TNSR"
    arr = wire.decode_tensor(data)
    assert arr.shape == (128, 16, 16)


def test_uncaptured_layer_is_422(client, sid):
    m = make_maze(client, sid)
    r = client.post(
        f"/api/sessions/{sid}/forward", json={"maze": m["id"], "capture": []}
    ).json()
    resp = client.get(f"/api/sessions/{sid}/traces/{r['trace']}/layers/block1.conv")
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "unknown_layer"


def test_cluster_job_lifecycle(client, sid):
    cid, _ = cluster_classification(client, sid)
    r = client.get(f"/api/sessions/{sid}/classifications/{cid}").json()
    doc = r["document"]
    assert doc["shape"] == [16, 16, 128]
    assert len(doc["assignment"]) == 256
    assert len(doc["classes"]) == 5


def test_cluster_document_byte_equals_direct_call(client, sid):
    from mazelens.analysis import flatten_activations, kmeans

    m = make_maze(client, sid, seed=3, size=13)
    fwd = client.post(
        f"/api/sessions/{sid}/forward",
        json={"maze": m["id"], "capture": ["block2.res1.resadd"]},
    ).json()
    r = client.post(
        f"/api/sessions/{sid}/cluster",
        json={"trace": fwd["trace"], "layer": "block2.res1.resadd",
              "method": "kmeans", "params": {"k": 4, "seed": 9}},
    )
    job = wait_job(client, sid, r.json()["job"])
    got = client.get(
        f"/api/sessions/{sid}/classifications/{job['classification']}"
    ).json()["document"]

    spec = NetworkSpec()
    weights = init_random_weights(spec, 0)
    obs = maze.render_observation(maze.generate_kruskal(3, 13))
    trace = forward_with_capture(spec, weights, obs, {"block2.res1.resadd"})
    direct = kmeans(flatten_activations(trace, "block2.res1.resadd"), 4, seed=9)
    assert canonical_json_bytes(from_document(got)) == canonical_json_bytes(direct)


def test_agglomerative_job_and_cancel(client, sid):
    m = make_maze(client, sid)
    fwd = client.post(
        f"/api/sessions/{sid}/forward",
        json={"maze": m["id"], "capture": ["block1.conv"]},
    ).json()
    r = client.post(
        f"/api/sessions/{sid}/cluster",
        json={"trace": fwd["trace"], "layer": "block1.conv",
              "method": "agglomerative", "params": {"count": 10}},
    )
    jid = r.json()["job"]
    client.delete(f"/api/sessions/{sid}/jobs/{jid}")
    final = wait_job(client, sid, jid)
    # cancellation raced with completion; either way no partial state
    assert final["status"] in ("cancelled", "done")
    if final["status"] == "cancelled":
        assert final["classification"] is None


def test_reassign_read_your_writes(client, sid):
    cid, _ = cluster_classification(client, sid)
    before = client.get(f"/api/sessions/{sid}/classifications/{cid}").json()
    r = client.post(
        f"/api/sessions/{sid}/classifications/{cid}/reassign",
        json={"points": [0, 1, 2], "target": "new"},
    ).json()
    after = client.get(f"/api/sessions/{sid}/classifications/{cid}").json()
    assert after["rev"] == r["rev"] > before["rev"]
    new_id = str(max(int(k) for k in after["document"]["classes"]))
    assert after["document"]["assignment"][0] == int(new_id)

    # undo restores the pre-edit document exactly
    undone = client.post(f"/api/sessions/{sid}/classifications/{cid}/undo").json()
    assert undone["document"] == before["document"]
    redone = client.post(f"/api/sessions/{sid}/classifications/{cid}/redo").json()
    assert redone["document"] == after["document"]


def test_put_with_stale_rev_conflicts(client, sid):
    cid, _ = cluster_classification(client, sid)
    got = client.get(f"/api/sessions/{sid}/classifications/{cid}").json()
    doc = got["document"]
    doc["classes"]["0"]["label"] = "walls"
    ok = client.put(
        f"/api/sessions/{sid}/classifications/{cid}",
        json={"document": doc, "rev": got["rev"]},
    )
    assert ok.status_code == 200
    stale = client.put(
        f"/api/sessions/{sid}/classifications/{cid}",
        json={"document": doc, "rev": got["rev"]},
    )
    assert stale.status_code == 409
    assert stale.json()["error"]["code"] == "conflict"


def test_saliency_route(client, sid):
    m = make_maze(client, sid)
    client.post(
        f"/api/sessions/{sid}/mazes/{m['id']}/entities",
        json={"entity": "cheese", "action": "remove"},
    )
    r = client.post(
        f"/api/sessions/{sid}/saliency",
        json={"maze": m["id"], "target": "group:UP"},
    ).json()
    assert r["shape"] == [64, 64]
    assert len(r["values"]) == 64 * 64
    assert r["target"] == "group:UP"

    bad = client.post(
        f"/api/sessions/{sid}/saliency", json={"maze": m["id"], "target": "logit:99"}
    )
    assert bad.status_code == 422


def test_projection_route_matches_local_stepping(client, sid):
    cid, _ = cluster_classification(client, sid)
    d = 128
    basis0 = ProjectionState.initial(d)
    r = client.post(
        f"/api/sessions/{sid}/projection",
        json={
            "classification": cid,
            "dt": 0.05,
            "steps": 100,
            "basis": [[float(a), float(b)] for a, b in basis0.basis],
        },
    ).json()
    local = basis0
    for _ in range(100):
        local = grand_tour_step(local, 0.05)
    served = np.array(r["basis"])
    assert np.abs(served - local.basis).max() < 1e-12
    assert len(r["points"]) == 256

    # continuation without a basis resumes from the server-held state
    r2 = client.post(
        f"/api/sessions/{sid}/projection",
        json={"classification": cid, "dt": 0.05, "steps": 1},
    ).json()
    local = grand_tour_step(local, 0.05)
    assert np.abs(np.array(r2["basis"]) - local.basis).max() < 1e-12


def test_observation_endpoint(client, sid):
    m = make_maze(client, sid, seed=5, size=9)
    data = client.get(f"/api/sessions/{sid}/mazes/{m['id']}/observation").content
    obs = wire.decode_tensor(data)
    assert obs.shape == (3, 64, 64)
    direct = maze.render_observation(maze.generate_kruskal(5, 9))
    assert data == wire.encode_tensor(direct)

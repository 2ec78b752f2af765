import base64
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mopviz.service import JobManager, create_app


@pytest.fixture()
def client():
    manager = JobManager(workers=2)
    app = create_app(manager)
    with TestClient(app) as c:
        c.manager = manager
        yield c


def wait_ready(client, dataset_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get(f"/api/jobs/{dataset_id}").json()
        if status["status"] == "ready":
            return
        if status["status"] == "failed":
            raise AssertionError(f"job failed: {status['error']}")
        time.sleep(0.02)
    raise AssertionError("job did not become ready in time")


def compute(client, spec, resolution, methods, force=False):
    response = client.post("/api/compute", json={
        "spec": spec, "resolution": resolution, "methods": methods, "force": force})
    assert response.status_code == 200, response.text
    dataset_id = response.json()["id"]
    wait_ready(client, dataset_id)
    return dataset_id


BISPHERE = {"family": "bisphere", "p": 2, "k": 2, "params": {}}
TRISPHERE = {"family": "trisphere", "p": 3, "k": 3, "params": {}}


def decode_f8(payload):
    return np.frombuffer(base64.b64decode(payload), dtype="<f8")


def test_catalog_contents_and_stability(client):
    first = client.get("/api/problems").json()
    second = client.get("/api/problems").json()
    assert first == second
    ids = [e["id"] for e in first]
    assert "bisphere-2d" in ids
    entry = next(e for e in first if e["id"] == "bisphere-2d")
    assert entry["defaults"]["a"] == [-1.0, 0.0]
    schema = {s["name"]: s for s in entry["params"]}
    assert schema["a"]["type"] == "vector"
    assert schema["a"]["min"] == -2.0 and schema["a"]["max"] == 2.0
    assert entry["default_resolution"] == [1000, 1000]


def test_compute_idempotent_same_id_no_recompute(client):
    a = compute(client, BISPHERE, [40, 40], ["heatmap", "plot"])
    calls = client.manager.compute_calls
    response = client.post("/api/compute", json={
        "spec": BISPHERE, "resolution": [40, 40], "methods": ["heatmap", "plot"]})
    assert response.json() == {"id": a, "status": "ready"}
    assert client.manager.compute_calls == calls


def test_validation_errors(client):
    bad_spec = client.post("/api/compute", json={
        "spec": {"family": "nope", "p": 2, "k": 2, "params": {}}})
    assert bad_spec.status_code == 400
    too_big = client.post("/api/compute", json={
        "spec": BISPHERE, "resolution": [9000, 9000]})
    assert too_big.status_code == 413
    cost_guard = client.post("/api/compute", json={
        "spec": TRISPHERE, "resolution": [100, 100, 100], "methods": ["cost"]})
    assert cost_guard.status_code == 409
    bad_methods = client.post("/api/compute", json={
        "spec": BISPHERE, "methods": ["magic"]})
    assert bad_methods.status_code == 400


def test_unknown_and_not_ready(client):
    assert client.get("/api/jobs/deadbeef").status_code == 404
    assert client.get("/api/data/deadbeef/heatmap").status_code == 404


def test_heatmap_payload_2d(client):
    dataset_id = compute(client, BISPHERE, [30, 30], ["heatmap"])
    payload = client.get(f"/api/data/{dataset_id}/heatmap").json()
    assert payload["width"] == 30 and payload["height"] == 30
    t = decode_f8(payload["t_b64"])
    assert t.shape == (900,)
    assert t.min() >= 0.0 and t.max() <= 1.0
    rgb = np.frombuffer(base64.b64decode(payload["rgb_b64"]), dtype=np.uint8)
    assert rgb.shape == (2700,)
    # plot was not requested
    assert client.get(f"/api/data/{dataset_id}/plot").status_code == 404


def test_plot_payload_includes_ranked_points(client):
    dataset_id = compute(client, BISPHERE, [60, 60], ["heatmap", "plot"])
    payload = client.get(f"/api/data/{dataset_id}/plot").json()
    eff = payload["efficient"]
    assert len(eff["cells"]) > 0
    assert min(eff["ranks"]) == 1
    positions = decode_f8(eff["positions_b64"]).reshape(-1, 2)
    assert positions.shape[0] == len(eff["cells"])
    meta = client.get(f"/api/data/{dataset_id}").json()
    assert meta["efficient"]["cells"] == eff["cells"]


def test_slice_delegates_to_core(client):
    dataset_id = compute(client, TRISPHERE, [12, 12, 12], ["heatmap"])
    payload = client.get(f"/api/data/{dataset_id}/heatmap",
                         params={"axis": 3, "index": 6}).json()
    assert payload["width"] == 12 and payload["height"] == 12
    t = decode_f8(payload["t_b64"])

    from mopviz.export import normalize_log
    from mopviz.fields import evaluate_field, make_grid
    from mopviz.heatmap import gradient_field_heatmap
    from mopviz.problems import ProblemSpec, instantiate
    from mopviz.volume import slice_field

    problem = instantiate(ProblemSpec("trisphere", 3, 3))
    bundle = evaluate_field(problem, make_grid(problem, (12, 12, 12)))
    hm = gradient_field_heatmap(bundle.mog)
    want = slice_field(
        hm.heights.__class__(hm.heights.grid, normalize_log(hm.heights)), 3, 6)
    assert np.array_equal(t, want.field2d.values)
    # missing slice params on a 3D dataset is a client error
    assert client.get(f"/api/data/{dataset_id}/heatmap").status_code == 400
    assert client.get(f"/api/data/{dataset_id}/heatmap",
                      params={"axis": 9, "index": 0}).status_code == 400


def test_onion_endpoint(client):
    dataset_id = compute(client, TRISPHERE, [12, 12, 12], ["heatmap"])
    below = client.get(f"/api/data/{dataset_id}/onion",
                       params={"threshold": -1.0}).json()
    assert below["cells"] == []
    meta = client.get(f"/api/data/{dataset_id}").json()
    shell = client.get(f"/api/data/{dataset_id}/onion",
                       params={"threshold": meta["onion"]["max"]}).json()
    assert len(shell["cells"]) == 12**3 - 10**3


def test_objective_space_endpoint(client):
    dataset_id = compute(client, BISPHERE, [25, 25], ["heatmap", "plot"])
    payload = client.get(f"/api/data/{dataset_id}/objective-space",
                         params={"source": "plot"}).json()
    assert payload["count"] == 625
    points = decode_f8(payload["points_b64"]).reshape(-1, 2)
    assert points.shape == (625, 2)
    assert client.get(f"/api/data/{dataset_id}/objective-space",
                      params={"source": "cost"}).status_code == 404


def test_cost_requires_request_and_served(client):
    dataset_id = compute(client, BISPHERE, [25, 25], ["cost"])
    payload = client.get(f"/api/data/{dataset_id}/cost").json()
    t = decode_f8(payload["t_b64"])
    assert t.shape == (625,)
    assert client.get(f"/api/data/{dataset_id}/heatmap").status_code == 404


def test_catalog_responsive_while_computing(client):
    response = client.post("/api/compute", json={
        "spec": {"family": "peaks", "p": 2, "k": 2, "params": {}},
        "resolution": [220, 220], "methods": ["heatmap", "plot"]})
    dataset_id = response.json()["id"]
    t0 = time.time()
    catalog = client.get("/api/problems")
    elapsed = time.time() - t0
    assert catalog.status_code == 200
    assert elapsed < 1.0
    wait_ready(client, dataset_id)


def test_cache_serves_identical_bytes(client):
    dataset_id = compute(client, BISPHERE, [30, 30], ["heatmap"])
    first = client.get(f"/api/data/{dataset_id}/heatmap").json()
    again = client.get(f"/api/data/{dataset_id}/heatmap").json()
    assert first == again
    # a fresh manager computing the same request produces the same bytes
    other = JobManager(workers=1)
    with TestClient(create_app(other)) as c2:
        second_id = compute(c2, BISPHERE, [30, 30], ["heatmap"])
        assert second_id == dataset_id
        fresh = c2.get(f"/api/data/{dataset_id}/heatmap").json()
    assert fresh == first


def test_disk_spill_roundtrip(tmp_path):
    manager = JobManager(workers=1, cache_dir=str(tmp_path))
    with TestClient(create_app(manager)) as client:
        client.manager = manager
        dataset_id = compute(client, BISPHERE, [20, 20], ["heatmap", "plot"])
        want = client.get(f"/api/data/{dataset_id}/plot").json()
        assert (tmp_path / dataset_id / "meta.json").exists()
        # drop the in-memory entry; the dataset must come back from disk
        manager._cache.clear()
        again = client.get(f"/api/data/{dataset_id}/plot").json()
    assert want == again


def test_export_endpoints(client):
    dataset_id = compute(client, BISPHERE, [20, 20], ["heatmap", "plot"])
    ppm = client.get(f"/api/data/{dataset_id}/export/plot.ppm")
    assert ppm.status_code == 200
    assert ppm.content.startswith(b"P6\n20 20\n255\n")
    mopf = client.get(f"/api/data/{dataset_id}/export/heatmap.mopf")
    assert mopf.content[:4] == b"MOPF"
    assert client.get(f"/api/data/{dataset_id}/export/cost.ppm").status_code == 404


def test_dashboard_served_from_same_origin():
    import pathlib

    frontend = pathlib.Path(__file__).parents[1] / "frontend"
    if not (frontend / "index.html").exists():
        pytest.skip("frontend not present")
    app = create_app(JobManager(workers=1), frontend_dir=frontend)
    with TestClient(app) as client:
        index = client.get("/")
        assert index.status_code == 200
        assert b"<canvas" in index.content
        assert client.get("/api/problems").status_code == 200

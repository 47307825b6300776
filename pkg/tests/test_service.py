import io
import struct

import numpy as np
import pytest
from fastapi.testclient import TestClient

from meshgonio.mesh import save_ply
from meshgonio.service import create_app
from meshgonio.shapes import WedgeSpec, make_wedge


def wedge_bytes(angle=90, vps=2000):
    mesh, _ = make_wedge(WedgeSpec(angle, vertices_per_side=vps))
    buf = io.BytesIO()
    save_ply(mesh, buf)
    return buf.getvalue(), mesh


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture(scope="module")
def handle(client):
    body, mesh = wedge_bytes()
    resp = client.post("/meshes", content=body,
                       headers={"x-mesh-name": "wedge90.ply"})
    assert resp.status_code == 201
    payload = resp.json()
    assert payload["name"] == "wedge90"
    assert payload["vertex_count"] == mesh.num_vertices
    assert payload["face_count"] == mesh.num_faces
    return payload["id"]


PREVIEW = {"x": 0.5, "y": 0.0, "z": 0.0, "radius": 0.3,
           "lambda": 2.0, "metric": "euclidean"}


class TestBasics:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["version"]

    def test_listing_contains_upload(self, client, handle):
        ids = [m["id"] for m in client.get("/meshes").json()]
        assert handle in ids

    def test_duplicate_upload_distinct_handles(self, client, handle):
        body, _ = wedge_bytes(vps=200)
        other = client.post("/meshes", content=body).json()["id"]
        assert other != handle

    def test_truncated_ply_is_400(self, client):
        body, _ = wedge_bytes(vps=200)
        resp = client.post("/meshes", content=body[: len(body) // 2])
        assert resp.status_code == 400
        assert resp.json()["reason"] == "ParseError"

    def test_unknown_mesh_404(self, client):
        assert client.get("/meshes/deadbeef/geometry").status_code == 404
        assert client.post("/meshes/deadbeef/preview",
                           json=PREVIEW).status_code == 404


class TestGeometry:
    def test_binary_layout(self, client, handle):
        raw = client.get(f"/meshes/{handle}/geometry").content
        v, f = struct.unpack_from("<II", raw)
        assert len(raw) == 8 + 12 * v + 12 * f + 12 * v
        pos = np.frombuffer(raw, dtype="<f4", count=3 * v, offset=8)
        faces = np.frombuffer(raw, dtype="<u4", count=3 * f, offset=8 + 12 * v)
        normals = np.frombuffer(raw, dtype="<f4", count=3 * v,
                                offset=8 + 12 * v + 12 * f)
        assert faces.max() < v
        assert np.isfinite(pos).all()
        norms = np.linalg.norm(normals.reshape(-1, 3), axis=1)
        assert np.allclose(norms, 1.0, atol=1e-3)


class TestPreview:
    def test_right_angle(self, client, handle):
        body = client.post(f"/meshes/{handle}/preview", json=PREVIEW).json()
        assert body["theta_deg"] == pytest.approx(90.0, abs=0.5)
        assert body["n_plus"] >= 3 and body["n_minus"] >= 3
        assert len(body["indices"]) == len(body["labels"])
        assert set(body["labels"]) == {-1, 1}
        assert body["snap_distance"] >= 0

    def test_deterministic(self, client, handle):
        a = client.post(f"/meshes/{handle}/preview", json=PREVIEW).json()
        b = client.post(f"/meshes/{handle}/preview", json=PREVIEW).json()
        assert a == b

    def test_geodesic_default_metric(self, client, handle):
        req = {k: v for k, v in PREVIEW.items() if k != "metric"}
        body = client.post(f"/meshes/{handle}/preview", json=req).json()
        assert body["theta_deg"] == pytest.approx(90.0, abs=0.5)

    def test_seed_addressing(self, client, handle):
        via_point = client.post(f"/meshes/{handle}/preview",
                                json=PREVIEW).json()
        body = client.post(f"/meshes/{handle}/preview",
                           json={"seed": via_point["indices"][0],
                                 "radius": 0.3, "metric": "euclidean"}).json()
        assert "theta_deg" in body

    def test_negative_lambda_rejected(self, client, handle):
        bad = dict(PREVIEW, **{"lambda": -1.0})
        assert client.post(f"/meshes/{handle}/preview",
                           json=bad).status_code == 422

    def test_tiny_radius_domain_error(self, client, handle):
        bad = dict(PREVIEW, radius=1e-6)
        resp = client.post(f"/meshes/{handle}/preview", json=bad)
        assert resp.status_code == 422
        assert resp.json()["reason"] in ("SnapTooFar", "PatchTooSmall")

    def test_missing_location(self, client, handle):
        resp = client.post(f"/meshes/{handle}/preview",
                           json={"radius": 0.3})
        assert resp.status_code == 422
        assert resp.json()["reason"] == "InvalidParams"


class TestCommit:
    def test_commit_matches_preview_and_palette_advances(self, client):
        body, _ = wedge_bytes()
        h = client.post("/meshes", content=body).json()["id"]
        preview = client.post(f"/meshes/{h}/preview", json=PREVIEW).json()
        rec1 = client.post(f"/meshes/{h}/measurements", json=PREVIEW).json()
        assert rec1["id"] == 1
        assert rec1["palette"] == 0
        assert rec1["theta_deg"] == preview["theta_deg"]
        assert rec1["n"] == preview["n_plus"] + preview["n_minus"]
        other = dict(PREVIEW, x=0.7)
        rec2 = client.post(f"/meshes/{h}/measurements", json=other).json()
        assert rec2["id"] == 2
        assert rec2["palette"] == 1

        csv_text = client.get(f"/meshes/{h}/measurements.csv").text
        lines = csv_text.strip().split("\n")
        assert len(lines) == 3
        assert lines[0].startswith("id,mesh,method")

    def test_sessions_are_per_mesh(self, client, handle):
        body, _ = wedge_bytes(vps=200)
        h = client.post("/meshes", content=body).json()["id"]
        csv_text = client.get(f"/meshes/{h}/measurements.csv").text
        assert len(csv_text.strip().split("\n")) == 1  # header only


class TestLimits:
    def test_upload_cap(self):
        with TestClient(create_app(max_upload_bytes=100)) as small:
            body, _ = wedge_bytes(vps=200)
            resp = small.post("/meshes", content=body)
            assert resp.status_code == 413
            assert resp.json()["reason"] == "TooLarge"

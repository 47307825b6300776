"""HTTP API for the browser UI: upload meshes, preview segmentations
while tuning, commit measurements, download the session CSV."""

from __future__ import annotations

import struct
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .core import MeasurementParams, measure, preview_segmentation
from .errors import GoniometerError, InvalidParams, ParseError
from .mesh import KnnGraph, TriangleMesh, build_knn_graph, load_mesh
from .patch import EUCLIDEAN, GEODESIC, extract_patch_by_point, extract_patch_by_seed
from .session import Session, export_csv_text

DEFAULT_MAX_UPLOAD = 256 * 1024 * 1024


@dataclass
class MeshEntry:
    mesh: TriangleMesh
    graph: KnnGraph
    session: Session


class PreviewRequest(BaseModel):
    x: float | None = None
    y: float | None = None
    z: float | None = None
    seed: int | None = None
    radius: float = Field(gt=0)
    lam: float = Field(default=2.0, ge=0, alias="lambda")
    metric: str = GEODESIC
    method: str = "xyz"

    model_config = {"populate_by_name": True}


def _round_theta(theta: float) -> float:
    return round(theta, 4)


def create_app(mesh_dir: str | None = None, static_dir: str | None = None,
               knn: int = 10,
               max_upload_bytes: int = DEFAULT_MAX_UPLOAD) -> FastAPI:
    app = FastAPI(title="meshgonio", version=__version__)
    meshes: dict[str, MeshEntry] = {}
    table_lock = threading.Lock()

    def _register(mesh: TriangleMesh) -> tuple[str, MeshEntry]:
        entry = MeshEntry(mesh=mesh, graph=build_knn_graph(mesh, knn),
                          session=Session(mesh.name))
        handle = uuid.uuid4().hex[:16]
        with table_lock:
            meshes[handle] = entry
        return handle, entry

    def _handle_payload(handle: str, entry: MeshEntry) -> dict:
        lo, hi = entry.mesh.bounding_box()
        return {
            "id": handle,
            "name": entry.mesh.name,
            "vertex_count": entry.mesh.num_vertices,
            "face_count": entry.mesh.num_faces,
            "bounding_box": {"min": lo.tolist(), "max": hi.tolist()},
        }

    if mesh_dir:
        for path in sorted(Path(mesh_dir).iterdir()):
            if path.suffix.lower() in (".ply", ".obj"):
                _register(load_mesh(path, knn=knn))

    @app.exception_handler(GoniometerError)
    async def _domain_error(_request, exc: GoniometerError):
        status = 400 if isinstance(exc, ParseError) else 422
        return JSONResponse(status_code=status,
                            content={"reason": exc.code, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/meshes")
    def list_meshes():
        with table_lock:
            return [_handle_payload(h, e) for h, e in meshes.items()]

    @app.post("/meshes", status_code=201)
    async def upload_mesh(request: Request):
        body = await request.body()
        if len(body) > max_upload_bytes:
            return JSONResponse(status_code=413,
                                content={"reason": "TooLarge",
                                         "detail": "upload exceeds size limit"})
        name = request.headers.get("x-mesh-name", "upload")
        fmt = "ply" if body[:3] == b"ply" else "obj"
        mesh = load_mesh(body, fmt, knn=knn)
        mesh.name = Path(name).stem or "upload"
        handle, entry = _register(mesh)
        return _handle_payload(handle, entry)

    def _lookup(mesh_id: str) -> MeshEntry | None:
        with table_lock:
            return meshes.get(mesh_id)

    @app.get("/meshes/{mesh_id}/geometry")
    def geometry(mesh_id: str):
        entry = _lookup(mesh_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"reason": "UnknownMesh"})
        m = entry.mesh
        # little-endian: uint32 V, uint32 F, then positions f32,
        # faces u32, normals f32
        payload = (struct.pack("<II", m.num_vertices, m.num_faces)
                   + m.vertices.astype("<f4").tobytes()
                   + m.faces.astype("<u4").tobytes()
                   + m.normals.astype("<f4").tobytes())
        return Response(content=payload, media_type="application/octet-stream")

    def _run(entry: MeshEntry, req: PreviewRequest):
        if req.metric not in (GEODESIC, EUCLIDEAN):
            raise InvalidParams(f"unknown metric {req.metric!r}")
        params = MeasurementParams(lam=req.lam, metric=req.metric,
                                   radius=req.radius)
        if req.seed is not None:
            patch = extract_patch_by_seed(entry.mesh, entry.graph, req.seed,
                                          req.radius, req.metric)
        elif None not in (req.x, req.y, req.z):
            patch = extract_patch_by_point(entry.mesh, entry.graph,
                                           (req.x, req.y, req.z),
                                           req.radius, req.metric)
        else:
            raise InvalidParams("provide either seed or x,y,z")
        return preview_segmentation(patch, params)

    @app.post("/meshes/{mesh_id}/preview")
    def preview(mesh_id: str, req: PreviewRequest):
        entry = _lookup(mesh_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"reason": "UnknownMesh"})
        result = _run(entry, req)
        return {
            "theta_deg": _round_theta(result.theta),
            "fit": result.fit,
            "n_plus": result.n_plus,
            "n_minus": result.n_minus,
            "indices": result.patch.indices.tolist(),
            "labels": result.labels.tolist(),
            "snap_distance": result.patch.snap_distance,
        }

    @app.post("/meshes/{mesh_id}/measurements")
    def commit(mesh_id: str, req: PreviewRequest):
        entry = _lookup(mesh_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"reason": "UnknownMesh"})
        result = _run(entry, req)
        method = req.method if req.method in ("drag", "xyz") else "xyz"
        rec = entry.session.record(result, method=method)
        return {
            "id": rec.id,
            "mesh": rec.mesh,
            "method": rec.method,
            "x": rec.x, "y": rec.y, "z": rec.z,
            "radius": rec.radius,
            "metric": rec.metric,
            "lambda": rec.lam,
            "n": rec.n,
            "n_plus": rec.n_plus,
            "n_minus": rec.n_minus,
            "theta_deg": _round_theta(rec.theta_deg),
            "fit": rec.fit,
            "palette": rec.palette,
            "timestamp": rec.timestamp.isoformat(),
            "indices": result.patch.indices.tolist(),
            "labels": result.labels.tolist(),
        }

    @app.get("/meshes/{mesh_id}/measurements.csv")
    def measurements_csv(mesh_id: str):
        entry = _lookup(mesh_id)
        if entry is None:
            return JSONResponse(status_code=404,
                                content={"reason": "UnknownMesh"})
        return Response(content=export_csv_text(entry.session),
                        media_type="text/csv")

    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")

    return app

"""Patch selection: all vertices within radius r of a seed, geodesic or
Euclidean, plus the center/radius the measurement uses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import PatchTooSmall, SeedOutOfRange, SnapTooFar
from .mesh import KnnGraph, TriangleMesh

DEFAULT_MIN_PATCH = 6

GEODESIC = "geodesic"
EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class Patch:
    """Vertex subset within radius r of a seed vertex.

    ``positions``/``normals`` are rows aligned with ``indices`` (ascending
    vertex index).  ``center`` is the seed vertex position and ``radius``
    the largest distance from it to any member under ``metric``.
    """

    indices: np.ndarray    # (n,) int64, ascending
    positions: np.ndarray  # (n, 3)
    normals: np.ndarray    # (n, 3) unit
    center: np.ndarray     # (3,)
    radius: float
    metric: str
    seed: int
    mesh_name: str = ""
    snap_distance: float = 0.0

    @property
    def size(self) -> int:
        return len(self.indices)


def _check_metric(metric: str) -> None:
    if metric not in (GEODESIC, EUCLIDEAN):
        raise ValueError(f"metric must be {GEODESIC!r} or {EUCLIDEAN!r}, "
                         f"got {metric!r}")


def extract_patch_by_seed(mesh: TriangleMesh, graph: KnnGraph | None,
                          seed: int, r: float, metric: str = GEODESIC,
                          *, n_min: int = DEFAULT_MIN_PATCH,
                          snap_distance: float = 0.0) -> Patch:
    """All vertices within distance r of the seed vertex.

    Geodesic distance runs Dijkstra over the k-NN graph (required); the
    Euclidean metric needs no graph.
    """
    _check_metric(metric)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    n = mesh.num_vertices
    if not 0 <= seed < n:
        raise SeedOutOfRange(f"seed {seed} outside mesh of {n} vertices")
    if metric == GEODESIC:
        if graph is None:
            raise ValueError("geodesic metric requires a k-NN graph")
        dist = dijkstra(graph.matrix, directed=False, indices=seed, limit=r)
        members = np.flatnonzero(dist <= r)
        radius = float(dist[members].max())
    else:
        d = np.linalg.norm(mesh.vertices - mesh.vertices[seed], axis=1)
        members = np.flatnonzero(d <= r)
        radius = float(d[members].max())
    if len(members) < n_min:
        raise PatchTooSmall(
            f"{len(members)} vertices within r={r}; need at least {n_min}")
    if mesh.normals is None:
        raise ValueError("mesh has no normals; estimate them first")
    return Patch(
        indices=members.astype(np.int64),
        positions=mesh.vertices[members].copy(),
        normals=mesh.normals[members].copy(),
        center=mesh.vertices[seed].copy(),
        radius=radius,
        metric=metric,
        seed=int(seed),
        mesh_name=mesh.name,
        snap_distance=snap_distance,
    )


def extract_patch_by_point(mesh: TriangleMesh, graph: KnnGraph | None,
                           point, r: float, metric: str = GEODESIC,
                           *, n_min: int = DEFAULT_MIN_PATCH) -> Patch:
    """Snap a free point to the nearest vertex (ties to the lowest index)
    and extract the patch there; the snap distance is kept on the patch."""
    _check_metric(metric)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    point = np.asarray(point, dtype=np.float64).reshape(3)
    d = np.linalg.norm(mesh.vertices - point, axis=1)
    seed = int(np.argmin(d))  # first minimum -> lowest index on ties
    snap = float(d[seed])
    if snap > r:
        raise SnapTooFar(
            f"nearest vertex is {snap:.6g} away, beyond radius {r:.6g}")
    return extract_patch_by_seed(mesh, graph, seed, r, metric,
                                 n_min=n_min, snap_distance=snap)

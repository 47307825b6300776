"""Mesh data model, PLY/OBJ ingestion, normal estimation, k-NN graph.

A loaded mesh is immutable by convention: operations that change color
layers return new arrays instead of mutating shared state.
"""

from __future__ import annotations

import io
import struct
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.spatial import cKDTree

from .errors import (
    DegenerateGeometry,
    EmptyMesh,
    ParseError,
    TooFewVertices,
    UnsupportedFormat,
)
from .linalg import pca_min_component

DEFAULT_KNN = 10


@dataclass
class TriangleMesh:
    """Vertices, faces, unit outward normals, optional per-vertex colors.

    ``faces`` may be empty (point cloud).  Normals are one per vertex and
    unit length; colors are uint8 RGB.
    """

    vertices: np.ndarray                 # (V, 3) float64
    faces: np.ndarray                    # (F, 3) int64, possibly empty
    normals: np.ndarray | None = None    # (V, 3) float64 unit
    colors: np.ndarray | None = None     # (V, 3) uint8
    name: str = ""

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        v = len(self.vertices)
        if self.faces.size:
            if self.faces.min() < 0 or self.faces.max() >= v:
                raise ParseError("face index out of range")
            good = (
                (self.faces[:, 0] != self.faces[:, 1])
                & (self.faces[:, 1] != self.faces[:, 2])
                & (self.faces[:, 0] != self.faces[:, 2])
            )
            if not good.all():
                warnings.warn(
                    f"dropping {int((~good).sum())} degenerate face(s)",
                    stacklevel=2,
                )
                self.faces = self.faces[good]
        if self.normals is not None:
            n = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
            norms = np.linalg.norm(n, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            self.normals = n / norms
        if self.colors is not None:
            self.colors = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def with_colors(self, colors: np.ndarray) -> "TriangleMesh":
        return replace(self, colors=np.asarray(colors, dtype=np.uint8))


@dataclass(frozen=True)
class KnnGraph:
    """Symmetrized k-NN adjacency (plus mesh edges) with Euclidean lengths."""

    matrix: csr_matrix
    k: int

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        row = self.matrix.getrow(i)
        return list(zip(row.indices.tolist(), row.data.tolist()))


# --------------------------------------------------------------------------
# PLY
# --------------------------------------------------------------------------

_PLY_SCALARS = {
    "char": "b", "int8": "b",
    "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h",
    "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i",
    "uint": "I", "uint32": "I",
    "float": "f", "float32": "f",
    "double": "d", "float64": "d",
}


def _parse_ply_header(lines):
    """Returns (fmt, elements) where elements is a list of
    (name, count, [properties]); a property is ('scalar', type, name) or
    ('list', count_type, item_type, name)."""
    if not lines or lines[0].strip() != "ply":
        raise ParseError("line 1: missing 'ply' magic")
    fmt = None
    elements = []
    saw_end = False
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        tok = line.split()
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] not in ("ascii", "binary_little_endian"):
                raise ParseError(f"line {lineno}: unsupported format {line!r}")
            fmt = tok[1]
        elif tok[0] == "element":
            if len(tok) != 3:
                raise ParseError(f"line {lineno}: malformed element {line!r}")
            elements.append((tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            if not elements:
                raise ParseError(f"line {lineno}: property before any element")
            if tok[1] == "list":
                if len(tok) != 5:
                    raise ParseError(f"line {lineno}: malformed list property")
                elements[-1][2].append(("list", tok[2], tok[3], tok[4]))
            else:
                if len(tok) != 3 or tok[1] not in _PLY_SCALARS:
                    raise ParseError(f"line {lineno}: bad property {line!r}")
                elements[-1][2].append(("scalar", tok[1], tok[2]))
        elif tok[0] == "end_header":
            saw_end = True
            break
        else:
            raise ParseError(f"line {lineno}: unexpected header line {line!r}")
    if not saw_end:
        raise ParseError("truncated header: missing end_header")
    if fmt is None:
        raise ParseError("truncated header: missing format line")
    if not any(name == "vertex" for name, _, _ in elements):
        raise ParseError("header missing element vertex")
    return fmt, elements


def _load_ply(data: bytes, name: str) -> TriangleMesh:
    end = data.find(b"end_header")
    if end < 0:
        raise ParseError("truncated header: missing end_header")
    nl = data.find(b"\n", end)
    if nl < 0:
        raise ParseError("truncated header: no newline after end_header")
    header_text = data[:nl].decode("ascii", errors="replace")
    fmt, elements = _parse_ply_header(header_text.splitlines())
    body = data[nl + 1:]

    tables: dict[str, dict] = {}
    if fmt == "ascii":
        rows = body.decode("ascii", errors="replace").splitlines()
        cursor = 0
        for ename, count, props in elements:
            cols: dict[str, list] = {p[-1]: [] for p in props}
            for r in range(count):
                if cursor >= len(rows):
                    raise ParseError(
                        f"element {ename}: expected {count} rows, file ends at {r}")
                tok = rows[cursor].split()
                cursor += 1
                ti = 0
                for p in props:
                    if p[0] == "scalar":
                        if ti >= len(tok):
                            raise ParseError(
                                f"element {ename} row {r}: missing value for {p[2]}")
                        cols[p[2]].append(float(tok[ti]))
                        ti += 1
                    else:
                        cnt = int(tok[ti]); ti += 1
                        cols[p[3]].append([int(x) for x in tok[ti:ti + cnt]])
                        ti += cnt
            tables[ename] = cols
    else:
        off = 0
        for ename, count, props in elements:
            cols = {p[-1]: [] for p in props}
            fixed = all(p[0] == "scalar" for p in props)
            if fixed:
                fmtstr = "<" + "".join(_PLY_SCALARS[p[1]] for p in props)
                size = struct.calcsize(fmtstr)
                need = size * count
                if len(body) - off < need:
                    raise ParseError(
                        f"element {ename}: body truncated at offset {off}")
                arr = np.frombuffer(body, dtype=np.dtype(
                    [(p[2], "<" + _PLY_SCALARS[p[1]]) for p in props]),
                    count=count, offset=off)
                for p in props:
                    cols[p[2]] = arr[p[2]].astype(np.float64)
                off += need
            else:
                for r in range(count):
                    for p in props:
                        if p[0] == "scalar":
                            s = struct.calcsize(_PLY_SCALARS[p[1]])
                            if len(body) - off < s:
                                raise ParseError(
                                    f"element {ename}: truncated at offset {off}")
                            (val,) = struct.unpack_from(
                                "<" + _PLY_SCALARS[p[1]], body, off)
                            off += s
                            cols[p[2]].append(val)
                        else:
                            cs = struct.calcsize(_PLY_SCALARS[p[1]])
                            if len(body) - off < cs:
                                raise ParseError(
                                    f"element {ename}: truncated at offset {off}")
                            (cnt,) = struct.unpack_from(
                                "<" + _PLY_SCALARS[p[1]], body, off)
                            off += cs
                            isz = struct.calcsize(_PLY_SCALARS[p[2]])
                            if len(body) - off < isz * cnt:
                                raise ParseError(
                                    f"element {ename}: truncated at offset {off}")
                            vals = struct.unpack_from(
                                "<" + str(cnt) + _PLY_SCALARS[p[2]], body, off)
                            off += isz * cnt
                            cols[p[3]].append(list(vals))
            tables[ename] = cols

    vt = tables["vertex"]
    for ax in ("x", "y", "z"):
        if ax not in vt:
            raise ParseError(f"element vertex missing property {ax}")
    verts = np.column_stack([np.asarray(vt["x"], dtype=np.float64),
                             np.asarray(vt["y"], dtype=np.float64),
                             np.asarray(vt["z"], dtype=np.float64)])
    if len(verts) == 0:
        raise EmptyMesh("file contains no vertices")

    normals = None
    if all(k in vt for k in ("nx", "ny", "nz")):
        normals = np.column_stack([np.asarray(vt[k], dtype=np.float64)
                                   for k in ("nx", "ny", "nz")])
    colors = None
    if all(k in vt for k in ("red", "green", "blue")):
        colors = np.column_stack([np.asarray(vt[k]) for k in
                                  ("red", "green", "blue")]).astype(np.uint8)

    faces = []
    if "face" in tables:
        ft = tables["face"]
        key = "vertex_indices" if "vertex_indices" in ft else (
            "vertex_index" if "vertex_index" in ft else None)
        if key is not None:
            for poly in ft[key]:
                for j in range(1, len(poly) - 1):  # fan triangulation
                    faces.append((poly[0], poly[j], poly[j + 1]))
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(verts, faces, normals=normals, colors=colors, name=name)


def _load_obj(data: bytes, name: str) -> TriangleMesh:
    verts, vns, faces = [], [], []
    normal_of: dict[int, int] = {}
    for lineno, raw in enumerate(data.decode("utf-8", errors="replace").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            if tok[0] == "v":
                verts.append([float(tok[1]), float(tok[2]), float(tok[3])])
            elif tok[0] == "vn":
                vns.append([float(tok[1]), float(tok[2]), float(tok[3])])
            elif tok[0] == "f":
                idx = []
                for t in tok[1:]:
                    parts = t.split("/")
                    vi = int(parts[0])
                    vi = vi - 1 if vi > 0 else len(verts) + vi
                    idx.append(vi)
                    if len(parts) == 3 and parts[2]:
                        ni = int(parts[2])
                        normal_of[vi] = ni - 1 if ni > 0 else len(vns) + ni
                for j in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[j], idx[j + 1]))
        except (ValueError, IndexError) as exc:
            raise ParseError(f"line {lineno}: {raw!r}") from exc
    if not verts:
        raise EmptyMesh("file contains no vertices")
    verts = np.asarray(verts, dtype=np.float64)
    normals = None
    if vns and len(normal_of) == len(verts):
        normals = np.asarray(vns, dtype=np.float64)[
            [normal_of[i] for i in range(len(verts))]]
    return TriangleMesh(verts, np.asarray(faces, dtype=np.int64).reshape(-1, 3),
                        normals=normals, name=name)


def load_mesh(source, fmt: str | None = None, *, knn: int = DEFAULT_KNN,
              estimate_missing_normals: bool = True) -> TriangleMesh:
    """Load a PLY (ascii or binary-little-endian) or OBJ mesh.

    ``source`` may be bytes, a path, or a binary file object.  If the file
    carries no normals they are estimated (area-weighted from faces, or
    local PCA for point clouds).
    """
    name = ""
    if isinstance(source, (str, Path)):
        path = Path(source)
        name = path.stem
        data = path.read_bytes()
        if fmt is None:
            ext = path.suffix.lower().lstrip(".")
            fmt = ext if ext in ("ply", "obj") else None
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if fmt is None:
        fmt = "ply" if data[:3] == b"ply" else "obj"
    if fmt == "ply":
        mesh = _load_ply(data, name)
    elif fmt == "obj":
        mesh = _load_obj(data, name)
    else:
        raise UnsupportedFormat(f"unknown mesh format {fmt!r}")
    if mesh.normals is None and estimate_missing_normals:
        mesh.normals = estimate_normals(mesh, k=knn)
    return mesh


def save_ply(mesh: TriangleMesh, sink, *, binary: bool = True) -> None:
    """Write a PLY with whatever layers the mesh carries.

    Binary output stores coordinates as doubles so a round trip through
    ``load_mesh`` is bit-exact.
    """
    own = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "wb")
        own = True
    try:
        v = mesh.num_vertices
        f = mesh.num_faces
        has_n = mesh.normals is not None
        has_c = mesh.colors is not None
        ctype = "double" if binary else "float"
        lines = ["ply",
                 "format binary_little_endian 1.0" if binary else "format ascii 1.0",
                 f"element vertex {v}",
                 f"property {ctype} x", f"property {ctype} y", f"property {ctype} z"]
        if has_n:
            lines += [f"property {ctype} nx", f"property {ctype} ny",
                      f"property {ctype} nz"]
        if has_c:
            lines += ["property uchar red", "property uchar green",
                      "property uchar blue"]
        lines += [f"element face {f}",
                  "property list uchar int vertex_indices", "end_header"]
        sink.write(("\n".join(lines) + "\n").encode("ascii"))
        if binary:
            ncols = 3 + (3 if has_n else 0)
            row = np.empty((v, ncols), dtype="<f8")
            row[:, 0:3] = mesh.vertices
            if has_n:
                row[:, 3:6] = mesh.normals
            if has_c:
                dt = np.dtype([("d", "<f8", (ncols,)), ("c", "u1", (3,))])
                rec = np.empty(v, dtype=dt)
                rec["d"] = row
                rec["c"] = mesh.colors
                sink.write(rec.tobytes())
            else:
                sink.write(row.tobytes())
            if f:
                dt = np.dtype([("n", "u1"), ("i", "<i4", (3,))])
                rec = np.empty(f, dtype=dt)
                rec["n"] = 3
                rec["i"] = mesh.faces
                sink.write(rec.tobytes())
        else:
            buf = io.StringIO()
            for i in range(v):
                parts = [f"{c:.9g}" for c in mesh.vertices[i]]
                if has_n:
                    parts += [f"{c:.9g}" for c in mesh.normals[i]]
                if has_c:
                    parts += [str(int(c)) for c in mesh.colors[i]]
                buf.write(" ".join(parts) + "\n")
            for i in range(f):
                buf.write("3 " + " ".join(str(int(j)) for j in mesh.faces[i]) + "\n")
            sink.write(buf.getvalue().encode("ascii"))
    finally:
        if own:
            sink.close()


def export_colored_mesh(mesh: TriangleMesh, sink, *, binary: bool = True) -> None:
    """Write a PLY carrying per-vertex red/green/blue; requires colors."""
    if mesh.colors is None:
        raise ValueError("mesh has no color layer to export")
    save_ply(mesh, sink, binary=binary)


# --------------------------------------------------------------------------
# Normals
# --------------------------------------------------------------------------

def _orient_outward(normals: np.ndarray, verts: np.ndarray,
                    graph: KnnGraph | None = None,
                    propagate: bool = False) -> np.ndarray:
    """Make per-vertex sign consistent (optionally BFS over the graph) and
    flip globally so the majority points away from the centroid."""
    normals = normals.copy()
    if propagate and graph is not None:
        n = len(verts)
        seen = np.zeros(n, dtype=bool)
        indptr, indices = graph.matrix.indptr, graph.matrix.indices
        for start in range(n):
            if seen[start]:
                continue
            seen[start] = True
            stack = [start]
            while stack:
                i = stack.pop()
                for j in indices[indptr[i]:indptr[i + 1]]:
                    if not seen[j]:
                        seen[j] = True
                        if normals[i] @ normals[j] < 0:
                            normals[j] = -normals[j]
                        stack.append(j)
    centroid = verts.mean(axis=0)
    outward = np.einsum("ij,ij->i", normals, verts - centroid)
    if (outward > 0).sum() * 2 < len(verts):
        normals = -normals
    return normals


def estimate_normals(mesh: TriangleMesh, *, k: int = DEFAULT_KNN,
                     graph: KnnGraph | None = None) -> np.ndarray:
    """Per-vertex unit outward normals.

    Triangulated meshes: area-weighted average of incident face normals,
    then a global outward flip (majority positive dot with vertex minus
    centroid).  Point clouds: local PCA over the k nearest neighbors with
    sign propagation along the k-NN graph before the outward flip.
    """
    verts = mesh.vertices
    n = len(verts)
    if mesh.faces.size:
        f = mesh.faces
        fn = np.cross(verts[f[:, 1]] - verts[f[:, 0]],
                      verts[f[:, 2]] - verts[f[:, 0]])  # length = 2*area
        acc = np.zeros((n, 3))
        for c in range(3):
            np.add.at(acc, f[:, c], fn)
        norms = np.linalg.norm(acc, axis=1)
        bad = np.flatnonzero(norms < 1e-300)
        if bad.size:
            tree = cKDTree(verts)
            for i in bad:
                kk = min(k + 1, n)
                _, nb = tree.query(verts[i], k=kk)
                nb = np.atleast_1d(nb)
                pts = verts[nb]
                if len(np.unique(pts.round(12), axis=0)) < 3:
                    raise DegenerateGeometry(
                        f"vertex {i}: zero-area triangles and no usable neighbors")
                v, _ = pca_min_component(pts)
                acc[i] = v
                norms[i] = 1.0
        normals = acc / norms[:, None]
        return _orient_outward(normals, verts)
    # point-cloud path
    if n < k + 1:
        raise TooFewVertices(f"point cloud needs > k={k} vertices, got {n}")
    tree = cKDTree(verts)
    _, nb = tree.query(verts, k=k + 1)
    normals = np.empty((n, 3))
    for i in range(n):
        v, _ = pca_min_component(verts[nb[i]])
        normals[i] = v
    if graph is None:
        graph = build_knn_graph(mesh, k)
    return _orient_outward(normals, verts, graph, propagate=True)


# --------------------------------------------------------------------------
# k-NN graph
# --------------------------------------------------------------------------

def build_knn_graph(mesh: TriangleMesh, k: int = DEFAULT_KNN) -> KnnGraph:
    """Symmetrized k-NN graph over the vertices; mesh edges are merged in
    when faces exist.  Distance ties resolve to the lower vertex index."""
    verts = mesh.vertices
    n = len(verts)
    if k < 1 or n <= k:
        raise TooFewVertices(f"need more than k={k} vertices, got {n}")
    tree = cKDTree(verts)
    extra = min(n, k + 5)  # headroom so index tie-break sees tied candidates
    dist, idx = tree.query(verts, k=extra)
    rows, cols = [], []
    for i in range(n):
        order = np.lexsort((idx[i], dist[i]))
        picked = [j for j in idx[i][order] if j != i][:k]
        rows.extend([i] * len(picked))
        cols.extend(picked)
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    if mesh.faces.size:
        f = mesh.faces
        er = np.concatenate([f[:, 0], f[:, 1], f[:, 2]])
        ec = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
        rows = np.concatenate([rows, er])
        cols = np.concatenate([cols, ec])
    # symmetrize and drop duplicates
    a = np.minimum(rows, cols)
    b = np.maximum(rows, cols)
    pairs = np.unique(np.column_stack([a, b]), axis=0)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    d = np.linalg.norm(verts[pairs[:, 0]] - verts[pairs[:, 1]], axis=1)
    r = np.concatenate([pairs[:, 0], pairs[:, 1]])
    c = np.concatenate([pairs[:, 1], pairs[:, 0]])
    m = csr_matrix((np.concatenate([d, d]), (r, c)), shape=(n, n))
    return KnnGraph(matrix=m, k=k)

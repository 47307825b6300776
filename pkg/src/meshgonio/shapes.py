"""Synthetic meshes with analytically known dihedral angles.

These are the verification oracles: straight wedges, wedges whose crease
bends along a circular arc, and rugose (bumpy) wedges for stressing the
segmentation.  All generators are deterministic under a fixed seed, and
the attached normals are the exact analytic ones computed before any
displacement.

No vertex lies exactly on the crease: each face's rows start half a grid
step away and a triangle strip bridges the gap.  That keeps the two sides
exactly balanced and every vertex unambiguously on one face, so ground
truth labels are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .mesh import TriangleMesh


@dataclass(frozen=True)
class WedgeSpec:
    """Two planar grids meeting along a straight crease.

    ``angle_deg`` is the dihedral angle between the faces, in (0, 180];
    180 degenerates to a single flat plane.  Noise displaces vertices
    along their analytic normals by N(0, sigma).
    """

    angle_deg: float
    half_width: float = 1.0
    depth: float = 1.0
    vertices_per_side: int = 400
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.angle_deg <= 180.0):
            raise InvalidSpec(f"angle must be in (0, 180], got {self.angle_deg}")
        if self.half_width <= 0 or self.depth <= 0:
            raise InvalidSpec("half_width and depth must be positive")
        if self.vertices_per_side < 9:
            raise InvalidSpec(
                f"need at least 9 vertices per side, got {self.vertices_per_side}")
        if self.noise_sigma < 0:
            raise InvalidSpec(f"noise sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class GroundTruth:
    """What the generator knows exactly: the dihedral angle and which of
    the two faces each vertex belongs to (1 or 2)."""

    angle_deg: float
    side: np.ndarray  # (V,) uint8 in {1, 2}


def _grid_counts(vertices_per_side: int) -> tuple[int, int]:
    m = max(3, math.ceil(math.sqrt(vertices_per_side)))
    return m, m  # (along crease, across face)


def _strip_faces(row_a: np.ndarray, row_b: np.ndarray) -> list[tuple[int, int, int]]:
    faces = []
    for i in range(len(row_a) - 1):
        faces.append((row_a[i], row_a[i + 1], row_b[i]))
        faces.append((row_b[i], row_a[i + 1], row_b[i + 1]))
    return faces


def _build_two_faces(crease: np.ndarray, u1: np.ndarray, n1: np.ndarray,
                     u2: np.ndarray, n2: np.ndarray,
                     half_width: float, nu: int):
    """Assemble the mesh from per-crease-point frames.

    ``u1``/``u2`` are in-face unit directions away from the crease and
    ``n1``/``n2`` the analytic outward normals; each may be a single
    vector or one row per crease point.
    """
    nx = len(crease)
    u1 = np.broadcast_to(np.asarray(u1, dtype=np.float64), (nx, 3))
    u2 = np.broadcast_to(np.asarray(u2, dtype=np.float64), (nx, 3))
    n1 = np.broadcast_to(np.asarray(n1, dtype=np.float64), (nx, 3))
    n2 = np.broadcast_to(np.asarray(n2, dtype=np.float64), (nx, 3))
    steps = (np.arange(nu) + 0.5) * half_width / nu
    verts, normals, side = [], [], []
    rows1, rows2 = [], []
    nid = 0
    for u, nrm, rows, tag in ((u1, n1, rows1, 1), (u2, n2, rows2, 2)):
        for s in steps:
            verts.append(crease + s * u)
            normals.append(nrm)
            side.append(np.full(nx, tag, dtype=np.uint8))
            rows.append(np.arange(nid, nid + nx))
            nid += nx
    verts = np.vstack(verts)
    normals = np.vstack(normals)
    side = np.concatenate(side)

    faces = []
    faces.extend(_strip_faces(rows1[0], rows2[0]))  # bridge across the crease
    for rows in (rows1, rows2):
        for a, b in zip(rows[:-1], rows[1:]):
            faces.extend(_strip_faces(a, b))
    faces = np.asarray(faces, dtype=np.int64)

    # orient each triangle so its geometric normal agrees with the
    # attached analytic normals (keeps estimate_normals consistent)
    fn = np.cross(verts[faces[:, 1]] - verts[faces[:, 0]],
                  verts[faces[:, 2]] - verts[faces[:, 0]])
    ref = normals[faces[:, 0]] + normals[faces[:, 1]] + normals[faces[:, 2]]
    flip = np.einsum("ij,ij->i", fn, ref) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return verts, normals, side, faces


def make_wedge(spec: WedgeSpec) -> tuple[TriangleMesh, GroundTruth]:
    """Straight wedge: crease along x, faces opening in y at the given
    dihedral angle, apex up.  Returns the mesh (analytic normals
    attached) and the exact ground truth."""
    alpha = math.radians(spec.angle_deg) / 2.0
    nx, nu = _grid_counts(spec.vertices_per_side)
    xs = np.linspace(0.0, spec.depth, nx)
    crease = np.column_stack([xs, np.zeros(nx), np.zeros(nx)])
    u1 = [0.0, math.sin(alpha), -math.cos(alpha)]
    u2 = [0.0, -math.sin(alpha), -math.cos(alpha)]
    n1 = [0.0, math.cos(alpha), math.sin(alpha)]
    n2 = [0.0, -math.cos(alpha), math.sin(alpha)]
    verts, normals, side, faces = _build_two_faces(
        crease, u1, n1, u2, n2, spec.half_width, nu)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        verts = verts + rng.normal(0.0, spec.noise_sigma,
                                   len(verts))[:, None] * normals
    mesh = TriangleMesh(verts, faces, normals=normals.copy(),
                        name=f"wedge{spec.angle_deg:g}")
    return mesh, GroundTruth(spec.angle_deg, side)


def make_curved_ridge(curve_radius: float, angle_deg: float,
                      vertices_per_side: int = 400, *,
                      half_width: float = 1.0, arc_span_deg: float = 60.0,
                      seed: int = 0,
                      noise_sigma: float = 0.0) -> tuple[TriangleMesh, GroundTruth]:
    """Wedge whose crease is a circular arc of the given radius; the local
    dihedral angle is constant along the arc."""
    if curve_radius <= 0:
        raise InvalidSpec(f"curve radius must be positive, got {curve_radius}")
    if not (0.0 < angle_deg <= 180.0):
        raise InvalidSpec(f"angle must be in (0, 180], got {angle_deg}")
    if not (0.0 < arc_span_deg <= 180.0):
        raise InvalidSpec(f"arc span must be in (0, 180], got {arc_span_deg}")
    if vertices_per_side < 9:
        raise InvalidSpec("need at least 9 vertices per side")
    alpha = math.radians(angle_deg) / 2.0
    if half_width * math.sin(alpha) >= curve_radius:
        raise InvalidSpec("inner face would fold through the arc center; "
                          "reduce half_width or increase curve_radius")
    nx, nu = _grid_counts(vertices_per_side)
    span = math.radians(arc_span_deg)
    phi = np.linspace(-span / 2, span / 2, nx)
    rho = np.column_stack([np.cos(phi), np.sin(phi), np.zeros(nx)])
    crease = curve_radius * rho
    z = np.array([0.0, 0.0, 1.0])
    u1 = math.sin(alpha) * rho - math.cos(alpha) * z   # outward face
    u2 = -math.sin(alpha) * rho - math.cos(alpha) * z  # inward face
    n1 = math.cos(alpha) * rho + math.sin(alpha) * z
    n2 = -math.cos(alpha) * rho + math.sin(alpha) * z
    verts, normals, side, faces = _build_two_faces(
        crease, u1, n1, u2, n2, half_width, nu)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        verts = verts + rng.normal(0.0, noise_sigma,
                                   len(verts))[:, None] * normals
    mesh = TriangleMesh(verts, faces, normals=normals.copy(),
                        name=f"curved{angle_deg:g}")
    return mesh, GroundTruth(angle_deg, side)


def make_rugose_wedge(spec: WedgeSpec, amplitude: float,
                      seed: int = 0) -> tuple[TriangleMesh, GroundTruth]:
    """Wedge with a deterministic multi-scale bump field added along the
    analytic normals; amplitude 0 reproduces ``make_wedge`` exactly."""
    if amplitude < 0:
        raise InvalidSpec(f"amplitude must be >= 0, got {amplitude}")
    mesh, truth = make_wedge(spec)
    if amplitude == 0:
        return mesh, truth
    verts = mesh.vertices
    # surface parameters: position along the crease and signed distance
    # from it (sign from the face assignment)
    x = verts[:, 0]
    q = np.hypot(verts[:, 1], verts[:, 2])
    q = np.where(truth.side == 2, -q, q)
    rng = np.random.default_rng(seed)
    bumps = np.zeros(len(verts))
    scale = 1.0 / max(spec.half_width, spec.depth)
    for octave in range(3):
        freq = (2.0 ** octave) * 3.0 * scale
        a, b = rng.normal(size=2)
        ph1, ph2 = rng.uniform(0, 2 * math.pi, size=2)
        bumps += (0.5 ** octave) * (
            np.sin(freq * (a * x + b * q) * 2 * math.pi + ph1)
            * np.sin(freq * (b * x - a * q) * 2 * math.pi + ph2))
    displaced = verts + amplitude * bumps[:, None] * mesh.normals
    rug = TriangleMesh(displaced, mesh.faces.copy(),
                       normals=mesh.normals.copy(),
                       name=f"rugose{spec.angle_deg:g}")
    return rug, truth


def label_accuracy(predicted: np.ndarray, truth_side: np.ndarray) -> float:
    """Fraction of vertices whose predicted side (+1/-1) matches the
    ground-truth partition, scored under the better of the two possible
    side-to-sign assignments (the sign of the binormal is a convention)."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth_side)
    agree = ((predicted > 0) == (truth == 1)).mean()
    return float(max(agree, 1.0 - agree))

"""The measurement itself: build the tangent/normal/binormal frame,
project, split, fit a plane per side, and report the angle and fit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, InvalidParams, SideTooSmall
from .linalg import WithinSsSplit, eigen_sym3, pca_min_component, within_ss_split
from .patch import GEODESIC, Patch

DEFAULT_LAMBDA = 2.0


@dataclass(frozen=True)
class MeasurementParams:
    """Tuning parameter and selection settings for one measurement.

    ``lam`` weights positional offsets against normals in the projection;
    0 clusters on normals alone.
    """

    lam: float = DEFAULT_LAMBDA
    metric: str = GEODESIC
    radius: float = 1.0

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidParams(f"lambda must be >= 0, got {self.lam}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidParams(f"radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class SegmentationFrame:
    """Break-curve tangent t, unit mean normal, binormal b, and the 1-D
    projections with their optimal split."""

    tangent: np.ndarray      # t, unit
    mean_normal: np.ndarray  # unit
    binormal: np.ndarray     # b = t x mean_normal, normalized
    projections: np.ndarray  # (n,)
    split: WithinSsSplit


@dataclass(frozen=True)
class PlaneFitPair:
    """Smallest-variance plane normals and mean squared errors per side."""

    v_minus: np.ndarray
    v_plus: np.ndarray
    eps_minus: float
    eps_plus: float
    n_minus: int
    n_plus: int


@dataclass(frozen=True)
class MeasurementResult:
    """Angle in degrees [0, 180], fit = eps_minus + eps_plus, and the
    per-vertex side labels (+1 where projection >= threshold)."""

    theta: float
    fit: float
    labels: np.ndarray  # (n,) int8, +1 or -1
    frame: SegmentationFrame
    fits: PlaneFitPair
    params: MeasurementParams
    patch: Patch

    @property
    def n_plus(self) -> int:
        return self.fits.n_plus

    @property
    def n_minus(self) -> int:
        return self.fits.n_minus


def _sign(x: float) -> float:
    # sign(0) is +1 by convention
    return -1.0 if x < 0 else 1.0


def angle_between_plane_normals(mean_normal, v_plus, v_minus) -> float:
    """Angle in degrees from the two plane normals, with the signs
    corrected by the mean outward normal so eigenvector sign flips cancel.
    The cosine is clamped to [-1, 1] before arccos."""
    s = _sign(float(mean_normal @ v_plus)) * _sign(float(mean_normal @ v_minus))
    c = min(1.0, max(-1.0, s * float(v_plus @ v_minus)))
    return 180.0 - math.degrees(math.acos(c))


def compute_frame(patch: Patch, params: MeasurementParams) -> SegmentationFrame:
    """Frame and projections for a patch; raises DegenerateFrame when the
    tangent is parallel to the mean normal."""
    n_mat = patch.normals
    t = eigen_sym3(n_mat.T @ n_mat).vectors[:, 0]
    mean = n_mat.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm < 1e-12:
        raise DegenerateFrame("mean normal vanishes")
    mean = mean / norm
    cross = np.cross(t, mean)
    cnorm = np.linalg.norm(cross)
    if cnorm < 1e-9:
        raise DegenerateFrame("tangent parallel to mean normal")
    b = cross / cnorm
    p = n_mat @ b + (params.lam / patch.radius) * ((patch.positions - patch.center) @ b)
    return SegmentationFrame(tangent=t, mean_normal=mean, binormal=b,
                             projections=p, split=within_ss_split(p))


def measure(patch: Patch, params: MeasurementParams) -> MeasurementResult:
    """Measure the dihedral angle across the break inside the patch.

    Splits the patch with the binormal projection, fits a plane to each
    side, and returns the angle between the plane normals together with
    the summed mean squared fitting error.
    """
    frame = compute_frame(patch, params)
    plus = frame.projections >= frame.split.threshold
    n_plus = int(plus.sum())
    n_minus = patch.size - n_plus
    if n_plus < 3 or n_minus < 3:
        raise SideTooSmall(
            f"sides have {n_minus} and {n_plus} vertices; need >= 3 each")
    v_minus, eps_minus = pca_min_component(patch.positions[~plus])
    v_plus, eps_plus = pca_min_component(patch.positions[plus])
    theta = angle_between_plane_normals(frame.mean_normal, v_plus, v_minus)
    labels = np.where(plus, 1, -1).astype(np.int8)
    fits = PlaneFitPair(v_minus=v_minus, v_plus=v_plus,
                        eps_minus=eps_minus, eps_plus=eps_plus,
                        n_minus=n_minus, n_plus=n_plus)
    return MeasurementResult(theta=theta, fit=eps_minus + eps_plus,
                             labels=labels, frame=frame, fits=fits,
                             params=params, patch=patch)


def preview_segmentation(patch: Patch, params: MeasurementParams) -> MeasurementResult:
    """Same computation as ``measure``; previews are never persisted, so
    interactive tuning leaves the session log untouched."""
    return measure(patch, params)

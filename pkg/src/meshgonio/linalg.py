"""Fixed-dimension numeric kernel.

3x3 symmetric eigen-decomposition with a deterministic sign convention,
the smallest-variance principal component of a point cloud (plane fit),
and the optimal two-cluster split of 1-D data by within-cluster sum of
squares.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePatch,
    DegenerateProjection,
    NonFinite,
    TooFewPoints,
)


@dataclass(frozen=True)
class EigenTriple:
    """Eigen-decomposition of a symmetric 3x3 matrix.

    ``values`` is ascending; column i of ``vectors`` is the unit
    eigenvector for ``values[i]``.  Each eigenvector is flipped so its
    largest-magnitude component is non-negative (first such axis wins on
    exact ties), which makes downstream angles reproducible.
    """

    values: np.ndarray   # (3,)
    vectors: np.ndarray  # (3, 3), columns


@dataclass(frozen=True)
class WithinSsSplit:
    """Optimal two-cluster threshold of 1-D data.

    ``objective`` is the total within-cluster sum of squares at
    ``threshold``; values >= threshold form the upper cluster.
    """

    threshold: float
    objective: float
    lower_mean: float
    upper_mean: float
    lower_count: int
    upper_count: int


def _fix_sign(u: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(u)))
    return -u if u[i] < 0 else u


def eigen_sym3(a) -> EigenTriple:
    """Eigen-decompose a symmetric 3x3 matrix, eigenvalues ascending.

    Raises NonFinite if any entry is NaN/Inf.  The input is symmetrized
    (averaged with its transpose) before decomposition.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix contains NaN or Inf")
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    vecs = np.column_stack([_fix_sign(v[:, i]) for i in range(3)])
    return EigenTriple(values=w, vectors=vecs)


def pca_min_component(points) -> tuple[np.ndarray, float]:
    """Smallest-variance principal component of a 3-D point cloud.

    Returns ``(v, eps)`` where ``v`` is the unit normal of the best-fit
    plane through the centroid and ``eps`` is the smallest eigenvalue of
    the count-normalized covariance (divide by n), i.e. the mean squared
    orthogonal distance of the points to that plane.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array, got shape {x.shape}")
    n = x.shape[0]
    if n < 3:
        raise DegeneratePatch(f"plane fit needs at least 3 points, got {n}")
    if not np.all(np.isfinite(x)):
        raise NonFinite("points contain NaN or Inf")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / n
    if not cov.any():
        raise DegeneratePatch("all points coincident")
    eig = eigen_sym3(cov)
    eps = float(max(eig.values[0], 0.0))
    return eig.vectors[:, 0], eps


def within_ss_split(p) -> WithinSsSplit:
    """Optimal two-cluster split of 1-D data by within-cluster SS.

    Evaluates the objective at every candidate threshold s equal to a
    data value strictly greater than the minimum (so both clusters are
    non-empty) and returns the global minimizer; ties pick the smallest
    threshold.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    n = p.size
    if n < 2:
        raise TooFewPoints(f"split needs at least 2 values, got {n}")
    if not np.all(np.isfinite(p)):
        raise NonFinite("values contain NaN or Inf")
    q = np.sort(p)
    if q[0] == q[-1]:
        raise DegenerateProjection("all values equal; no two-sided split")

    # Candidate split puts q[:k] below, q[k:] at or above the threshold
    # q[k]; only boundaries where the value actually changes are distinct
    # thresholds.
    ks = np.flatnonzero(q[1:] > q[:-1]) + 1
    csum = np.concatenate([[0.0], np.cumsum(q)])
    csum2 = np.concatenate([[0.0], np.cumsum(q * q)])
    lo_n = ks.astype(np.float64)
    hi_n = n - lo_n
    lo_ss = csum2[ks] - csum[ks] ** 2 / lo_n
    hi_ss = (csum2[n] - csum2[ks]) - (csum[n] - csum[ks]) ** 2 / hi_n
    f = lo_ss + hi_ss

    best = int(np.argmin(f))  # first minimum -> smallest threshold
    k = int(ks[best])
    return WithinSsSplit(
        threshold=float(q[k]),
        objective=float(max(f[best], 0.0)),
        lower_mean=float(csum[k] / k),
        upper_mean=float((csum[n] - csum[k]) / (n - k)),
        lower_count=k,
        upper_count=n - k,
    )

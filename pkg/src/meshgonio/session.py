"""Measurement persistence: records, contrasting color pairs, CSV export,
and the repeated-measurement variability statistics."""

from __future__ import annotations

import csv
import io
import math
import statistics
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .core import MeasurementResult
from .errors import EmptySet, OutOfRange, SessionClosed
from .mesh import TriangleMesh

# eight pairs of contrasting colors; index cycles per measured location
PALETTE: list[tuple[tuple[int, int, int], tuple[int, int, int]]] = [
    ((230, 25, 75), (60, 180, 240)),    # red / sky blue
    ((255, 150, 20), (0, 90, 170)),     # orange / navy
    ((255, 225, 25), (145, 30, 180)),   # yellow / purple
    ((60, 180, 75), (240, 50, 230)),    # green / magenta
    ((70, 240, 240), (128, 0, 0)),      # cyan / maroon
    ((250, 190, 212), (0, 128, 128)),   # pink / teal
    ((210, 245, 60), (0, 0, 128)),      # lime / dark blue
    ((170, 110, 40), (220, 220, 255)),  # brown / lavender
]

BASE_COLOR = (200, 200, 200)

CSV_COLUMNS = ["id", "mesh", "method", "x", "y", "z", "radius", "metric",
               "lambda", "n", "n_plus", "n_minus", "theta_deg", "fit",
               "palette", "timestamp_iso8601"]


@dataclass(frozen=True)
class MeasurementRecord:
    """One persisted measurement row."""

    id: int
    mesh: str
    method: str  # "drag" or "xyz"
    x: float
    y: float
    z: float
    radius: float
    metric: str
    lam: float
    n: int
    n_plus: int
    n_minus: int
    theta_deg: float
    fit: float
    palette: int
    timestamp: datetime


@dataclass(frozen=True)
class IovRecord:
    """Three repeated angle measurements of one break and their mean
    absolute pairwise difference."""

    break_id: str
    method: str  # "man", "drag", or "xyz"
    theta: float
    phi: float
    psi: float

    @property
    def iov(self) -> float:
        return iov(self.theta, self.phi, self.psi)


@dataclass(frozen=True)
class IovSummary:
    count: int
    minimum: float
    mean: float
    median: float
    maximum: float
    sd: float
    sd_defined: bool  # False for a single record (reported as 0)


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Session:
    """Append-only measurement log for one mesh.

    Commits are serialized so ids are gap-free and monotonic; the palette
    index advances only when a new location is measured.
    """

    def __init__(self, mesh_name: str = "", clock=_utc_now):
        self.mesh_name = mesh_name
        self._clock = clock
        self._records: list[MeasurementRecord] = []
        self._palette_of_location: dict[tuple[float, float, float], int] = {}
        self._lock = threading.Lock()
        self._closed = False

    @property
    def records(self) -> list[MeasurementRecord]:
        return list(self._records)

    def close(self) -> None:
        self._closed = True

    def record(self, result: MeasurementResult, *,
               method: str = "drag") -> MeasurementRecord:
        """Append a measurement; returns the stored record."""
        if self._closed:
            raise SessionClosed("session is closed")
        if method not in ("drag", "xyz"):
            raise ValueError(f"method must be 'drag' or 'xyz', got {method!r}")
        loc = tuple(float(c) for c in result.patch.center)
        with self._lock:
            if loc not in self._palette_of_location:
                self._palette_of_location[loc] = (
                    len(self._palette_of_location) % len(PALETTE))
            rec = MeasurementRecord(
                id=len(self._records) + 1,
                mesh=self.mesh_name or result.patch.mesh_name,
                method=method,
                x=loc[0], y=loc[1], z=loc[2],
                radius=result.params.radius,
                metric=result.patch.metric,
                lam=result.params.lam,
                n=result.patch.size,
                n_plus=result.n_plus,
                n_minus=result.n_minus,
                theta_deg=result.theta,
                fit=result.fit,
                palette=self._palette_of_location[loc],
                timestamp=self._clock(),
            )
            self._records.append(rec)
        return rec


def _fmt6(v: float) -> str:
    return format(float(v), ".6g")


def export_csv(session: Session, sink) -> None:
    """Header plus one row per record, in a fixed column order; numbers use
    6 significant digits except theta with 4 decimal places."""
    own = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w", newline="", encoding="utf-8")
        own = True
    try:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in session.records:
            w.writerow([
                r.id, r.mesh, r.method,
                _fmt6(r.x), _fmt6(r.y), _fmt6(r.z),
                _fmt6(r.radius), r.metric, _fmt6(r.lam),
                r.n, r.n_plus, r.n_minus,
                f"{r.theta_deg:.4f}", _fmt6(r.fit),
                r.palette, r.timestamp.isoformat(),
            ])
    finally:
        if own:
            sink.close()


def export_csv_text(session: Session) -> str:
    buf = io.StringIO()
    export_csv(session, buf)
    return buf.getvalue()


def apply_measurement_colors(mesh: TriangleMesh, result: MeasurementResult,
                             palette_index: int) -> np.ndarray:
    """New color layer with the patch painted in the contrasting pair for
    this location; everything else keeps its existing (or base) color."""
    if mesh.colors is not None:
        colors = mesh.colors.copy()
    else:
        colors = np.tile(np.asarray(BASE_COLOR, dtype=np.uint8),
                         (mesh.num_vertices, 1))
    lo, hi = PALETTE[palette_index % len(PALETTE)]
    idx = result.patch.indices
    colors[idx[result.labels < 0]] = lo
    colors[idx[result.labels > 0]] = hi
    return colors


def iov(theta: float, phi: float, psi: float) -> float:
    """Mean absolute pairwise difference of three repeated angles."""
    for a in (theta, phi, psi):
        if not (0.0 <= a <= 180.0) or not math.isfinite(a):
            raise OutOfRange(f"angle {a} outside [0, 180]")
    return (abs(theta - phi) + abs(theta - psi) + abs(phi - psi)) / 3.0


def summarize_iov(records: list[IovRecord],
                  method: str | None = None) -> IovSummary:
    """Count/min/mean/median/max/sd of the per-break variabilities,
    optionally filtered by method tag.  Sample (n-1) standard deviation;
    a singleton reports sd 0 with ``sd_defined`` False."""
    rows = [r for r in records if method is None or r.method == method]
    if not rows:
        raise EmptySet(f"no records for method {method!r}")
    vals = [r.iov for r in rows]
    n = len(vals)
    return IovSummary(
        count=n,
        minimum=min(vals),
        mean=statistics.fmean(vals),
        median=statistics.median(vals),
        maximum=max(vals),
        sd=statistics.stdev(vals) if n > 1 else 0.0,
        sd_defined=n > 1,
    )

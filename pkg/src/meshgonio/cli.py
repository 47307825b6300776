"""Command-line front end: batch coordinate-driven measurement, synthetic
shape generation, variability analytics, and serving the HTTP API."""

from __future__ import annotations

import argparse
import csv
import json
import socket
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import MeasurementParams, measure
from .errors import GoniometerError
from .mesh import build_knn_graph, load_mesh, save_ply
from .patch import EUCLIDEAN, GEODESIC, extract_patch_by_point
from .session import (
    IovRecord,
    Session,
    apply_measurement_colors,
    export_csv,
    iov,
    summarize_iov,
)
from .shapes import WedgeSpec, make_curved_ridge, make_rugose_wedge, make_wedge

# sysexits-style codes so batch runs are scriptable
EX_OK = 0
EX_PARTIAL = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66
EX_OSERR = 71
EX_CANTCREAT = 73


def _err(msg: str) -> None:
    print(f"meshgonio: {msg}", file=sys.stderr)


def _read_spec_rows(path: Path, default_lam: float, default_metric: str):
    """Measurement spec CSV: header with x,y,z,radius and optionally
    lambda,metric (a column subset of the export CSV, so exports replay)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError("empty spec file")
        missing = {"x", "y", "z", "radius"} - set(reader.fieldnames)
        if missing:
            raise ValueError(f"spec missing columns: {sorted(missing)}")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "x": float(row["x"]),
                    "y": float(row["y"]),
                    "z": float(row["z"]),
                    "radius": float(row["radius"]),
                    "lam": float(row["lambda"]) if row.get("lambda") else default_lam,
                    "metric": row.get("metric") or default_metric,
                })
            except (ValueError, TypeError) as exc:
                raise ValueError(f"line {i}: {exc}") from exc
    return rows


def cmd_measure(args) -> int:
    mesh_path = Path(args.mesh)
    if not mesh_path.is_file():
        _err(f"mesh not found: {mesh_path}")
        return EX_NOINPUT
    try:
        rows = _read_spec_rows(Path(args.spec), args.lam, args.metric)
    except FileNotFoundError:
        _err(f"spec not found: {args.spec}")
        return EX_NOINPUT
    except ValueError as exc:
        _err(f"bad spec: {exc}")
        return EX_DATAERR

    mesh = load_mesh(mesh_path, knn=args.knn)
    graph = None
    if any(r["metric"] == GEODESIC for r in rows):
        graph = build_knn_graph(mesh, args.knn)

    clock = None
    if args.fixed_timestamp:
        frozen = datetime.fromisoformat(args.fixed_timestamp)
        if frozen.tzinfo is None:
            frozen = frozen.replace(tzinfo=timezone.utc)
        clock = lambda: frozen  # noqa: E731
    session = Session(mesh.name, clock=clock) if clock else Session(mesh.name)

    colors = mesh.colors
    failures = 0
    for lineno, row in enumerate(rows, start=2):
        try:
            patch = extract_patch_by_point(
                mesh, graph, (row["x"], row["y"], row["z"]),
                row["radius"], row["metric"])
            params = MeasurementParams(lam=row["lam"], metric=row["metric"],
                                       radius=row["radius"])
            result = measure(patch, params)
            rec = session.record(result, method="xyz")
            if args.colored_out:
                colored = mesh.with_colors(colors) if colors is not None else mesh
                colors = apply_measurement_colors(colored, result, rec.palette)
        except (GoniometerError, ValueError) as exc:
            failures += 1
            code = exc.code if isinstance(exc, GoniometerError) else "InvalidParams"
            _err(f"spec line {lineno}: {code}: {exc}")

    try:
        export_csv(session, args.out)
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EX_CANTCREAT
    if args.colored_out:
        out_mesh = mesh.with_colors(
            colors if colors is not None
            else np.tile((200, 200, 200), (mesh.num_vertices, 1)))
        try:
            save_ply(out_mesh, args.colored_out)
        except OSError as exc:
            _err(f"cannot write {args.colored_out}: {exc}")
            return EX_CANTCREAT
    return EX_PARTIAL if failures else EX_OK


def cmd_synth(args) -> int:
    from .errors import InvalidSpec
    try:
        if args.shape == "wedge":
            spec = WedgeSpec(args.angle, half_width=args.half_width,
                             depth=args.depth,
                             vertices_per_side=args.vertices_per_side,
                             noise_sigma=args.noise_sigma, seed=args.seed)
            mesh, truth = make_wedge(spec)
        elif args.shape == "curved":
            mesh, truth = make_curved_ridge(
                args.curve_radius, args.angle, args.vertices_per_side,
                half_width=args.half_width, arc_span_deg=args.arc_span,
                seed=args.seed, noise_sigma=args.noise_sigma)
        else:
            spec = WedgeSpec(args.angle, half_width=args.half_width,
                             depth=args.depth,
                             vertices_per_side=args.vertices_per_side,
                             noise_sigma=args.noise_sigma, seed=args.seed)
            mesh, truth = make_rugose_wedge(spec, args.amplitude, args.seed)
    except InvalidSpec as exc:
        _err(f"InvalidSpec: {exc}")
        return EX_USAGE
    out = Path(args.out)
    try:
        save_ply(mesh, out)
        sidecar = out.with_suffix(".truth.json")
        sidecar.write_text(json.dumps(
            {"angle_deg": truth.angle_deg,
             "side": truth.side.tolist()}, separators=(",", ":")) + "\n")
    except OSError as exc:
        _err(f"cannot write {out}: {exc}")
        return EX_CANTCREAT
    print(f"wrote {out} ({mesh.num_vertices} vertices, "
          f"{mesh.num_faces} faces) and {sidecar.name}")
    return EX_OK


def cmd_iov(args) -> int:
    """Input: long CSV with columns break,method,angle_deg; each
    (break, method) group needs exactly three rows."""
    try:
        with open(args.csv, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or \
                    {"break", "method", "angle_deg"} - set(reader.fieldnames):
                _err("iov CSV needs columns: break,method,angle_deg")
                return EX_DATAERR
            groups: dict[tuple[str, str], list[float]] = {}
            for i, row in enumerate(reader, start=2):
                try:
                    key = (row["break"], row["method"])
                    groups.setdefault(key, []).append(float(row["angle_deg"]))
                except (ValueError, TypeError):
                    _err(f"line {i}: malformed row")
                    return EX_DATAERR
    except FileNotFoundError:
        _err(f"file not found: {args.csv}")
        return EX_NOINPUT

    records = []
    for (break_id, method), angles in sorted(groups.items()):
        if len(angles) != 3:
            print(f"{break_id} [{method}]: incomplete "
                  f"({len(angles)} of 3 angles), excluded")
            continue
        rec = IovRecord(break_id, method, *angles)
        records.append(rec)
        print(f"{break_id} [{method}]: iov = {rec.iov:.4f}")
    for method in sorted({r.method for r in records}):
        s = summarize_iov(records, method)
        sd = f"{s.sd:.4f}" if s.sd_defined else "0 (single record)"
        print(f"-- {method}: n={s.count} min={s.minimum:.4f} "
              f"mean={s.mean:.4f} median={s.median:.4f} "
              f"max={s.maximum:.4f} sd={sd}")
    return EX_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    # fail fast on an occupied port instead of a uvicorn traceback
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        _err(f"cannot bind {args.host}:{args.port}: {exc}")
        return EX_OSERR
    finally:
        probe.close()

    app = create_app(mesh_dir=args.dir, static_dir=args.static, knn=args.knn)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshgonio",
        description="Measure dihedral angles across breaks on 3D meshes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="batch measurement from a coordinate spec")
    m.add_argument("--mesh", required=True)
    m.add_argument("--spec", required=True,
                   help="CSV with columns x,y,z,radius[,lambda,metric]")
    m.add_argument("--out", required=True, help="output CSV path")
    m.add_argument("--colored-out", help="optional colorized PLY path")
    m.add_argument("--lambda", dest="lam", type=float, default=2.0)
    m.add_argument("--metric", choices=[GEODESIC, EUCLIDEAN], default=GEODESIC)
    m.add_argument("--knn", type=int, default=10)
    m.add_argument("--fixed-timestamp",
                   help="freeze record timestamps to this ISO-8601 instant")
    m.set_defaults(func=cmd_measure)

    s = sub.add_parser("synth", help="generate a synthetic test shape")
    s.add_argument("shape", choices=["wedge", "curved", "rugose"])
    s.add_argument("--angle", type=float, required=True)
    s.add_argument("--half-width", type=float, default=1.0)
    s.add_argument("--depth", type=float, default=1.0)
    s.add_argument("--vertices-per-side", type=int, default=400)
    s.add_argument("--noise-sigma", type=float, default=0.0)
    s.add_argument("--amplitude", type=float, default=0.04,
                   help="bump amplitude for the rugose shape")
    s.add_argument("--curve-radius", type=float, default=5.0)
    s.add_argument("--arc-span", type=float, default=60.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output PLY path")
    s.set_defaults(func=cmd_synth)

    i = sub.add_parser("iov", help="per-break variability and summary stats")
    i.add_argument("csv", help="CSV with columns break,method,angle_deg")
    i.set_defaults(func=cmd_iov)

    v = sub.add_parser("serve", help="serve the HTTP API and browser UI")
    v.add_argument("--dir", help="directory of meshes to preload")
    v.add_argument("--static", help="directory with the UI bundle")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8040)
    v.add_argument("--knn", type=int, default=10)
    v.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to sysexits
        if exc.code not in (0, None):
            return EX_USAGE
        return 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

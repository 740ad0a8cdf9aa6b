"""File formats: CSV point clouds and pairs, ASCII PLY clouds, JSON sidecars.

CSV clouds have one ``x,y,z`` row per point with an optional header line;
pair files carry six columns ``y1,y2,y3,x1,x2,x3``. Coordinates are written
with 17 significant digits so a save/load round trip is bitwise exact. PLY
support covers the ASCII variant only; any float-typed x/y/z vertex
properties are read and every other property is ignored.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .exceptions import ParseError

__all__ = [
    "load_cloud",
    "save_cloud",
    "load_pairs",
    "save_pairs",
    "load_truth",
    "save_truth",
    "save_matches",
]

_FLOAT_FMT = "%.17g"


def _parse_csv(path: Path, n_cols: int) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            try:
                values = [float(f) for f in fields]
            except ValueError:
                if line_no == 1:
                    continue  # header line
                raise ParseError(path, line_no, f"non-numeric row: {line!r}")
            if len(values) != n_cols:
                raise ParseError(
                    path, line_no, f"expected {n_cols} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        print(f"warning: {path} contains no data rows", file=sys.stderr)
        return np.empty((0, n_cols))
    return np.asarray(rows, dtype=np.float64)


def _parse_ply(path: Path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError(path, 1, "not a PLY file (missing 'ply' magic)")

    n_vertices = None
    vertex_props: list[str] = []
    in_vertex_element = False
    data_start = None
    for line_no, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens:
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError(path, line_no, f"unsupported PLY format {tokens[1:]!r}; only ascii is supported")
        elif tokens[0] == "element":
            in_vertex_element = tokens[1] == "vertex"
            if in_vertex_element:
                n_vertices = int(tokens[2])
        elif tokens[0] == "property" and in_vertex_element:
            vertex_props.append(tokens[-1])
        elif tokens[0] == "end_header":
            data_start = line_no + 1
            break
    if data_start is None:
        raise ParseError(path, len(lines), "PLY header never terminated with end_header")
    if n_vertices is None:
        raise ParseError(path, data_start - 1, "PLY header declares no vertex element")
    try:
        cols = [vertex_props.index(axis) for axis in ("x", "y", "z")]
    except ValueError:
        raise ParseError(path, data_start - 1, f"vertex element lacks x/y/z properties: {vertex_props}")

    points = np.empty((n_vertices, 3))
    row = 0
    for line_no, raw in enumerate(lines[data_start - 1 :], start=data_start):
        if row >= n_vertices:
            break
        tokens = raw.split()
        if not tokens:
            continue
        try:
            points[row] = [float(tokens[c]) for c in cols]
        except (ValueError, IndexError):
            raise ParseError(path, line_no, f"bad vertex row: {raw.strip()!r}")
        row += 1
    if row < n_vertices:
        raise ParseError(path, len(lines), f"expected {n_vertices} vertex rows, found {row}")
    return points


def load_cloud(path) -> np.ndarray:
    """Load a point cloud from CSV or ASCII PLY, preserving point order."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(3)
    if magic == b"ply":
        return _parse_ply(path)
    return _parse_csv(path, 3)


def save_cloud(path, points, header: bool = True) -> None:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    np.savetxt(path, points, fmt=_FLOAT_FMT, delimiter=",", header="x,y,z" if header else "", comments="")


def load_pairs(path) -> tuple[np.ndarray, np.ndarray]:
    """Load paired measurements; returns (y, x) arrays of shape (l, 3)."""
    data = _parse_csv(Path(path), 6)
    return data[:, :3].copy(), data[:, 3:].copy()


def save_pairs(path, y, x, header: bool = True) -> None:
    y = np.asarray(y, dtype=np.float64).reshape(-1, 3)
    x = np.asarray(x, dtype=np.float64).reshape(-1, 3)
    data = np.hstack([y, x])
    np.savetxt(
        path,
        data,
        fmt=_FLOAT_FMT,
        delimiter=",",
        header="y1,y2,y3,x1,x2,x3" if header else "",
        comments="",
    )


def save_matches(path, pairs) -> None:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    np.savetxt(path, pairs, fmt="%d", delimiter=",", header="i,j", comments="")


def save_truth(path, rotation, inliers, sigma: float, seed: int) -> None:
    """Ground-truth sidecar: rotation (row-major), inliers list, sigma, seed.

    ``inliers`` holds row indices for paired data or (i, j) index pairs for
    two-cloud instances.
    """
    rotation = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
    inliers = np.asarray(inliers, dtype=np.int64)
    doc = {
        "R": [float(v) for v in rotation.reshape(-1)],
        "inliers": inliers.tolist(),
        "sigma": float(sigma),
        "seed": int(seed),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_truth(path):
    """Load a sidecar; returns (rotation, inliers, sigma, seed)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    rotation = np.asarray(doc["R"], dtype=np.float64).reshape(3, 3)
    inliers = np.asarray(doc["inliers"], dtype=np.int64)
    return rotation, inliers, float(doc["sigma"]), int(doc["seed"])

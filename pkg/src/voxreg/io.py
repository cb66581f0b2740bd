"""Reading and writing point cloud files.

Two text formats are supported: bare xyz (one ``x y z`` triple per
line, ``#`` comments allowed) and ASCII PLY with float or double
x/y/z vertex properties. Binary PLY is rejected up front rather than
misparsed.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import CloudFormatError
from .geometry import PointCloud

_PLY_NUMERIC = {
    "char", "uchar", "int8", "uint8",
    "short", "ushort", "int16", "uint16",
    "int", "uint", "int32", "uint32",
    "float", "float32", "double", "float64",
}


def _parse_xyz_line(tokens: list[str], line_no: int) -> tuple[float, float, float]:
    if len(tokens) != 3:
        raise CloudFormatError(f"expected 3 coordinates, got {len(tokens)}", line=line_no)
    try:
        x, y, z = (float(t) for t in tokens)
    except ValueError:
        raise CloudFormatError("coordinates are not numeric", line=line_no) from None
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise CloudFormatError("coordinate is not finite", line=line_no)
    return x, y, z


def _read_xyz(lines: list[str]) -> PointCloud:
    points = []
    for line_no, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        points.append(_parse_xyz_line(stripped.split(), line_no))
    return PointCloud(np.array(points, dtype=np.float64).reshape(-1, 3))


def _read_ply(lines: list[str]) -> PointCloud:
    if not lines or lines[0].strip() != "ply":
        raise CloudFormatError("missing 'ply' magic", line=1)

    vertex_count = None
    vertex_props: list[str] = []
    current_element = None
    body_start = None
    for line_no, raw in enumerate(lines[1:], start=2):
        tokens = raw.strip().split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise CloudFormatError("binary PLY is not supported", line=line_no)
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise CloudFormatError("malformed element declaration", line=line_no)
            current_element = tokens[1]
            if current_element == "vertex":
                try:
                    vertex_count = int(tokens[2])
                except ValueError:
                    raise CloudFormatError("vertex count is not an integer", line=line_no) from None
        elif tokens[0] == "property":
            if current_element == "vertex":
                if tokens[1] == "list":
                    raise CloudFormatError("list property not supported on vertices", line=line_no)
                if len(tokens) != 3 or tokens[1] not in _PLY_NUMERIC:
                    raise CloudFormatError("malformed vertex property", line=line_no)
                vertex_props.append(tokens[2])
        elif tokens[0] == "end_header":
            body_start = line_no
            break
        else:
            raise CloudFormatError(f"unknown header keyword '{tokens[0]}'", line=line_no)

    if body_start is None:
        raise CloudFormatError("header never ended", line=len(lines))
    if vertex_count is None:
        raise CloudFormatError("no vertex element declared", line=body_start)
    try:
        ix, iy, iz = (vertex_props.index(n) for n in ("x", "y", "z"))
    except ValueError:
        raise CloudFormatError("vertex element lacks x/y/z properties", line=body_start) from None

    points = np.empty((vertex_count, 3))
    row = 0
    for line_no, raw in enumerate(lines[body_start:], start=body_start + 1):
        if row == vertex_count:
            break
        tokens = raw.strip().split()
        if not tokens:
            continue
        if len(tokens) < len(vertex_props):
            raise CloudFormatError(
                f"expected {len(vertex_props)} vertex values, got {len(tokens)}", line=line_no
            )
        try:
            coords = float(tokens[ix]), float(tokens[iy]), float(tokens[iz])
        except ValueError:
            raise CloudFormatError("vertex coordinate is not numeric", line=line_no) from None
        if not all(math.isfinite(c) for c in coords):
            raise CloudFormatError("vertex coordinate is not finite", line=line_no)
        points[row] = coords
        row += 1
    if row != vertex_count:
        raise CloudFormatError(
            f"declared {vertex_count} vertices but found {row}", line=len(lines)
        )
    return PointCloud(points)


def read_cloud(path, fmt: str | None = None) -> PointCloud:
    """Load a cloud from ``path``; format inferred from the suffix.

    Pass ``fmt`` ("xyz" or "ply") to override detection.
    """
    p = Path(path)
    if fmt is None:
        fmt = "ply" if p.suffix.lower() == ".ply" else "xyz"
    if fmt not in ("xyz", "ply"):
        raise CloudFormatError(f"unknown format '{fmt}'")
    raw = p.read_bytes()
    if fmt == "ply" and b"\x00" in raw[:1024]:
        raise CloudFormatError("binary PLY is not supported")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise CloudFormatError("file is not valid text") from None
    lines = text.splitlines()
    return _read_xyz(lines) if fmt == "xyz" else _read_ply(lines)


def write_xyz(cloud: PointCloud, path) -> None:
    """Write a cloud as plain xyz text with round-trip-exact coordinates."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in cloud.points:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")

"""Cloud file I/O: xyz-ascii and PLY (ascii / binary little-endian).

Files may declare their unit (default mm for xyz, m for ply); everything is
converted to meters on load. Writers always emit meters and say so.
"""

from __future__ import annotations

import struct
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..errors import InvalidParameter, ParseError, UnitError
from .cloud import CloudMeta, PointCloud

_UNIT_SCALE = {"m": 1.0, "mm": 1e-3}

FORMATS = ("xyz-ascii", "ply")


def load_cloud(path, fmt: str | None = None) -> PointCloud:
    """Load a cloud in canonical meters; line ids kept when the file has them."""
    path = Path(path)
    if fmt is None:
        fmt = "ply" if path.suffix.lower() == ".ply" else "xyz-ascii"
    if fmt == "xyz-ascii":
        return _load_xyz(path)
    if fmt == "ply":
        return _load_ply(path)
    raise InvalidParameter(f"unknown cloud format {fmt!r}")


def save_cloud(cloud: PointCloud, path, fmt: str | None = None, binary: bool = True) -> None:
    path = Path(path)
    if fmt is None:
        fmt = "ply" if path.suffix.lower() == ".ply" else "xyz-ascii"
    if fmt == "xyz-ascii":
        _save_xyz(cloud, path)
    elif fmt == "ply":
        _save_ply(cloud, path, binary=binary)
    else:
        raise InvalidParameter(f"unknown cloud format {fmt!r}")


def _unit_scale(token: str, line_no: int) -> float:
    token = token.strip().lower()
    if token not in _UNIT_SCALE:
        raise UnitError(f"line {line_no}: unknown unit declaration {token!r}")
    return _UNIT_SCALE[token]


def _load_xyz(path: Path) -> PointCloud:
    scale = _UNIT_SCALE["mm"]  # xyz files default to millimeters
    pts: list[tuple[float, float, float]] = []
    line_ids: list[int] = []
    has_ids: bool | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.lower().startswith("unit:"):
                    scale = _unit_scale(body[5:], line_no)
                continue
            tokens = line.split()
            if len(tokens) not in (3, 4):
                raise ParseError(f"expected 3 or 4 columns, got {len(tokens)}", line=line_no)
            try:
                x, y, z = (float(tokens[i]) for i in range(3))
            except ValueError:
                raise ParseError(f"malformed coordinate in {line!r}", line=line_no) from None
            if has_ids is None:
                has_ids = len(tokens) == 4
            elif has_ids != (len(tokens) == 4):
                raise ParseError("inconsistent column count", line=line_no)
            if has_ids:
                try:
                    line_ids.append(int(tokens[3]))
                except ValueError:
                    raise ParseError(f"malformed line id {tokens[3]!r}", line=line_no) from None
            pts.append((x, y, z))
    points = np.asarray(pts, dtype=np.float64).reshape(-1, 3) * scale
    return PointCloud(points,
                      line_index=np.asarray(line_ids, dtype=np.int64) if has_ids else None,
                      meta=CloudMeta(source=str(path), unit="m"))


def _save_xyz(cloud: PointCloud, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# unit: m\n")
        ids = cloud.line_index
        for i, p in enumerate(cloud.points):
            row = f"{p[0]:.12g} {p[1]:.12g} {p[2]:.12g}"
            if ids is not None:
                row += f" {int(ids[i])}"
            fh.write(row + "\n")


_PLY_TYPES = {
    "float": ("f", 4), "float32": ("f", 4),
    "double": ("d", 8), "float64": ("d", 8),
    "int": ("i", 4), "int32": ("i", 4), "uint": ("I", 4), "uint32": ("I", 4),
    "short": ("h", 2), "ushort": ("H", 2), "char": ("b", 1), "uchar": ("B", 1),
}


def _load_ply(path: Path) -> PointCloud:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"ply":
            raise ParseError("not a ply file", line=1)
        fmt = None
        scale = _UNIT_SCALE["m"]  # ply defaults to meters
        n_vertex = 0
        props: list[tuple[str, str]] = []
        in_vertex = False
        line_no = 1
        while True:
            raw = fh.readline()
            line_no += 1
            if not raw:
                raise ParseError("unexpected end of header", line=line_no)
            line = raw.decode("ascii", errors="replace").strip()
            if line == "end_header":
                break
            tokens = line.split()
            if not tokens:
                continue
            if tokens[0] == "format":
                fmt = tokens[1]
            elif tokens[0] == "comment":
                if len(tokens) >= 3 and tokens[1].lower() == "unit:":
                    scale = _unit_scale(tokens[2], line_no)
            elif tokens[0] == "element":
                in_vertex = tokens[1] == "vertex"
                if in_vertex:
                    n_vertex = int(tokens[2])
            elif tokens[0] == "property" and in_vertex:
                if tokens[1] == "list":
                    raise ParseError("list properties are not supported on vertices", line=line_no)
                props.append((tokens[1], tokens[2]))
        if fmt not in ("ascii", "binary_little_endian"):
            raise ParseError(f"unsupported ply format {fmt!r}")
        names = [name for _, name in props]
        for req in ("x", "y", "z"):
            if req not in names:
                raise ParseError(f"vertex element lacks property {req!r}")
        if fmt == "ascii":
            rows = []
            for i in range(n_vertex):
                raw = fh.readline()
                line_no += 1
                tokens = raw.decode("ascii", errors="replace").split()
                if len(tokens) != len(props):
                    raise ParseError(f"expected {len(props)} vertex fields", line=line_no)
                try:
                    rows.append([float(t) for t in tokens])
                except ValueError:
                    raise ParseError("malformed vertex record", line=line_no) from None
            data = np.asarray(rows, dtype=np.float64).reshape(n_vertex, len(props))
        else:
            fmt_str = "<" + "".join(_PLY_TYPES[t][0] for t, _ in props)
            rec = struct.calcsize(fmt_str)
            blob = fh.read(rec * n_vertex)
            if len(blob) != rec * n_vertex:
                raise ParseError("truncated binary vertex data")
            data = np.asarray([struct.unpack_from(fmt_str, blob, i * rec) for i in range(n_vertex)],
                              dtype=np.float64).reshape(n_vertex, len(props))
    col = {name: i for i, (_, name) in enumerate(props)}
    points = data[:, [col["x"], col["y"], col["z"]]] * scale
    normals = None
    if all(k in col for k in ("nx", "ny", "nz")):
        normals = data[:, [col["nx"], col["ny"], col["nz"]]]
    line_index = None
    if "line_id" in col:
        line_index = data[:, col["line_id"]].astype(np.int64)
    return PointCloud(points, line_index=line_index, normals=normals,
                      meta=CloudMeta(source=str(path), unit="m"))


def _save_ply(cloud: PointCloud, path: Path, binary: bool = True) -> None:
    props = [("double", "x"), ("double", "y"), ("double", "z")]
    if cloud.normals is not None:
        props += [("double", "nx"), ("double", "ny"), ("double", "nz")]
    if cloud.line_index is not None:
        props += [("int32", "line_id")]
    header = ["ply",
              f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
              "comment unit: m",
              f"element vertex {len(cloud)}"]
    header += [f"property {t} {n}" for t, n in props]
    header += ["end_header"]
    cols: list[np.ndarray] = [cloud.points]
    if cloud.normals is not None:
        cols.append(cloud.normals)
    if cloud.line_index is not None:
        cols.append(cloud.line_index[:, None].astype(np.float64))
    data = np.hstack(cols) if cols else np.empty((0, 0))
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fmt_str = "<" + "".join(_PLY_TYPES[t][0] for t, _ in props)
            for row in data:
                vals = list(row)
                if cloud.line_index is not None:
                    vals[-1] = int(vals[-1])
                fh.write(struct.pack(fmt_str, *vals))
        else:
            for row in data:
                toks = [f"{v:.12g}" for v in row[: len(props)]]
                if cloud.line_index is not None:
                    toks[-1] = str(int(row[-1]))
                fh.write((" ".join(toks) + "\n").encode("ascii"))

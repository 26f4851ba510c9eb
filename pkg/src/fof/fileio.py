"""Mesh file I/O (OBJ, PLY) and the binary coefficient-grid container.

Container layout (version 1, all integers little-endian):

    offset  size  field
    0       4     magic "FOF1"
    4       2     version, u16 = 1
    6       1     dtype, u8 (0 = float32 payload)
    7       1     reserved, u8 = 0
    8       4     H, u32
    12      4     W, u32
    16      4     N, u32
    20      4*H*W*N  payload, float32 little-endian, row-major
                     (y, then x, then coefficient)

Writers are deterministic: identical inputs produce byte-identical files.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import FofGrid, TriangleMesh
from .errors import FormatError, ParseError

__all__ = [
    "read_obj",
    "write_obj",
    "read_ply",
    "write_ply",
    "read_fof",
    "write_fof",
    "FOF_MAGIC",
    "FOF_HEADER_SIZE",
]

FOF_MAGIC = b"FOF1"
FOF_VERSION = 1
FOF_DTYPE_F32 = 0
FOF_HEADER_SIZE = 20
_FOF_HEADER = struct.Struct("<4sHBBIII")


def read_obj(path):
    """Parse a Wavefront OBJ file into a TriangleMesh.

    Supports v and f records; polygon faces are fan-triangulated;
    1-based and negative indices are accepted; vt/vn/materials are
    ignored.
    """
    vertices = []
    faces = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise ParseError("vertex needs 3 coordinates", line=lineno)
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError:
                    raise ParseError("malformed vertex coordinate", line=lineno)
            elif tag == "f":
                if len(parts) < 4:
                    raise ParseError("face needs at least 3 indices", line=lineno)
                idx = []
                for token in parts[1:]:
                    head = token.split("/", 1)[0]
                    try:
                        value = int(head)
                    except ValueError:
                        raise ParseError(f"malformed face index {token!r}", line=lineno)
                    if value == 0:
                        raise ParseError("face index 0 (OBJ indices are 1-based)", line=lineno)
                    if value < 0:
                        value = len(vertices) + value
                    else:
                        value -= 1
                    if not 0 <= value < len(vertices):
                        raise ParseError(f"face index {token} out of range", line=lineno)
                    idx.append(value)
                for k in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[k], idx[k + 1]))
    return TriangleMesh(
        np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        np.asarray(faces, dtype=np.int64).reshape(-1, 3),
    )


def write_obj(path, mesh):
    """Write v/f records only, 9 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")


_PLY_TYPES = {
    "char": "i1", "uchar": "u1", "int8": "i1", "uint8": "u1",
    "short": "i2", "ushort": "u2", "int16": "i2", "uint16": "u2",
    "int": "i4", "uint": "u4", "int32": "i4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _parse_ply_header(fh):
    def next_line():
        line = fh.readline()
        if not line:
            raise ParseError("unexpected end of PLY header")
        return line.decode("ascii", errors="replace").strip()

    if next_line() != "ply":
        raise ParseError("not a PLY file (missing 'ply' magic)")
    fmt = next_line().split()
    if len(fmt) != 3 or fmt[0] != "format":
        raise ParseError("missing PLY format line")
    if fmt[1] == "binary_big_endian":
        raise ParseError("unsupported element: big-endian PLY is not supported")
    if fmt[1] not in ("ascii", "binary_little_endian"):
        raise ParseError(f"unknown PLY format {fmt[1]!r}")
    binary = fmt[1] == "binary_little_endian"

    elements = []  # (name, count, [(prop_kind, ...)])
    while True:
        line = next_line()
        if line == "end_header":
            break
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before any element")
            if parts[1] == "list":
                count_t, item_t, name = parts[2], parts[3], parts[4]
                if count_t not in _PLY_TYPES or item_t not in _PLY_TYPES:
                    raise ParseError(f"unknown PLY type in list property {name!r}")
                elements[-1][2].append(("list", _PLY_TYPES[count_t], _PLY_TYPES[item_t], name))
            else:
                if parts[1] not in _PLY_TYPES:
                    raise ParseError(f"unknown PLY type {parts[1]!r}")
                elements[-1][2].append(("scalar", _PLY_TYPES[parts[1]], parts[2]))
    return binary, elements


def read_ply(path):
    """Read ascii or binary-little-endian PLY with vertex and face elements.

    Extra scalar vertex properties are skipped; face lists of length 3+
    are fan-triangulated; any element other than vertex/face raises
    ParseError naming the element.
    """
    with open(path, "rb") as fh:
        binary, elements = _parse_ply_header(fh)
        for name, _, _ in elements:
            if name not in ("vertex", "face"):
                raise ParseError(f"unsupported element: {name!r}")
        vertices = np.empty((0, 3))
        faces = []
        for name, count, props in elements:
            if name == "vertex":
                if any(p[0] != "scalar" for p in props):
                    raise ParseError("list property on vertex element is unsupported")
                names = [p[2] for p in props]
                for needed in ("x", "y", "z"):
                    if needed not in names:
                        raise ParseError(f"vertex element lacks property {needed!r}")
                if binary:
                    dtype = np.dtype([(p[2], "<" + p[1]) for p in props])
                    raw = fh.read(dtype.itemsize * count)
                    if len(raw) != dtype.itemsize * count:
                        raise ParseError("truncated vertex data")
                    rec = np.frombuffer(raw, dtype=dtype, count=count)
                    vertices = np.stack(
                        [rec["x"], rec["y"], rec["z"]], axis=1
                    ).astype(np.float64)
                else:
                    rows = []
                    cols = [names.index(c) for c in ("x", "y", "z")]
                    for _ in range(count):
                        parts = fh.readline().split()
                        if len(parts) < len(props):
                            raise ParseError("truncated vertex line")
                        rows.append([float(parts[c]) for c in cols])
                    vertices = np.asarray(rows, dtype=np.float64).reshape(-1, 3)
            else:  # face
                if len(props) != 1 or props[0][0] != "list":
                    raise ParseError("face element must be a single list property")
                count_dt = np.dtype("<" + props[0][1])
                item_dt = np.dtype("<" + props[0][2])
                for _ in range(count):
                    if binary:
                        raw = fh.read(count_dt.itemsize)
                        if len(raw) != count_dt.itemsize:
                            raise ParseError("truncated face data")
                        k = int(np.frombuffer(raw, dtype=count_dt)[0])
                        raw = fh.read(item_dt.itemsize * k)
                        if len(raw) != item_dt.itemsize * k:
                            raise ParseError("truncated face data")
                        idx = np.frombuffer(raw, dtype=item_dt).astype(np.int64)
                    else:
                        parts = fh.readline().split()
                        if not parts:
                            raise ParseError("truncated face line")
                        k = int(parts[0])
                        if len(parts) < 1 + k:
                            raise ParseError("truncated face line")
                        idx = np.asarray([int(p) for p in parts[1 : 1 + k]], dtype=np.int64)
                    if k < 3:
                        raise ParseError("face with fewer than 3 indices")
                    for j in range(1, k - 1):
                        faces.append((idx[0], idx[j], idx[j + 1]))
    return TriangleMesh(vertices, np.asarray(faces, dtype=np.int64).reshape(-1, 3))


def write_ply(path, mesh, binary=True):
    """Write a PLY file with float32 vertex coordinates.

    ``binary`` selects binary-little-endian (default) or ascii; the two
    encodings round-trip within float32 precision of each other.
    """
    verts32 = mesh.vertices.astype(np.float32)
    header = [
        "ply",
        "format binary_little_endian 1.0" if binary else "format ascii 1.0",
        f"element vertex {len(verts32)}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {len(mesh.triangles)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(verts32.astype("<f4").tobytes())
            tri = mesh.triangles.astype("<i4")
            counts = np.full((len(tri), 1), 3, dtype="<u1")
            rows = b"".join(
                counts[i].tobytes() + tri[i].tobytes() for i in range(len(tri))
            )
            fh.write(rows)
        else:
            for x, y, z in verts32:
                fh.write(f"{x:.9g} {y:.9g} {z:.9g}\n".encode("ascii"))
            for a, b, c in mesh.triangles:
                fh.write(f"3 {a} {b} {c}\n".encode("ascii"))


def write_fof(path, fof):
    """Write the binary container; the float64 payload is rounded to
    float32 (round-to-nearest-even)."""
    header = _FOF_HEADER.pack(
        FOF_MAGIC, FOF_VERSION, FOF_DTYPE_F32, 0, fof.height, fof.width, fof.terms
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(fof.data.astype("<f4").tobytes())


def read_fof(path):
    """Read the binary container back into a (float64) coefficient grid."""
    with open(path, "rb") as fh:
        raw = fh.read(FOF_HEADER_SIZE)
        if len(raw) != FOF_HEADER_SIZE:
            raise FormatError("truncated header")
        magic, version, dtype, _, h, w, n = _FOF_HEADER.unpack(raw)
        if magic != FOF_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {FOF_MAGIC!r}")
        if version != FOF_VERSION:
            raise FormatError(f"unsupported version {version}")
        if dtype != FOF_DTYPE_F32:
            raise FormatError(f"unsupported dtype code {dtype}")
        expected = h * w * n * 4
        payload = fh.read()
        if len(payload) != expected:
            raise FormatError(
                f"payload size mismatch: expected {expected} bytes, got {len(payload)}"
            )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return FofGrid(data.reshape(h, w, n))

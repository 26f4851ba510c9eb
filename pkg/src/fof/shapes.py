"""Synthetic test meshes: sphere, torus, cube, capsule, and a holed sphere.

All generators emit counter-clockwise outward-facing triangles and keep
the shape inside the [-1, 1]^3 cube for their default parameters.
"""

from __future__ import annotations

import numpy as np

from .core import TriangleMesh
from .errors import DomainError

__all__ = ["icosphere", "torus", "box", "capsule", "open_sphere", "signed_volume"]

_PHI = (1.0 + 5.0**0.5) / 2.0

_ICO_VERTS = np.array(
    [
        (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
        (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
        (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
    ],
    dtype=np.float64,
)

_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 3),
    ],
    dtype=np.int64,
)


def signed_volume(mesh):
    """Signed volume enclosed by a mesh; positive for CCW-outward winding."""
    a, b, c = (mesh.vertices[mesh.triangles[:, i]] for i in range(3))
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def icosphere(radius=0.6, subdivisions=4):
    """Icosahedron subdivided ``subdivisions`` times and projected to a sphere.

    Produces 20 * 4**subdivisions triangles.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces
    return TriangleMesh(np.asarray(verts) * radius, np.asarray(faces))


def open_sphere(radius=0.6, subdivisions=4, drop_fraction=0.1, seed=0):
    """Icosphere with floor(drop_fraction * faces) random faces deleted.

    A deterministic non-watertight test input; the retained faces keep
    their original order.
    """
    if not 0.0 <= drop_fraction < 1.0:
        raise DomainError("drop_fraction must be in [0, 1)")
    mesh = icosphere(radius, subdivisions)
    n_drop = int(drop_fraction * mesh.n_triangles)
    rng = np.random.default_rng(seed)
    drop = rng.choice(mesh.n_triangles, size=n_drop, replace=False)
    keep = np.ones(mesh.n_triangles, dtype=bool)
    keep[drop] = False
    return TriangleMesh(mesh.vertices, mesh.triangles[keep])


def torus(major_radius=0.45, minor_radius=0.2, segments_major=64, segments_minor=48):
    """Torus around the z axis (ring in the xy-plane)."""
    if segments_major < 3 or segments_minor < 3:
        raise DomainError("torus needs at least 3 segments per loop")
    u = np.arange(segments_major) * (2.0 * np.pi / segments_major)
    v = np.arange(segments_minor) * (2.0 * np.pi / segments_minor)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = major_radius + minor_radius * np.cos(vv)
    verts = np.stack(
        [ring * np.cos(uu), ring * np.sin(uu), minor_radius * np.sin(vv)], axis=-1
    ).reshape(-1, 3)
    i = np.repeat(np.arange(segments_major), segments_minor)
    j = np.tile(np.arange(segments_minor), segments_major)
    a = i * segments_minor + j
    b = ((i + 1) % segments_major) * segments_minor + j
    c = ((i + 1) % segments_major) * segments_minor + (j + 1) % segments_minor
    d = i * segments_minor + (j + 1) % segments_minor
    faces = np.concatenate(
        [np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)]
    )
    mesh = TriangleMesh(verts, faces)
    if signed_volume(mesh) < 0:
        mesh = TriangleMesh(verts, faces[:, ::-1])
    return mesh


def box(size=1.0, center=(0.0, 0.0, 0.0)):
    """Axis-aligned cube of edge length ``size``, 12 triangles."""
    if size <= 0:
        raise DomainError("size must be positive")
    h = size / 2.0
    cx, cy, cz = center
    corners = np.array(
        [[cx + sx * h, cy + sy * h, cz + sz * h]
         for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    )
    # Corner index = 4*x-bit + 2*y-bit + z-bit; quads wound CCW outward.
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    faces = []
    for a, b, c, d in quads:
        faces += [(a, b, c), (a, c, d)]
    return TriangleMesh(corners, np.asarray(faces))


def capsule(radius=0.25, height=1.0, segments=32, rings=8):
    """Capsule along the y axis: a cylinder of the given height between
    two hemispherical caps.

    ``height`` is the cylinder length (total extent is height + 2*radius).
    """
    if radius <= 0 or height < 0:
        raise DomainError("radius must be positive and height non-negative")
    if segments < 3 or rings < 1:
        raise DomainError("segments >= 3 and rings >= 1 required")
    half = height / 2.0
    theta = np.arange(segments) * (2.0 * np.pi / segments)
    verts = [np.array([0.0, half + radius, 0.0])]  # top pole
    rows = []
    # Top cap rows (from pole outward), cylinder seam rows, bottom cap rows.
    lats = [np.pi / 2 - (np.pi / 2) * (k / rings) for k in range(1, rings + 1)]
    for lat in lats:
        rows.append(("top", lat))
    for lat in reversed(lats):
        rows.append(("bottom", lat))
    row_start = []
    for kind, lat in rows:
        row_start.append(len(verts))
        r = radius * np.cos(lat)
        y = half + radius * np.sin(lat) if kind == "top" else -half - radius * np.sin(lat)
        for t in theta:
            verts.append(np.array([r * np.cos(t), y, r * np.sin(t)]))
    verts.append(np.array([0.0, -half - radius, 0.0]))  # bottom pole
    bottom_pole = len(verts) - 1

    faces = []
    first = row_start[0]
    for s in range(segments):
        faces.append((0, first + s, first + (s + 1) % segments))
    for r0, r1 in zip(row_start[:-1], row_start[1:]):
        for s in range(segments):
            s1 = (s + 1) % segments
            faces.append((r0 + s, r1 + s, r1 + s1))
            faces.append((r0 + s, r1 + s1, r0 + s1))
    last = row_start[-1]
    for s in range(segments):
        faces.append((bottom_pole, last + (s + 1) % segments, last + s))
    mesh = TriangleMesh(np.asarray(verts), np.asarray(faces))
    if signed_volume(mesh) < 0:
        mesh = TriangleMesh(mesh.vertices, mesh.triangles[:, ::-1])
    return mesh

"""Orthographic normal-map rendering for visual mesh comparison.

Meshes are rendered from yaw angles around the vertical (y) axis with a
z-buffer over pixel centers, one sample per pixel, no anti-aliasing.
Per-pixel normals are barycentric-interpolated vertex normals
(area-weighted face-normal averages), renormalized; background pixels are
the zero vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeError
from .raster import raster_chunks

__all__ = ["NormalMapImage", "vertex_normals", "render_normal_maps", "normal_difference", "encode_normal_map"]

DEFAULT_YAWS = (0.0, 90.0, 180.0, 270.0)


@dataclass(frozen=True)
class NormalMapImage:
    """H x W x 3 image of unit view-space normals; background is zero."""

    data: np.ndarray
    yaw_degrees: float

    @property
    def foreground(self):
        return np.linalg.norm(self.data, axis=2) > 0.5


def vertex_normals(mesh):
    """Per-vertex unit normals: area-weighted average of face normals."""
    normals = np.zeros((mesh.n_vertices, 3))
    tris = mesh.triangles
    if len(tris):
        corners = mesh.corners()
        face = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        for k in range(3):
            np.add.at(normals, tris[:, k], face)
    lengths = np.linalg.norm(normals, axis=1)
    safe = lengths > 0
    normals[safe] /= lengths[safe, None]
    return normals


def _yaw_matrix(degrees):
    t = np.deg2rad(degrees)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def render_normal_maps(mesh, height, width, yaws=DEFAULT_YAWS):
    """Render one normal map per yaw angle (rotation about the y axis)."""
    if mesh.n_triangles == 0:
        raise EmptyInputError("cannot render an empty mesh")
    base_normals = vertex_normals(mesh)
    tris = mesh.triangles
    images = []
    for yaw in yaws:
        rot = _yaw_matrix(yaw)
        verts = mesh.vertices @ rot.T
        norms = base_normals @ rot.T
        corners = verts[tris]
        face = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        face_len = np.linalg.norm(face, axis=1)
        face_unit = np.where(face_len[:, None] > 0, face / np.maximum(face_len, 1e-300)[:, None], 0.0)

        zbuf = np.full(height * width, np.inf)
        nbuf = np.zeros((height * width, 3))
        for chunk in raster_chunks(verts, tris, height, width):
            pix = chunk["pix"]
            if not len(pix):
                continue
            order = np.lexsort((chunk["z"], pix))
            pix_s = pix[order]
            first = np.ones(len(pix_s), dtype=bool)
            first[1:] = pix_s[1:] != pix_s[:-1]
            win = order[first]
            pw = pix[win]
            better = chunk["z"][win] < zbuf[pw]
            win = win[better]
            pw = pw[better]
            zbuf[pw] = chunk["z"][win]
            tri_w = chunk["tri"][win]
            n = (
                chunk["wa"][win, None] * norms[tris[tri_w, 0]]
                + chunk["wb"][win, None] * norms[tris[tri_w, 1]]
                + chunk["wc"][win, None] * norms[tris[tri_w, 2]]
            )
            ln = np.linalg.norm(n, axis=1)
            degenerate = ln < 1e-12
            if degenerate.any():
                n[degenerate] = face_unit[tri_w[degenerate]]
                ln = np.linalg.norm(n, axis=1)
                ln[ln == 0] = 1.0
            nbuf[pw] = n / ln[:, None]
        images.append(NormalMapImage(nbuf.reshape(height, width, 3), float(yaw)))
    return images


def normal_difference(maps_a, maps_b):
    """Mean squared normal error over all pixels and views.

    Per pixel the error is the squared euclidean norm of the normal
    difference; background pixels participate as zero vectors.
    """
    if len(maps_a) != len(maps_b):
        raise ShapeError("view counts differ")
    total = 0.0
    n_pix = 0
    for ma, mb in zip(maps_a, maps_b):
        if ma.data.shape != mb.data.shape:
            raise ShapeError("normal map shapes differ")
        diff = ma.data - mb.data
        total += float(np.sum(diff * diff))
        n_pix += ma.data.shape[0] * ma.data.shape[1]
    return total / n_pix


def encode_normal_map(image):
    """Map unit normals to the [0, 1] image encoding (n + 1) / 2."""
    return (image.data + 1.0) / 2.0

"""Mesh and image comparison metrics: chamfer, point-to-surface, rendered
normal-map difference, PSNR, and SSIM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .bvh import TriangleBvh
from .errors import DegenerateInputError, DomainError, EmptyInputError, ShapeError

__all__ = [
    "SampledSurface",
    "sample_surface",
    "point_to_surface",
    "p2s",
    "chamfer",
    "psnr",
    "ssim",
    "psnr_ssim",
]

DEFAULT_SAMPLES = 100_000


@dataclass(frozen=True)
class SampledSurface:
    """Uniform area-weighted samples of a mesh surface."""

    points: np.ndarray
    triangle_index: np.ndarray
    mesh: object
    seed: int

    @property
    def count(self):
        return len(self.points)


def _canonical_triangle_order(corners):
    """Order triangles by their corner coordinates so sampling does not
    depend on the order of the triangle list."""
    keys = corners.reshape(len(corners), 9)
    return np.lexsort(tuple(keys[:, k] for k in range(8, -1, -1)))


def sample_surface(mesh, count=DEFAULT_SAMPLES, seed=0):
    """Draw ``count`` uniform surface points (area-weighted triangles,
    uniform barycentric coordinates).  Deterministic given the seed and
    invariant to permutations of the triangle list."""
    if mesh.n_triangles == 0:
        raise EmptyInputError("cannot sample an empty mesh")
    if count < 1:
        raise DomainError("count must be >= 1")
    corners = mesh.corners()
    cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    total = areas.sum()
    if total <= 0.0:
        raise DegenerateInputError("mesh has zero surface area")
    order = _canonical_triangle_order(corners)
    cum = np.cumsum(areas[order])
    rng = np.random.default_rng(seed)
    pick = np.searchsorted(cum, rng.random(count) * total, side="right")
    pick = order[np.minimum(pick, len(order) - 1)]
    u = rng.random(count)
    v = rng.random(count)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tri = corners[pick]
    points = (
        tri[:, 0]
        + u[:, None] * (tri[:, 1] - tri[:, 0])
        + v[:, None] * (tri[:, 2] - tri[:, 0])
    )
    return SampledSurface(points, pick, mesh, seed)


def point_to_surface(point, mesh):
    """Exact minimal distance from one point to the mesh surface."""
    if mesh.n_triangles == 0:
        raise EmptyInputError("mesh has no triangles")
    return float(TriangleBvh(mesh).distances(np.asarray(point, dtype=np.float64))[0])


def p2s(mesh_pred, mesh_gt, count=DEFAULT_SAMPLES, seed=0):
    """Mean distance from samples of the predicted surface to the reference mesh."""
    samples = sample_surface(mesh_pred, count, seed)
    return float(TriangleBvh(mesh_gt).distances(samples.points).mean())


def chamfer(mesh_a, mesh_b, count=DEFAULT_SAMPLES, seed=0, seed_b=None):
    """Symmetric mean surface distance.

    Half the mean distance of A-samples to B plus half the mean of
    B-samples to A.  ``seed`` drives the A-side sampling and ``seed_b``
    (default seed + 1) the B side, so chamfer(a, b, seed=s, seed_b=t)
    equals chamfer(b, a, seed=t, seed_b=s) exactly.
    """
    if seed_b is None:
        seed_b = seed + 1
    return 0.5 * p2s(mesh_a, mesh_b, count, seed) + 0.5 * p2s(mesh_b, mesh_a, count, seed_b)


def psnr(img_a, img_b, peak=1.0):
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    a = np.asarray(img_a, dtype=np.float64)
    b = np.asarray(img_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


def _gaussian_kernel(radius=5, sigma=1.5):
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def ssim(img_a, img_b, peak=1.0, k1=0.01, k2=0.03, sigma=1.5, radius=5):
    """Structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Channels are scored independently and averaged; the window radius is
    cropped from the borders before averaging, so boundary handling does
    not affect the score.
    """
    a = np.asarray(img_a, dtype=np.float64)
    b = np.asarray(img_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[:, :, None]
        b = b[:, :, None]
    if min(a.shape[0], a.shape[1]) < 2 * radius + 1:
        raise DomainError("image smaller than the SSIM window")
    kernel = _gaussian_kernel(radius, sigma)

    def filt(img):
        out = convolve1d(img, kernel, axis=0, mode="nearest")
        return convolve1d(out, kernel, axis=1, mode="nearest")

    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    scores = []
    for ch in range(a.shape[2]):
        x = a[:, :, ch]
        y = b[:, :, ch]
        ux = filt(x)
        uy = filt(y)
        vx = filt(x * x) - ux * ux
        vy = filt(y * y) - uy * uy
        vxy = filt(x * y) - ux * uy
        smap = ((2 * ux * uy + c1) * (2 * vxy + c2)) / (
            (ux * ux + uy * uy + c1) * (vx + vy + c2)
        )
        scores.append(float(np.mean(smap[radius:-radius, radius:-radius])))
    return float(np.mean(scores))


def psnr_ssim(img_a, img_b, peak=1.0):
    """Both visual metrics at once, as a (psnr_db, ssim) pair."""
    return psnr(img_a, img_b, peak), ssim(img_a, img_b, peak)

"""Core domain types: meshes, coefficient grids, the cosine basis, and field evaluation.

Conventions used throughout the package:

* Geometry lives in the normalized cube [-1, 1]^3.
* The view direction is +z; a screen pixel (x_pix, y_pix) samples the
  continuous point x = -1 + 2*(x_pix + 0.5)/W, y = -1 + 2*(y_pix + 0.5)/H
  (pixel centers), with y increasing in raster-row order.
* Per pixel, the occupancy signal along z is stored as N cosine
  coefficients [a_0, a_1, ..., a_{N-1}].  The basis folds the
  conventional a_0/2 into its first column, so reconstruction is a
  single dot product:  f(z) = sum_n B[z, n] * a_n  with
  B[z, 0] = 0.5 and B[z, n] = cos(n*pi*(z+1)/2) for n >= 1.
* All in-memory computation is float64; only on-disk payloads are float32.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DomainError, EmptyInputError, ShapeError

__all__ = [
    "TriangleMesh",
    "FofGrid",
    "IntervalBuffer",
    "OccupancyVolume",
    "CosineBasis",
    "Similarity",
    "ENTER",
    "EXIT",
    "normalize_mesh",
    "make_basis",
    "evaluate_field",
    "evaluate_point",
    "resample_grid",
    "pixel_centers",
    "default_z_grid",
]

# Event orientation codes.  ENTER marks a front-facing crossing (the ray
# goes inside), EXIT a back-facing one.
ENTER = 0
EXIT = 1

# z-columns of the field evaluation are computed in fixed-width blocks so
# that the value at a given z never depends on which other samples share
# the request (bitwise sampling scalability).
_EVAL_BLOCK = 32


def _as_float_array(values, name):
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must contain only finite values")
    return arr


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle soup.

    ``vertices`` is (V, 3) float64, ``triangles`` (T, 3) integer.
    Counter-clockwise winding means outward-facing; this is a documented
    contract, not validated -- non-watertight and inconsistently wound
    meshes are legal inputs.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        tris = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if verts.ndim != 2 or verts.shape[1] != 3:
            verts = verts.reshape(-1, 3)
        if tris.size:
            if tris.ndim != 2 or tris.shape[1] != 3:
                tris = tris.reshape(-1, 3)
            if tris.min() < 0 or tris.max() >= len(verts):
                raise DomainError("triangle index out of range")
        else:
            tris = tris.reshape(0, 3)
        if verts.size and not np.all(np.isfinite(verts)):
            raise DomainError("vertex coordinates must be finite")
        verts.setflags(write=False)
        tris.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def corners(self):
        """Triangle corner coordinates, shape (T, 3, 3)."""
        return self.vertices[self.triangles]


@dataclass(frozen=True)
class Similarity:
    """Uniform scale + translation:  p' = scale * p + offset."""

    scale: float
    offset: np.ndarray

    def apply(self, points):
        return np.asarray(points, dtype=np.float64) * self.scale + self.offset

    def inverse(self):
        return Similarity(1.0 / self.scale, -np.asarray(self.offset) / self.scale)


@dataclass(frozen=True)
class FofGrid:
    """H x W grid of N cosine coefficients per pixel, stored (H, W, N) float64."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ShapeError("coefficient grid must be (H, W, N) with all dims >= 1")
        if not np.all(np.isfinite(arr)):
            raise DomainError("coefficient grid must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def terms(self):
        return self.data.shape[2]


@dataclass(frozen=True)
class IntervalBuffer:
    """Per-pixel surface-crossing events in a flat CSR-style layout.

    ``offsets`` has length H*W + 1; the events of pixel (x, y) are the
    slice ``offsets[y*W + x] : offsets[y*W + x + 1]`` of ``depths`` /
    ``orientations``.  Events are sorted by depth within each pixel, with
    ENTER ordered before EXIT at equal depth.
    """

    height: int
    width: int
    offsets: np.ndarray
    depths: np.ndarray
    orientations: np.ndarray

    def __post_init__(self):
        offs = np.ascontiguousarray(np.asarray(self.offsets, dtype=np.int64))
        deps = np.ascontiguousarray(np.asarray(self.depths, dtype=np.float64))
        oris = np.ascontiguousarray(np.asarray(self.orientations, dtype=np.uint8))
        if offs.shape != (self.height * self.width + 1,):
            raise ShapeError("offsets must have length H*W + 1")
        if offs[0] != 0 or offs[-1] != len(deps) or len(deps) != len(oris):
            raise ShapeError("offsets inconsistent with event arrays")
        for a in (offs, deps, oris):
            a.setflags(write=False)
        object.__setattr__(self, "offsets", offs)
        object.__setattr__(self, "depths", deps)
        object.__setattr__(self, "orientations", oris)

    @classmethod
    def from_event_lists(cls, height, width, events):
        """Build from a {(x_pix, y_pix): [(z, orientation), ...]} mapping."""
        counts = np.zeros(height * width, dtype=np.int64)
        for (x, y), evs in events.items():
            counts[y * width + x] = len(evs)
        offsets = np.concatenate(([0], np.cumsum(counts)))
        depths = np.empty(offsets[-1], dtype=np.float64)
        orientations = np.empty(offsets[-1], dtype=np.uint8)
        for (x, y), evs in events.items():
            start = offsets[y * width + x]
            for i, (z, o) in enumerate(evs):
                depths[start + i] = z
                orientations[start + i] = o
        return cls(height, width, offsets, depths, orientations)

    @property
    def n_events(self):
        return len(self.depths)

    def counts(self):
        return np.diff(self.offsets)

    def pixel_ids(self):
        """Pixel linear index (y*W + x) of every event."""
        return np.repeat(np.arange(self.height * self.width), self.counts())

    def events_at(self, x_pix, y_pix):
        lo, hi = self.offsets[y_pix * self.width + x_pix : y_pix * self.width + x_pix + 2]
        return list(zip(self.depths[lo:hi].tolist(), self.orientations[lo:hi].tolist()))

    def _boundary_positions(self):
        b = self.offsets[1:-1]
        return b[(b > 0) & (b < self.n_events)]

    def is_sorted(self):
        """True when depths are non-decreasing within every pixel."""
        if self.n_events < 2:
            return True
        rising = self.depths[1:] >= self.depths[:-1]
        rising[self._boundary_positions() - 1] = True  # pixel boundaries may reset
        return bool(np.all(rising))

    def is_matched(self):
        """True when events strictly alternate ENTER/EXIT per pixel with rising depth."""
        counts = self.counts()
        if np.any(counts % 2):
            return False
        rel = np.arange(self.n_events) - np.repeat(self.offsets[:-1], counts)
        if np.any(self.orientations != (rel % 2)):
            return False
        if self.n_events >= 2:
            rising = self.depths[1:] > self.depths[:-1]
            rising[self._boundary_positions() - 1] = True
            if not np.all(rising):
                return False
        return True


@dataclass(frozen=True)
class OccupancyVolume:
    """Reconstructed occupancy samples, (H, W, D) float64, with their z grid."""

    data: np.ndarray
    z_grid: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        zs = np.ascontiguousarray(np.asarray(self.z_grid, dtype=np.float64))
        if arr.ndim != 3 or zs.ndim != 1 or arr.shape[2] != len(zs):
            raise ShapeError("volume must be (H, W, D) with a matching z grid")
        arr.setflags(write=False)
        zs.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "z_grid", zs)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def depth(self):
        return self.data.shape[2]


@dataclass(frozen=True)
class CosineBasis:
    """Evaluation matrix of the cosine basis at fixed z samples.

    ``matrix`` is (D, N) with matrix[d, 0] = 0.5 exactly and
    matrix[d, n] = cos(n*pi*(z_d + 1)/2) for n >= 1.
    """

    terms: int
    z_grid: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        zs = np.ascontiguousarray(np.asarray(self.z_grid, dtype=np.float64))
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        if mat.shape != (len(zs), self.terms):
            raise ShapeError("basis matrix must be (len(z_grid), terms)")
        zs.setflags(write=False)
        mat.setflags(write=False)
        object.__setattr__(self, "z_grid", zs)
        object.__setattr__(self, "matrix", mat)


def normalize_mesh(mesh, margin=0.0):
    """Center a mesh and scale it uniformly into [-(1-margin), 1-margin]^3.

    Returns the rescaled mesh and the forward :class:`Similarity`, so
    results can be mapped back with its inverse.  The mesh is always
    rescaled to touch the target bounds on its largest axis, even if it
    already fits.
    """
    if mesh.n_vertices == 0 or mesh.n_triangles == 0:
        raise EmptyInputError("cannot normalize an empty mesh")
    if not 0.0 <= margin < 1.0:
        raise DomainError("margin must be in [0, 1)")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0.0:
        raise DegenerateInputError("mesh bounding box has zero extent on all axes")
    center = (lo + hi) / 2.0
    scale = 2.0 * (1.0 - margin) / extent
    transform = Similarity(scale, -center * scale)
    return TriangleMesh(transform.apply(mesh.vertices), mesh.triangles), transform


def default_z_grid(depth):
    """D uniform z samples spanning [-1, 1] inclusive."""
    if depth < 2:
        raise DomainError("depth must be >= 2")
    return np.linspace(-1.0, 1.0, depth)


def make_basis(terms, z_grid):
    """Build the cosine-basis matrix for the given z samples."""
    if terms < 1:
        raise DomainError("terms must be >= 1")
    zs = _as_float_array(z_grid, "z_grid")
    if zs.ndim != 1:
        raise ShapeError("z_grid must be one-dimensional")
    if zs.size and (zs.min() < -1.0 or zs.max() > 1.0):
        raise DomainError("z samples must lie in [-1, 1]")
    matrix = np.empty((len(zs), terms), dtype=np.float64)
    matrix[:, 0] = 0.5
    if terms > 1:
        n = np.arange(1, terms, dtype=np.float64)
        matrix[:, 1:] = np.cos(np.multiply.outer((zs + 1.0) * (np.pi / 2.0), n))
    return CosineBasis(terms, zs, matrix)


def evaluate_field(fof, basis):
    """Reconstruct occupancy samples: out[y, x, d] = sum_n B[d, n] * C[y, x, n].

    The value produced for a given z sample is bitwise independent of the
    other samples in the basis: columns are computed in fixed-size blocks,
    so evaluating nested z grids yields identical values at shared
    locations.
    """
    if basis.terms != fof.terms:
        raise ShapeError(
            f"basis has {basis.terms} terms but grid stores {fof.terms}"
        )
    h, w, n = fof.data.shape
    d = len(basis.z_grid)
    flat = fof.data.reshape(h * w, n)
    out = np.empty((h * w, d), dtype=np.float64)
    for start in range(0, d, _EVAL_BLOCK):
        stop = min(start + _EVAL_BLOCK, d)
        block = np.zeros((n, _EVAL_BLOCK), dtype=np.float64)
        block[:, : stop - start] = basis.matrix[start:stop].T
        out[:, start:stop] = (flat @ block)[:, : stop - start]
    return OccupancyVolume(out.reshape(h, w, d), basis.z_grid)


def evaluate_point(fof, x_pix, y_pix, z):
    """Occupancy value of one pixel's signal at a single z."""
    if not 0 <= x_pix < fof.width or not 0 <= y_pix < fof.height:
        raise IndexError("pixel index out of range")
    if not -1.0 <= z <= 1.0:
        raise DomainError("z must lie in [-1, 1]")
    coeffs = fof.data[y_pix, x_pix]
    n = np.arange(1, fof.terms, dtype=np.float64)
    value = 0.5 * coeffs[0]
    if fof.terms > 1:
        value += float(coeffs[1:] @ np.cos((z + 1.0) * (np.pi / 2.0) * n))
    return float(value)


def pixel_centers(count):
    """Continuous coordinates of pixel centers along one axis: -1 + 2(i+0.5)/count."""
    return -1.0 + 2.0 * (np.arange(count) + 0.5) / count


def resample_grid(fof, height, width):
    """Resample the coefficient grid at a new pixel resolution.

    The stored grid is read as a piecewise-constant field: pixel i of the
    source owns the half-open slab [-1 + 2i/W, -1 + 2(i+1)/W).  New pixel
    centers look up the owning source pixel (boundary hits take the
    higher-index pixel), so no new coefficient values are invented and
    one conversion can feed extractions at any resolution.
    """
    if height < 1 or width < 1:
        raise DomainError("target resolution must be >= 1")
    xs = np.clip(
        np.floor((pixel_centers(width) + 1.0) / 2.0 * fof.width).astype(np.int64),
        0,
        fof.width - 1,
    )
    ys = np.clip(
        np.floor((pixel_centers(height) + 1.0) / 2.0 * fof.height).astype(np.int64),
        0,
        fof.height - 1,
    )
    return FofGrid(fof.data[np.ix_(ys, xs)])

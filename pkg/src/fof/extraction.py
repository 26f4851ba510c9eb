"""Coefficient grid to mesh extraction.

The occupancy volume is sampled from the grid, padded with one layer of
zeros so in-bounds geometry always closes, and contoured with the
canonical 256-case marching cubes tables.  Vertices produced on grid
edges parallel to the z axis are flagged reliable: along z the occupancy
is a known cosine polynomial, so their crossing can be solved to machine
precision instead of linearly interpolated.  The remaining vertices carry
the view-direction sampling bias (stair-step banding) and are repaired
either by a Laplacian-coordinate least-squares solve or by restricted
Laplacian smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import LinearOperator, cg, spilu

from ._mc_tables import CORNER_OFFSETS, EDGE_CORNERS, TRI_TABLE
from .core import FofGrid, TriangleMesh, default_z_grid, evaluate_field, make_basis, pixel_centers
from .errors import DomainError
from .raster import raster_chunks  # noqa: F401  (re-exported pipeline neighbors)

__all__ = [
    "ReliabilityMesh",
    "LaplacianSystem",
    "marching_cubes_flagged",
    "refine_z_crossings",
    "solve_laplacian_constraint",
    "smooth_unreliable",
    "fof_to_mesh",
    "laplacian_energy",
]

_BISECTION_STEPS = 40
_CG_RTOL = 1e-8

# Per cube edge: (dy, dx, dz) of the edge origin within the cell and the
# volume axis (0=y, 1=x, 2=z) the edge runs along.
_EDGE_ORIGIN = np.empty((12, 3), dtype=np.int64)
_EDGE_AXIS = np.empty(12, dtype=np.int64)
for _e in range(12):
    _a = CORNER_OFFSETS[EDGE_CORNERS[_e, 0]].astype(np.int64)
    _b = CORNER_OFFSETS[EDGE_CORNERS[_e, 1]].astype(np.int64)
    _o = np.minimum(_a, _b)
    _d = np.flatnonzero(_a != _b)[0]
    _EDGE_ORIGIN[_e] = _o[[1, 0, 2]]  # table (dx, dy, dz) -> volume (dy, dx, dz)
    _EDGE_AXIS[_e] = {1: 0, 0: 1, 2: 2}[int(_d)]


@dataclass(frozen=True)
class ReliabilityMesh:
    """Marching cubes output with a per-vertex reliability flag.

    ``reliable[i]`` is True when vertex i lies on a grid edge parallel to
    the z axis (and both edge endpoints are real samples, not padding).
    ``edge_pixel`` holds the (y_pix, x_pix) column of reliable vertices,
    ``edge_z`` the z range of their originating edge; both are -1 / NaN
    for unreliable vertices.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    reliable: np.ndarray
    iso: float = 0.5
    edge_pixel: np.ndarray = field(default=None, repr=False)
    edge_z: np.ndarray = field(default=None, repr=False)
    refine_misses: int = 0

    @property
    def n_vertices(self):
        return len(self.vertices)

    def as_triangle_mesh(self):
        return TriangleMesh(self.vertices, self.triangles)


def _padded_volume(fof, depth, iso):
    basis = make_basis(fof.terms, default_z_grid(depth))
    h, w = fof.height, fof.width
    padded = np.zeros((h + 2, w + 2, depth + 2), dtype=np.float64)
    # Pixels with all-zero coefficients reconstruct to exactly zero, so
    # only covered pixels need the basis product.
    flat = fof.data.reshape(h * w, fof.terms)
    covered = np.flatnonzero(np.any(flat != 0.0, axis=1))
    if covered.size:
        vol = evaluate_field(
            FofGrid(flat[covered].reshape(len(covered), 1, fof.terms)), basis
        )
        cy, cx = np.unravel_index(covered, (h, w))
        padded[cy + 1, cx + 1, 1:-1] = vol.data.reshape(len(covered), depth)
    ys = pixel_centers(h)
    xs = pixel_centers(w)
    zs = basis.z_grid
    ys_p = np.concatenate(([ys[0] - 2.0 / h], ys, [ys[-1] + 2.0 / h]))
    xs_p = np.concatenate(([xs[0] - 2.0 / w], xs, [xs[-1] + 2.0 / w]))
    hz = zs[1] - zs[0]
    zs_p = np.concatenate(([zs[0] - hz], zs, [zs[-1] + hz]))
    return padded, ys_p, xs_p, zs_p


def marching_cubes_flagged(fof, depth, iso=0.5):
    """Contour the reconstructed occupancy at ``iso`` with reliability flags.

    The volume is sampled on the grid's pixel centers and ``depth``
    uniform z samples spanning [-1, 1], padded with one zero layer on
    every side.  Vertices are shared exactly between adjacent cells.  An
    empty iso-surface yields an empty mesh.
    """
    if depth < 2:
        raise DomainError("depth must be >= 2")
    if not np.isfinite(iso):
        raise DomainError("iso must be finite")
    volume, ys, xs, zs = _padded_volume(fof, depth, iso)
    below = volume < iso

    # One crossing vertex per grid edge whose endpoints straddle iso.
    coords = (ys, xs, zs)
    vert_pos = []
    vert_edge_origin = []  # linear index into the padded grid
    vert_axis = []
    grid_shape = volume.shape
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        cross = below[tuple(lo)] != below[tuple(hi)]
        origins = np.flatnonzero(cross)
        if origins.size == 0:
            vert_pos.append(np.empty((0, 3)))
            vert_edge_origin.append(origins)
            vert_axis.append(axis)
            continue
        edge_grid = cross.shape
        oy, ox, oz = np.unravel_index(origins, edge_grid)
        base = np.ravel_multi_index((oy, ox, oz), grid_shape)
        step = {0: grid_shape[1] * grid_shape[2], 1: grid_shape[2], 2: 1}[axis]
        v0 = volume.ravel()[base]
        v1 = volume.ravel()[base + step]
        t = (iso - v0) / (v1 - v0)
        pos = np.stack(
            [xs[ox].astype(np.float64), ys[oy].astype(np.float64), zs[oz].astype(np.float64)],
            axis=1,
        )
        # axis order of pos is (x, y, z); advance the matching component
        comp = {0: 1, 1: 0, 2: 2}[axis]
        deltas = np.diff(coords[axis])
        stepsz = deltas[(oy, ox, oz)[axis]]
        pos[:, comp] += t * stepsz
        vert_pos.append(pos)
        vert_edge_origin.append(base)  # padded-grid linear origin, ascending
        vert_axis.append(axis)

    n_per_axis = [len(p) for p in vert_pos]
    if sum(n_per_axis) == 0:
        return ReliabilityMesh(
            np.empty((0, 3)), np.empty((0, 3), dtype=np.int64),
            np.empty(0, dtype=bool), iso,
            np.full((0, 2), -1, dtype=np.int64), np.full((0, 2), np.nan),
        )
    axis_base = np.concatenate(([0], np.cumsum(n_per_axis)))[:3]
    vertices = np.concatenate(vert_pos)

    # Active cells: any corner differs from corner (0,0,0).
    c0 = below[:-1, :-1, :-1]
    mixed = np.zeros_like(c0)
    for dy, dx, dz in [(0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1)]:
        np.logical_or(
            mixed,
            below[dy : dy + c0.shape[0], dx : dx + c0.shape[1], dz : dz + c0.shape[2]] != c0,
            out=mixed,
        )
    cells = np.flatnonzero(mixed)
    cy, cx, cz = np.unravel_index(cells, c0.shape)
    cube_index = np.zeros(len(cells), dtype=np.uint8)
    flat_below = below.ravel()
    for corner in range(8):
        dx, dy, dz = CORNER_OFFSETS[corner]
        lin = np.ravel_multi_index((cy + dy, cx + dx, cz + dz), grid_shape)
        cube_index |= (flat_below[lin].astype(np.uint8)) << corner

    rows = TRI_TABLE[cube_index]
    valid = rows >= 0
    edge_codes = rows[valid].astype(np.int64)
    cell_of_ref = np.repeat(np.arange(len(cells)), valid.sum(axis=1))

    # Map each (cell, cube-edge) reference to its global vertex index.
    ref_axis = _EDGE_AXIS[edge_codes]
    oy = cy[cell_of_ref] + _EDGE_ORIGIN[edge_codes, 0]
    ox = cx[cell_of_ref] + _EDGE_ORIGIN[edge_codes, 1]
    oz = cz[cell_of_ref] + _EDGE_ORIGIN[edge_codes, 2]
    lin = np.ravel_multi_index((oy, ox, oz), grid_shape)
    vert_ids = np.empty(len(edge_codes), dtype=np.int64)
    for axis in range(3):
        sel = ref_axis == axis
        if sel.any():
            found = np.searchsorted(vert_edge_origin[axis], lin[sel])
            vert_ids[sel] = axis_base[axis] + found
    # With bits set on below-iso corners, the tables wind faces
    # counter-clockwise toward the above-iso (inside) region already.
    triangles = vert_ids.reshape(-1, 3)

    # Reliability: z-parallel edges whose endpoints are both real samples.
    reliable = np.zeros(len(vertices), dtype=bool)
    edge_pixel = np.full((len(vertices), 2), -1, dtype=np.int64)
    edge_z = np.full((len(vertices), 2), np.nan)
    zc = vert_edge_origin[2]
    if zc.size:
        zy, zx, zz = np.unravel_index(zc, grid_shape)
        real = (
            (zy >= 1) & (zy <= grid_shape[0] - 2)
            & (zx >= 1) & (zx <= grid_shape[1] - 2)
            & (zz >= 1) & (zz <= grid_shape[2] - 3)
        )
        ids = axis_base[2] + np.arange(len(zc))
        reliable[ids[real]] = True
        edge_pixel[ids[real], 0] = zy[real] - 1
        edge_pixel[ids[real], 1] = zx[real] - 1
        edge_z[ids[real], 0] = zs[zz[real]]
        edge_z[ids[real], 1] = zs[zz[real] + 1]
    return ReliabilityMesh(vertices, triangles, reliable, iso, edge_pixel, edge_z)


def _eval_coeff_rows(coeffs, z):
    """Occupancy of per-row coefficient vectors at per-row z.

    Clenshaw recurrence on the Chebyshev form: with u = cos(pi (z+1)/2),
    cos(n pi (z+1)/2) = T_n(u).  ``coeffs`` is (R, N); evaluation is
    elementwise over rows.
    """
    return _eval_coeff_cols(np.ascontiguousarray(coeffs.T), z)


def _eval_coeff_cols(coeffs_t, z, out=None):
    """Clenshaw evaluation with coefficients laid out (N, R), allocation-free
    inner loop (the bisection refinement calls this 40 times)."""
    u2 = np.cos((z + 1.0) * (np.pi / 2.0))
    n_terms, n_rows = coeffs_t.shape
    b1 = np.zeros(n_rows)
    b2 = np.zeros(n_rows)
    tmp = np.empty(n_rows)
    u2 = 2.0 * u2
    for k in range(n_terms - 1, 0, -1):
        np.multiply(u2, b1, out=tmp)
        tmp -= b2
        tmp += coeffs_t[k]
        b2, b1, tmp = b1, tmp, b2
    u2 *= 0.5
    if out is None:
        out = np.empty(n_rows)
    np.multiply(u2, b1, out=out)
    out -= b2
    out += 0.5 * coeffs_t[0]
    return out


def refine_z_crossings(mesh, fof):
    """Replace reliable vertices' z by the root of the occupancy crossing.

    Bisection over the originating grid edge, 40 halvings (final interval
    below 1e-12 of the edge length).  x and y are unchanged; unreliable
    vertices are untouched.  Edges whose recomputed endpoint values do not
    straddle the iso level keep their interpolated z and are counted in
    ``refine_misses``.
    """
    sel = np.flatnonzero(mesh.reliable)
    if sel.size == 0:
        return mesh
    iso = mesh.iso
    ypix = mesh.edge_pixel[sel, 0]
    xpix = mesh.edge_pixel[sel, 1]
    coeffs_t = np.ascontiguousarray(fof.data[ypix, xpix].T)
    lo = mesh.edge_z[sel, 0].copy()
    hi = mesh.edge_z[sel, 1].copy()
    f_lo = _eval_coeff_cols(coeffs_t, lo)
    f_hi = _eval_coeff_cols(coeffs_t, hi)
    lo_below = f_lo < iso
    ok = lo_below != (f_hi < iso)
    f_mid = np.empty_like(lo)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        _eval_coeff_cols(coeffs_t, mid, out=f_mid)
        go_lo = (f_mid < iso) == lo_below
        lo = np.where(go_lo, mid, lo)
        hi = np.where(go_lo, hi, mid)
    z_star = 0.5 * (lo + hi)
    vertices = mesh.vertices.copy()
    vertices[sel[ok], 2] = z_star[ok]
    return ReliabilityMesh(
        vertices,
        mesh.triangles,
        mesh.reliable,
        mesh.iso,
        mesh.edge_pixel,
        mesh.edge_z,
        refine_misses=int(np.count_nonzero(~ok)),
    )


@dataclass
class LaplacianSystem:
    """Combinatorial Laplacian of a mesh's vertex graph.

    ``laplacian`` is D - A with D the diagonal degree matrix and A the
    0/1 adjacency from triangle connectivity; ``free`` marks the vertices
    the repair is allowed to move.
    """

    adjacency: sp.csr_matrix
    degrees: np.ndarray
    free: np.ndarray

    @classmethod
    def from_mesh(cls, mesh):
        n = mesh.n_vertices
        tris = mesh.triangles
        if len(tris):
            pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
            lo = pairs.min(axis=1).astype(np.int64)
            hi = pairs.max(axis=1).astype(np.int64)
            key = np.unique(lo * n + hi)  # scalar keys: much faster than 2-column unique
            i, j = key // n, key % n
            rows = np.concatenate([i, j])
            cols = np.concatenate([j, i])
            adj = sp.csr_matrix(
                (np.ones(len(rows)), (rows, cols)), shape=(n, n)
            )
        else:
            adj = sp.csr_matrix((n, n))
        degrees = np.asarray(adj.sum(axis=1)).ravel()
        return cls(adj, degrees, ~mesh.reliable.copy())

    @property
    def laplacian(self):
        return sp.diags(self.degrees) - self.adjacency

    def energy(self, vertices):
        """||(D - A) X||^2 over all coordinates."""
        r = self.laplacian @ vertices
        return float(np.sum(r * r))


def laplacian_energy(mesh):
    """Convenience: ||(D - A) X||^2 of a ReliabilityMesh or TriangleMesh."""
    reliable = getattr(mesh, "reliable", np.ones(len(mesh.vertices), dtype=bool))
    probe = ReliabilityMesh(mesh.vertices, mesh.triangles, np.asarray(reliable, dtype=bool))
    return LaplacianSystem.from_mesh(probe).energy(probe.vertices)


def solve_laplacian_constraint(mesh):
    """Move unreliable vertices to minimize the squared Laplacian coordinates.

    Reliable vertices are held bit-identical; each coordinate axis is an
    independent sparse least-squares problem solved by conjugate gradient
    on the normal equations (relative residual 1e-8 or 10 * |U|
    iterations).  Unreliable vertices in components with no reliable
    vertex are left at their input position.
    """
    sysm = LaplacianSystem.from_mesh(mesh)
    free = sysm.free.copy()
    n_skipped = 0
    if free.any() and not free.all():
        _, labels = connected_components(sysm.adjacency, directed=False)
        anchored = np.zeros(labels.max() + 1, dtype=bool)
        np.logical_or.at(anchored, labels, ~free)
        orphan = free & ~anchored[labels]
        n_skipped = int(np.count_nonzero(orphan))
        free &= ~orphan
    elif free.all():
        return TriangleMesh(mesh.vertices, mesh.triangles)  # nothing anchors the solve
    if not free.any():
        return TriangleMesh(mesh.vertices, mesh.triangles)

    lap = sysm.laplacian.tocsc()
    u_idx = np.flatnonzero(free)
    f_idx = np.flatnonzero(~free)
    l_u = lap[:, u_idx].tocsr()
    l_f = lap[:, f_idx].tocsr()
    normal = (l_u.T @ l_u).tocsc()
    rhs = -(l_u.T @ (l_f @ mesh.vertices[f_idx]))
    # Incomplete-LU preconditioner; falls back to plain CG if the
    # factorization breaks down (the system is SPD, so CG still converges).
    try:
        ilu = spilu(normal, drop_tol=1e-4, fill_factor=10)
        precond = LinearOperator(normal.shape, ilu.solve)
    except RuntimeError:
        precond = None
    out = mesh.vertices.copy()
    maxiter = max(10 * len(u_idx), 1)
    for axis in range(3):
        x, _ = cg(
            normal,
            rhs[:, axis],
            x0=mesh.vertices[u_idx, axis],
            rtol=_CG_RTOL,
            atol=0.0,
            maxiter=maxiter,
            M=precond,
        )
        out[u_idx, axis] = x
    return TriangleMesh(out, mesh.triangles)


def smooth_unreliable(mesh, iterations=3):
    """Restricted uniform Laplacian smoothing: unreliable vertices move to
    the mean of their neighbors, reliable vertices stay fixed.

    The cheap real-time fallback for the least-squares solve.
    """
    if iterations < 0:
        raise DomainError("iterations must be >= 0")
    sysm = LaplacianSystem.from_mesh(mesh)
    movable = sysm.free & (sysm.degrees > 0)
    verts = mesh.vertices.copy()
    for _ in range(iterations):
        mean = sysm.adjacency @ verts
        mean[movable] /= sysm.degrees[movable, None]
        verts[movable] = mean[movable]
    return TriangleMesh(verts, mesh.triangles)


def fof_to_mesh(fof, depth=256, iso=0.5, repair="constraint", smooth_iters=3):
    """Full extraction pipeline: contour, refine z crossings, repair.

    ``repair`` is one of ``"constraint"`` (Laplacian least squares),
    ``"smooth"`` (restricted smoothing, ``smooth_iters`` rounds), or
    ``"none"`` (return the refined flagged mesh as-is).
    """
    if not 0.0 < iso < 1.0:
        raise DomainError("iso must lie strictly between 0 and 1")
    if repair not in ("constraint", "smooth", "none"):
        raise DomainError(f"unknown repair mode {repair!r}")
    flagged = refine_z_crossings(marching_cubes_flagged(fof, depth, iso), fof)
    if repair == "constraint":
        return solve_laplacian_constraint(flagged)
    if repair == "smooth":
        return smooth_unreliable(flagged, smooth_iters)
    return flagged.as_triangle_mesh()

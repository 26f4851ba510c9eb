"""Fourier occupancy fields.

A triangle mesh is converted into a 2D grid that stores, per pixel, the
leading cosine-series coefficients of the 1D inside/outside signal along
the view axis.  The grid is compact, image-shaped, exactly integrable
from mesh geometry, and can be sampled back at any resolution; meshes are
recovered with reliability-flagged marching cubes plus a Laplacian
repair of the view-biased vertices.
"""

from .conversion import (
    MatchReport,
    integrate_intervals,
    match_discontinuities,
    match_symbols,
    mesh_to_fof,
    rasterize_events,
)
from .core import (
    ENTER,
    EXIT,
    CosineBasis,
    FofGrid,
    IntervalBuffer,
    OccupancyVolume,
    Similarity,
    TriangleMesh,
    default_z_grid,
    evaluate_field,
    evaluate_point,
    make_basis,
    normalize_mesh,
    pixel_centers,
    resample_grid,
)
from .errors import (
    DegenerateInputError,
    DomainError,
    EmptyInputError,
    FofError,
    FormatError,
    ParseError,
    PreconditionError,
    ShapeError,
)
from .estimators import FofToMesh, MeshToFof
from .extraction import (
    LaplacianSystem,
    ReliabilityMesh,
    fof_to_mesh,
    laplacian_energy,
    marching_cubes_flagged,
    refine_z_crossings,
    smooth_unreliable,
    solve_laplacian_constraint,
)
from .fileio import read_fof, read_obj, read_ply, write_fof, write_obj, write_ply
from .metrics import chamfer, p2s, point_to_surface, psnr, psnr_ssim, sample_surface, ssim
from .render import normal_difference, render_normal_maps, vertex_normals

__version__ = "0.1.0"

__all__ = [
    "CosineBasis", "FofGrid", "IntervalBuffer", "OccupancyVolume",
    "Similarity", "TriangleMesh", "MatchReport", "ReliabilityMesh",
    "LaplacianSystem", "MeshToFof", "FofToMesh",
    "ENTER", "EXIT",
    "normalize_mesh", "make_basis", "evaluate_field", "evaluate_point",
    "pixel_centers", "default_z_grid", "resample_grid",
    "rasterize_events", "match_discontinuities", "match_symbols",
    "integrate_intervals", "mesh_to_fof",
    "marching_cubes_flagged", "refine_z_crossings",
    "solve_laplacian_constraint", "smooth_unreliable", "fof_to_mesh",
    "laplacian_energy",
    "sample_surface", "point_to_surface", "p2s", "chamfer",
    "psnr", "ssim", "psnr_ssim",
    "render_normal_maps", "normal_difference", "vertex_normals",
    "read_obj", "write_obj", "read_ply", "write_ply", "read_fof", "write_fof",
    "FofError", "EmptyInputError", "DegenerateInputError", "DomainError",
    "ShapeError", "PreconditionError", "ParseError", "FormatError",
    "__version__",
]

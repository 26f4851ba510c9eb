"""Scikit-learn style transformer wrappers around the conversion pipeline.

Both transformers are stateless (fit only validates parameters and
returns self) and follow the estimator contract: constructor arguments
are stored verbatim, ``get_params``/``set_params``/``clone`` work, and
transform maps a list of inputs to a list of outputs, so the pair
composes in a ``sklearn.pipeline.Pipeline``:

    Pipeline([("encode", MeshToFof(terms=64)), ("decode", FofToMesh())])

A single TriangleMesh / FofGrid is also accepted and returns a single
result.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .conversion import mesh_to_fof
from .core import FofGrid, TriangleMesh
from .errors import DomainError
from .extraction import fof_to_mesh

__all__ = ["MeshToFof", "FofToMesh"]


def _check_instance(x, cls, role):
    if not isinstance(x, cls):
        raise TypeError(f"{role} must be a {cls.__name__}, got {type(x).__name__}")
    return x


def _apply(x, cls, role, fn):
    if isinstance(x, cls):
        return fn(x)
    return [fn(_check_instance(item, cls, role)) for item in x]


class MeshToFof(BaseEstimator, TransformerMixin):
    """Transform triangle meshes into cosine-coefficient grids.

    Parameters
    ----------
    height, width : int
        Raster resolution of the coefficient grid.
    terms : int
        Number of cosine coefficients per pixel.
    use_matcher : bool
        Apply the discontinuity matcher (disable only for robustness
        ablations).
    """

    def __init__(self, height=256, width=256, terms=128, use_matcher=True):
        self.height = height
        self.width = width
        self.terms = terms
        self.use_matcher = use_matcher

    def _validate(self):
        if min(self.height, self.width, self.terms) < 1:
            raise DomainError("height, width and terms must all be >= 1")

    def fit(self, X=None, y=None):
        self._validate()
        return self

    def transform(self, X):
        self._validate()
        self.reports_ = []

        def one(mesh):
            grid, report = mesh_to_fof(
                mesh, self.height, self.width, self.terms, use_matcher=self.use_matcher
            )
            self.reports_.append(report)
            return grid

        return _apply(X, TriangleMesh, "input", one)


class FofToMesh(BaseEstimator, TransformerMixin):
    """Transform coefficient grids back into triangle meshes.

    Parameters
    ----------
    depth : int
        Number of z samples for the occupancy volume.
    iso : float
        Iso level of the extracted surface, strictly inside (0, 1).
    repair : str
        "constraint" (Laplacian least squares), "smooth"
        (restricted smoothing) or "none".
    smooth_iters : int
        Rounds of smoothing when repair="smooth".
    """

    def __init__(self, depth=256, iso=0.5, repair="constraint", smooth_iters=3):
        self.depth = depth
        self.iso = iso
        self.repair = repair
        self.smooth_iters = smooth_iters

    def _validate(self):
        if self.depth < 2:
            raise DomainError("depth must be >= 2")
        if not 0.0 < self.iso < 1.0:
            raise DomainError("iso must lie strictly between 0 and 1")
        if self.repair not in ("constraint", "smooth", "none"):
            raise DomainError(f"unknown repair mode {self.repair!r}")

    def fit(self, X=None, y=None):
        self._validate()
        return self

    def transform(self, X):
        self._validate()
        return _apply(
            X,
            FofGrid,
            "input",
            lambda grid: fof_to_mesh(
                grid, self.depth, self.iso, self.repair, self.smooth_iters
            ),
        )

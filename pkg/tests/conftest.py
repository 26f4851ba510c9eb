import numpy as np
import pytest

from fof.core import TriangleMesh
from fof.shapes import box, capsule, icosphere, torus


@pytest.fixture(scope="session")
def unit_cube():
    return box(1.0)


@pytest.fixture(scope="session")
def sphere4():
    return icosphere(0.6, 4)


@pytest.fixture(scope="session")
def sphere2():
    return icosphere(0.6, 2)


@pytest.fixture(scope="session")
def torus_mesh():
    return torus()


@pytest.fixture(scope="session")
def capsule_mesh():
    return capsule()


@pytest.fixture
def single_triangle():
    # Normal has n_z < 0 (faces the camera): every covered pixel gets ENTER.
    verts = np.array([[-0.5, -0.5, 0.1], [0.0, 0.6, 0.3], [0.6, -0.4, 0.2]])
    tris = np.array([[0, 1, 2]])
    return TriangleMesh(verts, tris)


def quad_mesh(z=0.0, flip=False):
    """Two triangles sharing the diagonal of a square at depth z."""
    verts = np.array(
        [[-0.6, -0.6, z], [0.6, -0.6, z], [0.6, 0.6, z], [-0.6, 0.6, z]]
    )
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    if flip:
        tris = tris[:, ::-1]
    return TriangleMesh(verts, tris)

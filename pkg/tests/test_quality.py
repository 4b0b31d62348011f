import numpy as np
import pytest

from fixtures import random_disk_fixture

from atlasmesh.mesh import MeshError
from atlasmesh.param import parametrize
from atlasmesh.patch import Patch
from atlasmesh.quality import (
    metric_tensor,
    patch_quality,
    singular_values,
    triangle_jacobian,
)


def _planar_triangle(uv, transform):
    """3D triangle that is `transform` applied to the UV corners, z = 0."""
    uv = np.asarray(uv, dtype=float)
    xy = uv @ np.asarray(transform, dtype=float).T
    return np.column_stack([xy, np.zeros(3)])


UV = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]])


def test_identity_map_is_isometric():
    tri3d = _planar_triangle(UV, np.eye(2))
    J = triangle_jacobian(tri3d, UV)
    s1, s2 = singular_values(J)
    assert s1 == pytest.approx(1.0)
    assert s2 == pytest.approx(1.0)


def test_anisotropic_scaling_recovered():
    tri3d = _planar_triangle(UV, np.diag([3.0, 0.5]))
    s1, s2 = singular_values(triangle_jacobian(tri3d, UV))
    assert s1 == pytest.approx(3.0)
    assert s2 == pytest.approx(0.5)


def test_rotation_does_not_change_singular_values():
    a = 0.7
    R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    tri3d = _planar_triangle(UV, R @ np.diag([2.0, 1.0]))
    s1, s2 = singular_values(triangle_jacobian(tri3d, UV))
    assert s1 == pytest.approx(2.0)
    assert s2 == pytest.approx(1.0)


def test_shear_singular_values():
    # frozen oracle: for [[1, 1], [0, 1]] the Gram matrix has
    # eigenvalues (3 +- sqrt(5)) / 2
    tri3d = _planar_triangle(UV, [[1.0, 1.0], [0.0, 1.0]])
    s1, s2 = singular_values(triangle_jacobian(tri3d, UV))
    assert s1 == pytest.approx(np.sqrt((3.0 + np.sqrt(5.0)) / 2.0))
    assert s2 == pytest.approx(np.sqrt((3.0 - np.sqrt(5.0)) / 2.0))
    assert s1 * s2 == pytest.approx(1.0)  # unit determinant map


def test_out_of_plane_triangle():
    # lift one corner: the map stretches only one direction
    tri3d = np.array([[0, 0, 0], [1, 0, 0], [0, 0, 1.0]])
    uv = np.array([[0, 0], [1, 0], [0, 1.0]])
    s1, s2 = singular_values(triangle_jacobian(tri3d, uv))
    assert s1 == pytest.approx(1.0)
    assert s2 == pytest.approx(1.0)


def test_degenerate_uv_rejected():
    tri3d = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0.0]])
    uv = np.array([[0, 0], [1, 0], [2, 0.0]])
    with pytest.raises(MeshError):
        triangle_jacobian(tri3d, uv)


def test_metric_tensor_scales_edge_lengths():
    tri3d = _planar_triangle(UV, np.diag([2.0, 2.0]))
    J = triangle_jacobian(tri3d, UV)
    M = metric_tensor(J, h=0.5)
    # a UV vector of euclidean length 1 has 3D length 2 = 4 target units
    v = np.array([1.0, 0.0])
    assert np.sqrt(v @ M @ v) == pytest.approx(4.0)
    with pytest.raises(MeshError):
        metric_tensor(J, h=0.0)


def test_patch_quality_summary():
    mesh = random_disk_fixture(0)
    patch = Patch(mesh, np.arange(mesh.n_triangles))
    param = parametrize(patch)
    rep = patch_quality(patch, param)
    assert len(rep.sigma1) == patch.n_triangles
    assert (rep.sigma1 >= rep.sigma2).all()
    assert (rep.sigma2 > 0.0).all()
    s = rep.summary()
    assert 0.0 < s["min_conformity"] <= s["mean_conformity"] <= 1.0
    assert sum(s["histogram"]) == patch.n_triangles

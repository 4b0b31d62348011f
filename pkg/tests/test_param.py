import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import concave_hole_plate, cube, random_disk_fixture

from atlasmesh.mesh import MeshError, Triangulation
from atlasmesh.param import (
    ParamOptions,
    apply_boundary,
    assemble_system,
    check_injectivity,
    fem_weight,
    mvc_weight,
    parametrize,
    scheme_weight_matrix,
    select_outer_loop,
    signed_uv_areas,
    solve,
    triangle_angles,
)
from atlasmesh.patch import Patch

coord = st.floats(-10.0, 10.0, allow_nan=False)


triangle_points = st.tuples(
    st.tuples(coord, coord), st.tuples(coord, coord), st.tuples(coord, coord)
).filter(
    lambda t: abs(
        (t[1][0] - t[0][0]) * (t[2][1] - t[0][1])
        - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0])
    )
    > 1e-3
)


def _side_lengths(a, b, c):
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    return (
        np.linalg.norm(b - c),
        np.linalg.norm(c - a),
        np.linalg.norm(a - b),
    )


@given(triangle_points)
@settings(max_examples=200)
def test_angles_sum_to_pi(pts):
    la, lb, lc = _side_lengths(*pts)
    th = triangle_angles(la, lb, lc)
    assert np.all(np.asarray(th) > 0.0)
    assert float(np.sum(th)) == pytest.approx(np.pi, abs=1e-9)


def test_angles_right_triangle():
    th = triangle_angles(5.0, 4.0, 3.0)  # opposite hypotenuse is pi/2
    assert th[0] == pytest.approx(np.pi / 2)
    assert th[1] == pytest.approx(np.arcsin(4.0 / 5.0))


@given(
    st.floats(1e-6, np.pi - 1e-6),
    st.floats(1e-6, np.pi - 1e-6),
    st.floats(1e-6, 1e3),
)
@settings(max_examples=200)
def test_mvc_weight_positive(tk, tl, l):
    assert mvc_weight(tk, tl, l) > 0.0


def test_fem_weight_sign():
    # both angles acute -> positive; one very obtuse -> negative
    assert fem_weight(0.4, 0.5) > 0.0
    assert fem_weight(3.0, 1.0) < 0.0


def test_weight_preconditions():
    with pytest.raises(MeshError):
        mvc_weight(-0.1, 0.5, 1.0)
    with pytest.raises(MeshError):
        mvc_weight(0.5, 0.5, 0.0)
    with pytest.raises(MeshError):
        fem_weight(0.0, 0.5)


def test_weight_matrix_mvc_positive_everywhere():
    for seed in (0, 1, 2, 5):
        m = random_disk_fixture(seed)
        W = scheme_weight_matrix(m.vertices, m.triangles, "mvc")
        assert (W.data > 0.0).all()


def test_weight_matrix_fem_symmetric():
    m = random_disk_fixture(1)
    W = scheme_weight_matrix(m.vertices, m.triangles, "fem")
    assert abs(W - W.T).max() < 1e-12


def test_weight_matrix_rejects_unknown_scheme():
    m = random_disk_fixture(0)
    with pytest.raises(MeshError):
        scheme_weight_matrix(m.vertices, m.triangles, "umbrella")


def _hexagon_fan():
    ang = np.linspace(0.0, 2 * np.pi, 7)[:-1]
    ring = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(6)])
    verts = np.vstack([[[0.0, 0.0, 0.0]], ring])
    tris = [[0, 1 + k, 1 + (k + 1) % 6] for k in range(6)]
    return Triangulation(verts, np.asarray(tris))


def test_hexagon_fan_center_maps_to_origin():
    patch = Patch(_hexagon_fan(), np.arange(6))
    for scheme in ("mvc", "fem"):
        param = parametrize(patch, ParamOptions(scheme=scheme))
        assert param.injective
        assert param.residual < 1e-12
        centre = patch.local_index()[0]
        assert np.allclose(param.uv[centre], [0.0, 0.0], atol=1e-12)


def test_boundary_on_unit_circle():
    m = random_disk_fixture(0)
    patch = Patch(m, np.arange(m.n_triangles))
    outer, uv = apply_boundary(patch)
    r = np.linalg.norm(np.asarray(list(uv.values())), axis=1)
    assert np.allclose(r, 1.0, atol=1e-12)
    assert len(uv) == len(patch.loops[outer])


def test_interior_inside_unit_disk():
    for seed in (0, 1, 2, 3):
        m = random_disk_fixture(seed)
        patch = Patch(m, np.arange(m.n_triangles))
        param = parametrize(patch)
        r = np.linalg.norm(param.uv, axis=1)
        assert (r <= 1.0 + 1e-9).all()


def test_interior_vertex_is_convex_combination():
    # an MVC row reproduces the vertex itself from its neighbours
    m = random_disk_fixture(0)
    patch = Patch(m, np.arange(m.n_triangles))
    param = parametrize(patch)
    W = scheme_weight_matrix(
        patch.tri.vertices, patch.tri.triangles, "mvc"
    ).tocsr()
    boundary = {v for loop in patch.loops for v in loop}
    for v in range(patch.tri.n_vertices):
        if v in boundary:
            continue
        row = W[v].toarray().ravel()
        recon = row @ param.uv / row.sum()
        assert np.allclose(recon, param.uv[v], atol=1e-9)


def test_closed_surface_rejected():
    patch = Patch(cube(), np.arange(12))
    with pytest.raises(MeshError):
        parametrize(patch)


def test_hole_fill_adds_center_unknown():
    m = concave_hole_plate()
    patch = Patch(m, np.arange(m.n_triangles))
    system = assemble_system(patch, hole_policy="fill")
    assert system.n_centers == 1
    param = solve(patch, system)
    assert param.injective
    (cuv,) = param.center_uv.values()
    assert np.linalg.norm(cuv) < 1.0


def test_hole_policy_auto_threshold():
    m = concave_hole_plate()
    patch = Patch(m, np.arange(m.n_triangles))
    filled = assemble_system(patch, hole_policy="auto", hole_threshold=100)
    assert filled.n_centers == 1
    left = assemble_system(patch, hole_policy="auto", hole_threshold=2)
    assert left.n_centers == 0


def test_unknown_hole_policy():
    m = concave_hole_plate()
    patch = Patch(m, np.arange(m.n_triangles))
    with pytest.raises(MeshError):
        assemble_system(patch, hole_policy="maybe")


def test_outer_loop_is_longest():
    m = concave_hole_plate()
    patch = Patch(m, np.arange(m.n_triangles))
    outer = select_outer_loop(patch)
    perims = []
    for loop in patch.loops:
        pts = patch.tri.vertices[np.asarray(loop)]
        perims.append(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1).sum())
    assert perims[outer] == max(perims)


def test_check_injectivity_reports_folds():
    m = random_disk_fixture(0)
    patch = Patch(m, np.arange(m.n_triangles))
    param = parametrize(patch)
    assert check_injectivity(patch, param) == []
    # artificially fold one triangle
    bad = param.uv.copy()
    t0 = patch.tri.triangles[0]
    bad[t0[0]] = bad[t0[1]] + (bad[t0[1]] - bad[t0[0]]) * 2.0
    areas = signed_uv_areas(patch.tri.triangles, bad)
    assert (areas <= 0.0).any()

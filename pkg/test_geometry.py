"""
Tests for frame geometry, constraint densities, face data and rigidity residuals.
"""
import math
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.services.errors import GeometryError
from app.services.fields import Grid, default_domain, preset_field
from app.services.geometry import (
    adapted_rotation, constraint_densities, dec_report, face_geometry, frame_point, hypersurface_geometry,
    matching_angle_residual, null_expansion, rigidity_residuals, rigidity_scan, rotate_tensor,
)
from app.services.polyhedron import box, cube

E3 = np.array([0.0, 0.0, 1.0])


def hyperbolic(resolution=4, n=3, params=None):
    lo, hi = default_domain("hyperbolic_uhs", n)
    poly = box(lo, hi)
    return poly, preset_field("hyperbolic_uhs", params or {}, Grid.from_box(lo, hi, resolution, margin_cells=3))


@pytest.fixture(scope="module")
def hyperbolic_data():
    return hyperbolic()


def test_flat_frame_is_trivial():
    fields = preset_field("flat", {"q_scale": 0.3}, Grid.from_box([0, 0, 0], [1, 1, 1], 4))
    geo = frame_point(fields, [[0.2, 0.4, 0.6]], method="analytic")
    assert_allclose(geo.frame[0], np.eye(3))
    assert_allclose(geo.connection, 0.0, atol=1e-14)
    assert_allclose(geo.riemann, 0.0, atol=1e-14)
    assert_allclose(geo.mu, 0.5 * (0.9 ** 2 - 0.27), atol=1e-14)


def test_hyperbolic_curvature(hyperbolic_data):
    """Test: sectional curvature -1, mu = 0 and J = 0 for q = g"""
    _, fields = hyperbolic_data
    rng = np.random.default_rng(0)
    x = np.column_stack([rng.random(5), rng.random(5), 2 + rng.random(5)])
    geo = frame_point(fields, x, method="analytic")
    assert geo.frame_defect() < 1e-12
    for a in range(3):
        for b in range(3):
            if a != b:
                assert_allclose(geo.riemann[:, a, b, b, a], -1.0, atol=1e-10)
    assert_allclose(geo.scalar_curvature, -6.0, atol=1e-10)
    assert_allclose(geo.mu, 0.0, atol=1e-10)
    assert_allclose(geo.current, 0.0, atol=1e-10)
    defects = geo.symmetry_defects()
    assert defects["pair"] < 1e-10
    assert defects["bianchi"] < 1e-10


def test_conformal_scalar_curvature():
    """Test: g = exp(2 phi) delta with phi = 0.1 x1 in n = 3 has R = -2 |d phi|^2 exp(-2 phi)"""
    fields = preset_field("conformal", {"phi": "0.1*x1"}, Grid.from_box([0, 0, 0], [1, 1, 1], 4))
    x = np.array([[0.1, 0.2, 0.3], [0.9, 0.5, 0.5]])
    geo = frame_point(fields, x, method="analytic")
    assert_allclose(geo.scalar_curvature, -0.02 * np.exp(-0.2 * x[:, 0]), atol=1e-12)


def test_constraint_densities_closed_form():
    """Test: q = x1 (dx1 dx2 + dx2 dx1) gives mu = -x1^2 and J = dx2"""
    zero = [["0"] * 3 for _ in range(3)]
    q = [row[:] for row in zero]
    q[0][1] = q[1][0] = "x1"
    eye = [["1" if i == j else "0" for j in range(3)] for i in range(3)]
    fields = preset_field("custom", {"g": eye, "q": q}, Grid.from_box([0, 0, 0], [1, 1, 1], 4, margin_cells=2))
    dens = constraint_densities(fields, "analytic")
    assert_allclose(dens.mu, -dens.points[:, 0] ** 2, atol=1e-14)
    assert_allclose(dens.J, np.tile([0.0, 1.0, 0.0], (len(dens.mu), 1)), atol=1e-14)
    assert_allclose(dens.J_norm, 1.0)

    report = dec_report(dens, tol=1e-8, max_listed=5)
    assert report.margin == pytest.approx(-2.0)
    assert report.location[0] == pytest.approx(1.0)
    assert report.max_abs_J == pytest.approx(1.0)
    assert len(report.violations) == 5
    assert all(v["margin"] < 0 for v in report.violations)


def test_constraint_densities_converge():
    """Test: finite-difference mu and J on hyperbolic data vanish at second order"""
    errors = []
    for res in (8, 16):
        _, fields = hyperbolic(res)
        dens = constraint_densities(fields, "grid")
        errors.append(max(np.max(np.abs(dens.mu)), np.max(dens.J_norm)))
    assert math.log2(errors[0] / errors[1]) >= 1.7


def test_adapted_rotation():
    rng = np.random.default_rng(1)
    nu = rng.normal(size=(4, 3))
    nu /= np.linalg.norm(nu, axis=1, keepdims=True)
    O = adapted_rotation(nu)
    assert_allclose(np.einsum("pij,pkj->pik", O, O), np.broadcast_to(np.eye(3), (4, 3, 3)), atol=1e-12)
    assert_allclose(O[:, :, -1], nu, atol=1e-12)
    T = rng.normal(size=(4, 3, 3))
    rotated = rotate_tensor(T, O)
    assert_allclose(rotated, np.einsum("pia,pij,pjb->pab", O, T, O), atol=1e-12)


def test_hyperbolic_face_geometry(hyperbolic_data):
    """Test: horizontal faces are umbilic with h = -+ g and the tilted margin vanishes for N0 = e_n"""
    poly, fields = hyperbolic_data
    for face in range(poly.face_count):
        quad = poly.face_quadrature(face, 3)
        fg = face_geometry(fields, poly, face, quad.points, E3, method="analytic")
        assert_allclose(fg.tilted_margin, 0.0, atol=1e-10)
        expected_h = {4: 1.0, 5: -1.0}.get(face, 0.0)
        assert_allclose(fg.surface.h, np.broadcast_to(expected_h * np.eye(2), fg.surface.h.shape), atol=1e-10)
    top = face_geometry(fields, poly, 5, poly.face_quadrature(5, 2).points, E3, method="analytic")
    assert_allclose(null_expansion(top.surface, 1), 0.0, atol=1e-10)
    assert_allclose(null_expansion(top.surface, -1), -4.0, atol=1e-10)
    with pytest.raises(GeometryError):
        null_expansion(top.surface, 0)


def test_face_geometry_rejects_off_face_points(hyperbolic_data):
    poly, fields = hyperbolic_data
    with pytest.raises(GeometryError):
        face_geometry(fields, poly, 0, [[0.5, 0.5, 2.5]], E3, method="analytic")


def test_tilted_margin_detects_violation():
    """Test: flat data with q = -delta/2 violates the tilted condition on the face opposite N0"""
    poly = cube(3)
    fields = preset_field("flat", {"q_scale": -0.5}, Grid.from_box([0, 0, 0], [1, 1, 1], 4, margin_cells=2))
    quad = poly.face_quadrature(1, 2)
    fg = face_geometry(fields, poly, 1, quad.points, [1.0, 0.0, 0.0], method="analytic")
    assert_allclose(fg.tilted_margin, -1.0, atol=1e-12)


def test_hypersurface_of_tilted_covector():
    fields = preset_field("flat", {}, Grid.from_box([0, 0], [1, 1], 4))
    geo = frame_point(fields, [[0.5, 0.5]], method="analytic")
    surface = hypersurface_geometry(geo, [3.0, 4.0])
    assert_allclose(surface.nu[0], [0.6, 0.8])
    assert_allclose(surface.h, 0.0, atol=1e-14)
    assert_allclose(np.abs(surface.tangent[0, :, 0]), [0.8, 0.6], atol=1e-12)


def test_matching_angle():
    poly = cube(2)
    flat = preset_field("flat", {}, Grid.from_box([0, 0], [1, 1], 4, margin_cells=1))
    corners = [[1.0, 1.0], [0.0, 1.0]]
    assert_allclose(matching_angle_residual(flat, poly, corners, "analytic"), 0.0, atol=1e-14)

    skew = preset_field(
        "custom", {"g": [["1", "0.5"], ["0.5", "1"]], "q": [["0", "0"], ["0", "0"]]},
        Grid.from_box([0, 0], [1, 1], 4, margin_cells=1),
    )
    assert_allclose(matching_angle_residual(skew, poly, [[1.0, 1.0]], "analytic"), [-0.5], atol=1e-12)
    with pytest.raises(GeometryError):
        matching_angle_residual(flat, poly, [[0.5, 1.0]], "analytic")


def test_hyperbolic_rigidity_residuals(hyperbolic_data):
    _, fields = hyperbolic_data
    geo = frame_point(fields, [[0.3, 0.6, 2.4], [0.7, 0.2, 2.9]], method="analytic")
    residuals = rigidity_residuals(geo, E3).as_dict()
    for key, value in residuals.items():
        assert value < 1e-10, key


def test_minkowski_graph_rigidity_residuals():
    """Test: Gauss and Codazzi equations of a graph in flat spacetime"""
    fields = preset_field(
        "minkowski_graph", {"f": "0.2*sin(x1) + 0.1*x2**2"}, Grid.from_box([0, 0, 0], [1, 1, 1], 6, margin_cells=3),
    )
    exact = rigidity_scan(fields, E3, "analytic")
    for key, value in exact.as_dict().items():
        assert value < 1e-10, key


def test_rigidity_residuals_detect_curl():
    """Test: q = x1 dx2^2 on flat space has nabla_1 q_22 - nabla_2 q_12 = 1"""
    zero = [["0"] * 3 for _ in range(3)]
    q = [row[:] for row in zero]
    q[1][1] = "x1"
    eye = [["1" if i == j else "0" for j in range(3)] for i in range(3)]
    fields = preset_field("custom", {"g": eye, "q": q}, Grid.from_box([0, 0, 0], [1, 1, 1], 4))
    res = rigidity_residuals(frame_point(fields, [[0.4, 0.5, 0.6]], method="analytic"), E3)
    assert res.rhat_mixed == pytest.approx(1.0)
    assert res.rhat_mixed_opposite == pytest.approx(1.0)
    assert res.codazzi_normal == pytest.approx(0.0, abs=1e-14)
    assert res.energy_current == pytest.approx(0.0, abs=1e-14)
    assert res.rhat_tangential == pytest.approx(0.0, abs=1e-14)

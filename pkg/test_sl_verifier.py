"""
Tests for the integrated Schrodinger-Lichnerowicz identity and inequality.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.services.clifford import build_pair, clifford_matrix, twisted
from app.services.dirac import chi_projector
from app.services.errors import DimensionError, DomainError, EigenspaceError
from app.services.fields import Grid, default_domain, preset_field
from app.services.geometry import frame_point, hypersurface_geometry
from app.services.polyhedron import box, simplex
from app.services.sl_verifier import (
    BoundaryProjectedSection, PolynomialSection, admissible_vector, cell_centers, verify_sl, verify_sl_inequality,
)


def fields_and_box(preset, params, n=2):
    lo, hi = default_domain(preset, n)
    return preset_field(preset, params, Grid.from_box(lo, hi, 4, margin_cells=1)), box(lo, hi)


def test_polynomial_section_gradient():
    rng = np.random.default_rng(0)
    section = PolynomialSection.random(3, 4, rng, degree=3, center=[0.5, 0.5, 0.5])
    x = rng.random((6, 3))
    step = 1e-6
    for k in range(3):
        shift = np.zeros(3)
        shift[k] = step
        fd = (section.value(x + shift) - section.value(x - shift)) / (2 * step)
        assert_allclose(section.gradient(x)[:, k], fd, atol=1e-6)


def test_polynomial_section_constant():
    section = PolynomialSection.constant([1.0, 2.0j], 2)
    assert section.dim == 2
    assert_allclose(section.value([[0.3, 0.7]]), [[1.0, 2.0j]])
    assert_allclose(section.gradient([[0.3, 0.7]]), 0.0)
    assert_allclose(section.times_phase(1j).value([[0.0, 0.0]]), [[1j, -2.0]])


def test_cell_centers():
    points, weights, h = cell_centers([0, 2], [1, 3], 4)
    assert points.shape == (16, 2)
    assert weights.sum() == pytest.approx(1.0)
    assert h == pytest.approx(0.25)
    assert_allclose(points[0], [0.125, 2.125])


@pytest.mark.parametrize(
    "preset, params",
    [("flat", {"q_scale": 0.3}), ("hyperbolic_uhs", {}), ("conformal", {"phi": "0.2*x1*x2", "q_scale": -0.4})],
)
def test_identity_residual_converges(preset, params):
    """Test: the quadrature residual of the integrated identity falls at second order"""
    fields, domain = fields_and_box(preset, params)
    rng = np.random.default_rng(1)
    section = PolynomialSection.random(2, 4, rng, degree=2, center=domain.center)
    n0 = np.array([0.0, 1.0])
    coarse = verify_sl(fields, domain, section, n0, 8)
    fine = verify_sl(fields, domain, section, n0, 16)
    assert fine.h == pytest.approx(coarse.h / 2)
    assert abs(fine.relative) <= 1e-3
    assert abs(fine.residual) <= abs(coarse.residual) / 3 + 1e-12
    assert set(fine.terms) == {"grad", "bulk_energy", "bdry_mixed", "bdry_A", "bdry_q"}
    assert fine.conventions["Dhat"] == "D + Psi"


def test_identity_in_four_dimensions():
    fields, domain = fields_and_box("hyperbolic_uhs", {}, n=4)
    rng = np.random.default_rng(2)
    section = PolynomialSection.random(4, 16, rng, degree=1, center=domain.center)
    report = verify_sl(fields, domain, section, np.eye(4)[-1], 6)
    assert abs(report.relative) <= 5e-2
    assert report.lhs > 0


def test_literal_sign_convention():
    fields, domain = fields_and_box("flat", {"q_scale": 0.5})
    rng = np.random.default_rng(3)
    section = PolynomialSection.random(2, 4, rng, degree=1)
    report = verify_sl(fields, domain, section, [1.0, 0.0], 4, literal_sign=True)
    assert report.conventions["Dhat"] == "D - Psi"


def test_identity_rejects_bad_input():
    fields, domain = fields_and_box("flat", {})
    rng = np.random.default_rng(4)
    section = PolynomialSection.random(2, 4, rng, degree=1)
    with pytest.raises(DomainError):
        verify_sl(fields, simplex(2), section, [1.0, 0.0], 4)
    with pytest.raises(DimensionError):
        verify_sl(fields, domain, PolynomialSection.random(2, 2, rng, degree=1), [1.0, 0.0], 4)
    odd = preset_field("flat", {}, Grid.from_box(np.zeros(3), np.ones(3), 2))
    with pytest.raises(DimensionError):
        verify_sl(odd, box(np.zeros(3), np.ones(3)), PolynomialSection.random(3, 4, rng, degree=1), [1, 0, 0], 2)


def test_admissible_vector_is_unit():
    v = admissible_vector(4)
    assert v.shape == (16,)
    assert np.linalg.norm(v) == pytest.approx(1.0)


@pytest.mark.parametrize("preset, params", [("flat", {"q_scale": 1.0}), ("hyperbolic_uhs", {})])
def test_inequality_holds_for_admissible_sections(preset, params):
    """Test: int |Dhat sigma|^2 >= volume terms + boundary bound when chi sigma = sigma"""
    fields, domain = fields_and_box(preset, params)
    rng = np.random.default_rng(5)
    section = PolynomialSection.scalar_times(admissible_vector(2), 2, rng, degree=2, center=domain.center)
    result = verify_sl_inequality(fields, domain, section, [0.0, 1.0], 8, project=False)
    assert result.chi_defect <= 1e-10
    assert result.passed
    assert result.margin >= -result.tolerance
    assert result.identity.resolution == 8


def test_inequality_rejects_sections_off_the_boundary_condition():
    fields, domain = fields_and_box("flat", {"q_scale": 1.0})
    rng = np.random.default_rng(6)
    with pytest.raises(EigenspaceError):
        verify_sl_inequality(fields, domain, PolynomialSection.random(2, 4, rng, degree=1), [0.0, 1.0], 4,
                             project=False)


def test_constant_section_on_flat_data_is_exact():
    fields = preset_field("flat", {}, Grid.from_box(np.zeros(4), np.ones(4), 2))
    section = PolynomialSection.constant(np.arange(16) + 1j, 4)
    report = verify_sl(fields, box(np.zeros(4), np.ones(4)), section, np.eye(4)[0], 4)
    assert abs(report.residual) <= 1e-12
    assert report.lhs == pytest.approx(0.0, abs=1e-12)


def test_boundary_projected_section_gradient():
    fields, domain = fields_and_box("minkowski_graph", {"f": "0.3*x1*x2"})
    rng = np.random.default_rng(7)
    section = BoundaryProjectedSection(fields, domain, PolynomialSection.random(2, 4, rng, degree=2))
    assert section.dim == 4
    x = 0.1 + 0.8 * rng.random((5, 2))
    value, grad = section.jet(x)
    assert_allclose(section.value(x), value)
    step = 1e-6
    for k in range(2):
        shift = np.zeros(2)
        shift[k] = step
        fd = (section.value(x + shift) - section.value(x - shift)) / (2 * step)
        assert_allclose(grad[:, k], fd, atol=1e-6)


def test_boundary_projected_section_on_a_face():
    """Test: on the face x1 = 1 the section lies in the +1 eigenspace of chi built from the g-unit normal"""
    fields, domain = fields_and_box("minkowski_graph", {"f": "0.3*x1*x2"})
    rng = np.random.default_rng(8)
    section = BoundaryProjectedSection(fields, domain, PolynomialSection.random(2, 4, rng, degree=2))
    x = np.array([[1.0, 0.2], [1.0, 0.5], [1.0, 0.9]])
    sigma = section.value(x)
    rep, flat = build_pair(2)
    nu = hypersurface_geometry(frame_point(fields, x, method="analytic"), [1.0, 0.0]).nu_frame
    assert np.max(np.abs(nu[:, 1])) > 1e-3
    c_nu = rep.twist @ clifford_matrix(rep, nu)
    cbar_N = np.broadcast_to(flat.twist @ clifford_matrix(flat, [1.0, 0.0]), c_nu.shape)
    plus = chi_projector(twisted(c_nu, cbar_N))
    assert_allclose(np.einsum("pmk,pk->pm", plus, sigma), sigma, atol=1e-12)
    assert np.min(np.linalg.norm(sigma, axis=-1)) > 1e-6


def test_inequality_on_a_non_diagonal_metric():
    """Test: boundary-projected sections satisfy the inequality for g = delta - df df"""
    fields, domain = fields_and_box("minkowski_graph", {"f": "0.3*x1*x2"})
    rng = np.random.default_rng(9)
    for _ in range(3):
        section = PolynomialSection.random(2, 4, rng, degree=2, center=domain.center)
        result = verify_sl_inequality(fields, domain, section, [0.0, 1.0], 8)
        assert result.chi_defect <= 1e-10
        assert result.lhs >= 0.0
        assert result.margin >= -result.tolerance
        assert result.passed


def test_fixed_fiber_vector_leaves_the_eigenspace_on_a_non_diagonal_metric():
    fields, domain = fields_and_box("minkowski_graph", {"f": "0.3*x1*x2"})
    rng = np.random.default_rng(10)
    section = PolynomialSection.scalar_times(admissible_vector(2), 2, rng, degree=2, center=domain.center)
    with pytest.raises(EigenspaceError):
        verify_sl_inequality(fields, domain, section, [0.0, 1.0], 8, project=False)
    assert verify_sl_inequality(fields, domain, section, [0.0, 1.0], 8).chi_defect <= 1e-10


def test_bulk_energy_for_constant_mu():
    """Test: flat data with q = s delta has mu = s^2 and J = 0, so bulk_energy = s^2 |v|^2 vol / 2"""
    fields, domain = fields_and_box("flat", {"q_scale": 0.1})
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    report = verify_sl(fields, domain, PolynomialSection.constant(v, 2), [0.0, 1.0], 4)
    assert report.bulk_integral == pytest.approx(0.01, rel=1e-10)
    assert report.terms["bulk_energy"] == pytest.approx(0.005, rel=1e-10)
    assert report.conventions["bulk_energy"].startswith("1/2 int")

"""
Tests for the twisted Dirac operators and the boundary operators.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.services.clifford import build_pair, clifford_matrix, omega_matrix, twisted
from app.services.dirac import (
    a_operator_bound, anticommutator_residual, assemble_boundary, assemble_operators, boundary_frame_data,
    chi_eigenspace_vanishing, chi_projector, dirac_hat_apply, random_boundary_draw, rigid_space, spin_connection,
    trace_norm,
)
from app.services.errors import EigenspaceError, GeometryError
from app.services.fields import Grid, default_domain, preset_field
from app.services.geometry import frame_point, hypersurface_geometry


def random_jet(rng, P, n, M):
    sigma = rng.normal(size=(P, M)) + 1j * rng.normal(size=(P, M))
    dsigma = rng.normal(size=(P, n, M)) + 1j * rng.normal(size=(P, n, M))
    return sigma, dsigma


@pytest.mark.parametrize("n", [3, 4])
def test_direct_and_split_assembly_agree(n):
    """Test: sum_a c(e_a) nablahat_a = D + Psi"""
    lo, hi = default_domain("hyperbolic_uhs", n)
    fields = preset_field("hyperbolic_uhs", {}, Grid.from_box(lo, hi, 2))
    rng = np.random.default_rng(n)
    x = lo + rng.random((3, n)) * (hi - lo)
    geo = frame_point(fields, x, method="analytic")
    rep, flat = build_pair(n)
    n0 = np.eye(n)[0]
    ops = assemble_operators(geo, rep, n0, flat)
    sigma, dsigma = random_jet(rng, 3, n, rep.m ** 2)
    split = dirac_hat_apply(ops, sigma, dsigma)
    assert_allclose(dirac_hat_apply(ops, sigma, dsigma, assembly="direct"), split, atol=1e-12)

    literal = assemble_operators(geo, rep, n0, flat, literal_sign=True)
    difference = split - dirac_hat_apply(literal, sigma, dsigma)
    assert_allclose(difference, 2 * np.einsum("pmk,pk->pm", ops.psi, sigma), atol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_psi_on_flat_data(n):
    """Test: Psi = n/2 (eps (x) omega_N0) for even n and n/2 (Id (x) cbar(N0)) for odd n when q = delta"""
    fields = preset_field("flat", {"q_scale": 1}, Grid.from_box(np.zeros(n), np.ones(n), 2))
    geo = frame_point(fields, [np.full(n, 0.5)], method="analytic")
    rep, flat = build_pair(n)
    n0 = np.eye(n)[-1]
    ops = assemble_operators(geo, rep, n0, flat)
    if n % 2 == 0:
        expected = 0.5 * n * twisted(rep.grading, omega_matrix(flat, n0))
    else:
        expected = 0.5 * n * twisted(rep.identity, clifford_matrix(flat, n0))
    assert_allclose(ops.psi[0], expected, atol=1e-12)
    assert_allclose(ops.spin, 0.0, atol=1e-14)


def test_operators_require_unit_n0():
    fields = preset_field("flat", {}, Grid.from_box(np.zeros(2), np.ones(2), 2))
    geo = frame_point(fields, [[0.5, 0.5]], method="analytic")
    rep, flat = build_pair(2)
    with pytest.raises(GeometryError):
        assemble_operators(geo, rep, [1.0, 1.0], flat)


def test_spin_connection_is_skew():
    rep, _ = build_pair(4)
    rng = np.random.default_rng(2)
    omega = rng.normal(size=(4, 4, 4))
    omega = 0.5 * (omega - np.swapaxes(omega, 1, 2))
    spin = spin_connection(rep, omega)
    assert_allclose(spin, -np.conj(np.swapaxes(spin, -1, -2)), atol=1e-12)


@pytest.mark.parametrize("n, draws", [(3, 20), (4, 50), (5, 20), (6, 5)])
def test_boundary_dirac_anticommutes_with_chi(n, draws):
    rep, flat = build_pair(n)
    rng = np.random.default_rng(100 + n)
    worst = max(anticommutator_residual(rep, flat, *random_boundary_draw(n, rng)) for _ in range(draws))
    assert worst <= 1e-10


@pytest.mark.parametrize("n", [3, 4, 5])
def test_chi_eigenspace_pairings_vanish(n):
    rep, flat = build_pair(n)
    rng = np.random.default_rng(200 + n)
    for _ in range(10):
        nu, tangent, w, N, dN = random_boundary_draw(n, rng)
        Y = rng.normal(size=n)
        Y -= (Y @ N) * N
        v = tangent @ rng.normal(size=n - 1)
        sigma = rng.normal(size=rep.m ** 2) + 1j * rng.normal(size=rep.m ** 2)
        for sign in (1, -1):
            first, second = chi_eigenspace_vanishing(rep, flat, nu, N, Y, v, sigma, sign)
            assert first <= 1e-12
            assert second <= 1e-12


def test_chi_eigenspace_requires_orthogonality():
    rep, flat = build_pair(4)
    e = np.eye(4)
    with pytest.raises(GeometryError):
        chi_eigenspace_vanishing(rep, flat, e[0], e[1], e[1], e[2], np.ones(16))


def test_chi_projector():
    rep, flat = build_pair(4)
    bops = assemble_boundary(rep, flat, np.eye(4)[3], np.eye(4)[:, :3], np.zeros((3, 4)), np.eye(4)[0],
                             np.zeros((3, 4)))
    plus, minus = chi_projector(bops.chi[0]), chi_projector(bops.chi[0], -1)
    assert_allclose(plus @ plus, plus, atol=1e-12)
    assert_allclose(plus + minus, np.eye(16), atol=1e-12)
    assert_allclose(plus @ minus, 0.0, atol=1e-12)


def test_a_operator_bound():
    """Test: <A sigma, sigma> >= 1/2 (H - ||dN||_tr) |sigma|^2"""
    n = 4
    rep, flat = build_pair(n)
    rng = np.random.default_rng(3)
    for _ in range(30):
        nu, tangent, w, N, dN = random_boundary_draw(n, rng)
        H = float(rng.normal())
        bops = assemble_boundary(rep, flat, nu, tangent, w, N, dN)
        sigma = chi_projector(bops.chi[0]) @ (rng.normal(size=16) + 1j * rng.normal(size=16))
        value, bound = a_operator_bound(rep, flat, H, nu, tangent, N, dN, sigma)
        assert value >= bound - 1e-10


def test_a_operator_without_dN():
    rep, flat = build_pair(4)
    rng = np.random.default_rng(4)
    nu, tangent, w, N, dN = random_boundary_draw(4, rng, with_dN=False)
    sigma = rng.normal(size=16) + 0j
    value, bound = a_operator_bound(rep, flat, 1.5, nu, tangent, N, dN, sigma)
    assert value == pytest.approx(0.75 * np.vdot(sigma, sigma).real)
    assert bound == pytest.approx(value)


def test_trace_norm():
    dN = np.array([[3.0, 0.0, 0.0], [0.0, -4.0, 0.0]])
    assert trace_norm(dN) == pytest.approx(7.0)


def test_assemble_boundary_rejects_non_unit():
    rep, flat = build_pair(2)
    with pytest.raises(GeometryError):
        assemble_boundary(rep, flat, [1.0, 1.0], [[1.0], [0.0]], [[0.0, 0.0]], [1.0, 0.0], [[0.0, 0.0]])


def test_boundary_frame_data_on_flat_face():
    fields = preset_field("flat", {}, Grid.from_box(np.zeros(3), np.ones(3), 2))
    geo = frame_point(fields, [[1.0, 0.3, 0.6]], method="analytic")
    surface = hypersurface_geometry(geo, [1.0, 0.0, 0.0])
    nu, tangent, w, N, dN = boundary_frame_data(geo, surface, [1.0, 0.0, 0.0])
    assert_allclose(nu[0], [1.0, 0.0, 0.0], atol=1e-14)
    assert_allclose(w, 0.0, atol=1e-14)
    assert_allclose(dN, 0.0)
    assert_allclose(tangent[0].T @ nu[0], 0.0, atol=1e-14)


def test_rigid_space():
    """Test: the common +1 eigenspace is spanned by the identity tuple for even n and empty for odd n"""
    for n in (2, 4, 6):
        rep, flat = build_pair(n)
        basis = rigid_space(rep, flat)
        assert basis.shape == (rep.m ** 2, 1)
        identity = np.eye(rep.m).reshape(-1) / np.sqrt(rep.m)
        assert abs(np.vdot(identity, basis[:, 0])) == pytest.approx(1.0)
    for n in (3, 5):
        rep, flat = build_pair(n)
        with pytest.raises(EigenspaceError):
            rigid_space(rep, flat)

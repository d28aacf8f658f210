"""
Integrated Schrodinger-Lichnerowicz identity and inequality on boxes.

For a smooth twisted section sigma on a box M with g-unit outward normal nu
and boundary map N:

    int |Dhat sigma|^2 = int |nablahat sigma|^2
                         + 1/2 int <sigma, mu sigma + P_J sigma>
                         + int_bdry <D^b sigma, sigma>
                         + int_bdry <A sigma, sigma>
                         + 1/2 int_bdry <P_{(tr q) nu - q(nu)} sigma, sigma>

Volume integrals use dV_g and boundary integrals dA_g, both by the midpoint
rule. When chi sigma = sigma on the boundary the mixed term drops and the
boundary terms are bounded below by
1/2 (H + cos(theta) tr q - sin(theta) |q(nu)^T| - ||dN||_tr) |sigma|^2.
"""
from dataclasses import dataclass, field
from itertools import product
import logging
import numpy as np

from .clifford import build_pair, clifford_matrix, twisted
from .dirac import (
    assemble_boundary, assemble_operators, boundary_dirac_apply, boundary_frame_data, chi_projector,
    covariant_derivative, dirac_hat_apply, nabla_hat_apply, rigid_space, trace_norm,
)
from .errors import DimensionError, DomainError, EigenspaceError
from .fields import FieldSet
from .geometry import frame_geometry, hypersurface_geometry
from .polyhedron import Polyhedron

logger = logging.getLogger(__name__)

SL_CHUNK = 4096


def _inner(a, b) -> np.ndarray:
    return np.real(np.einsum("...i,...i->...", a, np.conj(b)))


@dataclass(eq=False)
class PolynomialSection:
    """
    Section sigma(x) = sum_t (x - c)^e_t v_t with fiber-vector coefficients.

    Attributes:
        exponents: Integer array (T, n)
        coefficients: Complex array (T, M)
        center: Expansion point c
    """
    exponents: np.ndarray
    coefficients: np.ndarray
    center: np.ndarray

    @property
    def dim(self) -> int:
        return self.coefficients.shape[-1]

    def _monomials(self, x) -> tuple[np.ndarray, np.ndarray]:
        y = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        powers = y[:, None, :] ** self.exponents[None]  # (P, T, n)
        mono = np.prod(powers, axis=-1)
        return y, mono

    def value(self, x) -> np.ndarray:
        _, mono = self._monomials(x)
        return mono @ self.coefficients

    def gradient(self, x) -> np.ndarray:
        """Coordinate partials, shape (P, n, M)."""
        y = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        n = y.shape[-1]
        grads = []
        for k in range(n):
            e = self.exponents.copy()
            factor = e[:, k].astype(float)
            e[:, k] = np.maximum(e[:, k] - 1, 0)
            mono = np.prod(y[:, None, :] ** e[None], axis=-1) * factor
            grads.append(mono @ self.coefficients)
        return np.stack(grads, axis=1)

    def jet(self, x) -> tuple[np.ndarray, np.ndarray]:
        return self.value(x), self.gradient(x)

    def times_phase(self, phase: complex) -> "PolynomialSection":
        return PolynomialSection(self.exponents, self.coefficients * phase, self.center)

    @staticmethod
    def monomial_exponents(n: int, degree: int) -> np.ndarray:
        return np.array([e for e in product(range(degree + 1), repeat=n) if sum(e) <= degree])

    @classmethod
    def constant(cls, vector, n: int) -> "PolynomialSection":
        v = np.asarray(vector, dtype=complex)
        return cls(np.zeros((1, n), dtype=int), v[None, :], np.zeros(n))

    @classmethod
    def random(cls, n: int, dim: int, rng: np.random.Generator, degree: int = 3, center=None) -> "PolynomialSection":
        """Random polynomial section of total degree <= degree."""
        exps = cls.monomial_exponents(n, degree)
        scale = 1.0 / (1.0 + exps.sum(axis=1))[:, None]
        coeffs = (rng.normal(size=(len(exps), dim)) + 1j * rng.normal(size=(len(exps), dim))) * scale
        return cls(exps, coeffs, np.zeros(n) if center is None else np.asarray(center, dtype=float))

    @classmethod
    def scalar_times(cls, vector, n: int, rng: np.random.Generator, degree: int = 3, center=None) -> "PolynomialSection":
        """phi(x) v with phi a random real polynomial and v a fixed fiber vector."""
        exps = cls.monomial_exponents(n, degree)
        phi = rng.normal(size=len(exps)) / (1.0 + exps.sum(axis=1))
        phi[0] += 2.0
        coeffs = phi[:, None] * np.asarray(vector, dtype=complex)[None, :]
        return cls(exps, coeffs, np.zeros(n) if center is None else np.asarray(center, dtype=float))


def _separable(f: np.ndarray, df: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product of per-axis factors f[:, j](x_j) and its gradient."""
    value = np.prod(f, axis=1)
    grad = np.empty_like(f)
    for j in range(f.shape[1]):
        grad[:, j] = df[:, j] * np.prod(np.delete(f, j, axis=1), axis=1)
    return value, grad


@dataclass(eq=False)
class BoundaryProjectedSection:
    """
    Smooth section on a box whose boundary values satisfy chi sigma = sigma.

    sigma = b base + sum_F w_F P_F base, where b vanishes on every face, w_F
    vanishes on every face except F and P_F(x) = (1 + chi_F(x)) / 2 uses the
    g-unit normal of F at x. Interior values stay those of a generic smooth
    section. Partials of P_F are central differences with the given step, so
    the grid method needs at least one margin cell around the box.

    Attributes:
        fields: Initial data providing the metric
        domain: Axis-aligned box
        base: Unconstrained section
        method: Jet source
        step: Difference step for the projector partials
    """
    fields: FieldSet
    domain: Polyhedron
    base: PolynomialSection
    method: str = "analytic"
    step: float = 1e-5
    lo: np.ndarray = field(init=False, repr=False)
    hi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.lo, self.hi = _box_bounds(self.domain)
        self._rep, self._flat = build_pair(self.domain.n)

    @property
    def dim(self) -> int:
        return self.base.dim

    def _bubbles(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        length = self.hi - self.lo
        d = 4.0 * (x - self.lo) * (self.hi - x) / length ** 2
        dd = 4.0 * (self.lo + self.hi - 2.0 * x) / length ** 2
        return d, dd

    def _face_weight(self, x: np.ndarray, face: int) -> tuple[np.ndarray, np.ndarray]:
        normal = self.domain.normals[face]
        k = int(np.argmax(np.abs(normal)))
        length = self.hi[k] - self.lo[k]
        f, df = self._bubbles(x)
        if normal[k] > 0:
            f[:, k], df[:, k] = (x[:, k] - self.lo[k]) / length, 1.0 / length
        else:
            f[:, k], df[:, k] = (self.hi[k] - x[:, k]) / length, -1.0 / length
        return _separable(f, df)

    def _projector(self, x: np.ndarray, face: int) -> np.ndarray:
        geo = frame_geometry(self.fields.jets_at(x, method=self.method))
        normal = self.domain.normals[face]
        nu = hypersurface_geometry(geo, normal).nu_frame
        c_nu = self._rep.twist @ clifford_matrix(self._rep, nu)
        cbar_N = np.broadcast_to(self._flat.twist @ clifford_matrix(self._flat, normal), c_nu.shape)
        return chi_projector(twisted(c_nu, cbar_N))

    def _projector_jet(self, x: np.ndarray, face: int) -> tuple[np.ndarray, np.ndarray]:
        partials = []
        for k in range(x.shape[1]):
            shift = np.zeros(x.shape[1])
            shift[k] = self.step
            partials.append((self._projector(x + shift, face) - self._projector(x - shift, face)) / (2 * self.step))
        return self._projector(x, face), np.stack(partials, axis=1)

    def value(self, x) -> np.ndarray:
        return self.jet(x, with_gradient=False)[0]

    def gradient(self, x) -> np.ndarray:
        return self.jet(x)[1]

    def jet(self, x, with_gradient: bool = True) -> tuple[np.ndarray, np.ndarray | None]:
        """Values (P, M) and coordinate partials (P, n, M)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        base = self.base.value(x)
        dbase = self.base.gradient(x) if with_gradient else None
        b, db = _separable(*self._bubbles(x))
        value = b[:, None] * base
        grad = db[:, :, None] * base[:, None, :] + b[:, None, None] * dbase if with_gradient else None
        for face in range(self.domain.face_count):
            w, dw = self._face_weight(x, face)
            if with_gradient:
                P0, dP = self._projector_jet(x, face)
            else:
                P0 = self._projector(x, face)
            projected = np.einsum("pmk,pk->pm", P0, base)
            value = value + w[:, None] * projected
            if with_gradient:
                dprojected = np.einsum("pjmk,pk->pjm", dP, base) + np.einsum("pmk,pjk->pjm", P0, dbase)
                grad = grad + dw[:, :, None] * projected[:, None, :] + w[:, None, None] * dprojected
        return value, grad


@dataclass
class SLReport:
    """
    Both sides of the integrated identity.

    Attributes:
        lhs: int |Dhat sigma|^2
        terms: grad, bulk_energy, bdry_mixed, bdry_A, bdry_q
        residual: lhs - sum(terms)
        relative: residual / (|lhs| + sum |terms| + 1e-30)
        h: Largest cell width
        resolution: Cells per axis
        method: Jet source ("analytic" or "grid")
        bulk_integral: int <sigma, mu sigma + P_J sigma> without the 1/2 that
            bulk_energy carries
        conventions: Binding of the normal, the boundary map, the sign of Psi
            and the normalization of the bulk term
    """
    lhs: float
    terms: dict
    residual: float
    relative: float
    h: float
    resolution: int
    method: str
    bulk_integral: float = 0.0
    conventions: dict = field(default_factory=lambda: {
        "e_n": "g-unit outward normal of each face",
        "N": "prescribed Euclidean boundary map (face normal unless given)",
        "Dhat": "D + Psi",
        "bulk_energy": "1/2 int <sigma, mu sigma + P_J sigma> with 2 mu = R + (tr q)^2 - |q|^2; "
                       "for q = 0 this is the R/4 of D^2 = nabla* nabla + R/4",
    })


@dataclass
class SLInequalityReport:
    """
    Inequality check with the boundary condition chi sigma = sigma.

    Attributes:
        lhs: int |Dhat sigma|^2
        rhs: Volume terms plus the boundary lower bound
        margin: lhs - rhs
        tolerance: Quadrature tolerance taken from the identity residual
        identity: The identity report on the same data
        boundary_factor_min: Smallest pointwise boundary factor
        chi_defect: max |chi sigma - sigma| / |sigma| over boundary nodes
    """
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    identity: SLReport
    boundary_factor_min: float
    chi_defect: float

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance


def _box_bounds(domain: Polyhedron) -> tuple[np.ndarray, np.ndarray]:
    if not domain.is_box():
        raise DomainError("the identity is evaluated on axis-aligned boxes only")
    return domain.bbox[0], domain.bbox[1]


def cell_centers(lo, hi, resolution: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Midpoint-rule nodes and Euclidean weights of a box."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    widths = (hi - lo) / resolution
    axes = [lo[k] + widths[k] * (np.arange(resolution) + 0.5) for k in range(len(lo))]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    return points, np.full(len(points), float(np.prod(widths))), float(np.max(widths))


def _face_density(g: np.ndarray, axis: int) -> np.ndarray:
    minor = np.delete(np.delete(g, axis, axis=-1), axis, axis=-2)
    return np.sqrt(np.linalg.det(minor))


def _volume_terms(fields, points, weights, section, n0, rep, flat, method, literal_sign) -> dict:
    out = {"lhs": 0.0, "grad": 0.0, "bulk_integral": 0.0}
    for start in range(0, len(points), SL_CHUNK):
        x = points[start:start + SL_CHUNK]
        geo = frame_geometry(fields.jets_at(x, method=method))
        ops = assemble_operators(geo, rep, n0, flat, literal_sign)
        sigma, dsigma = section.jet(x)
        vol = weights[start:start + SL_CHUNK] * np.sqrt(np.linalg.det(geo.g))
        dhat = dirac_hat_apply(ops, sigma, dsigma)
        nhat = nabla_hat_apply(ops, None, sigma, dsigma)
        pj = np.einsum("pmk,pk->pm", ops.p_matrix(geo.current), sigma)
        out["lhs"] += float(vol @ _inner(dhat, dhat))
        out["grad"] += float(vol @ np.sum(_inner(nhat, nhat), axis=-1))
        out["bulk_integral"] += float(vol @ (geo.mu * _inner(sigma, sigma) + _inner(sigma, pj)))
    out["bulk_energy"] = 0.5 * out["bulk_integral"]
    return out


def _boundary_terms(fields, domain, resolution, section, n0, rep, flat, method, literal_sign, boundary_map) -> dict:
    out = {"bdry_mixed": 0.0, "bdry_A": 0.0, "bdry_q": 0.0, "bound": 0.0,
           "factor_min": np.inf, "chi_defect": 0.0}
    n = domain.n
    for face in range(domain.face_count):
        quad = domain.face_quadrature(face, resolution)
        axis = int(np.argmax(np.abs(domain.normals[face])))
        for start in range(0, len(quad.points), SL_CHUNK):
            x = quad.points[start:start + SL_CHUNK]
            geo = frame_geometry(fields.jets_at(x, method=method))
            surface = hypersurface_geometry(geo, domain.normals[face])
            if boundary_map is None:
                N, dN_coord = domain.normals[face], None
            else:
                N, dN_coord = boundary_map(x, face)
            nu_f, tangent, w, Nv, dN = boundary_frame_data(geo, surface, N, dN_coord)
            bops = assemble_boundary(rep, flat, nu_f, tangent, w, Nv, dN)
            ops = assemble_operators(geo, rep, n0, flat, literal_sign)
            sigma, dsigma = section.jet(x)
            nabla = covariant_derivative(ops, sigma, dsigma)
            nabla_t = np.einsum("paj,pam->pjm", tangent, nabla)
            area = quad.weights[start:start + SL_CHUNK] * _face_density(geo.g, axis)

            dirac_b = boundary_dirac_apply(bops, sigma, nabla_t)
            a_sigma = np.einsum("pmk,pk->pm", bops.a_operator, sigma)
            v = geo.tr_q[:, None] * nu_f - np.einsum("pab,pb->pa", geo.q, nu_f)
            p_sigma = np.einsum("pmk,pk->pm", ops.p_matrix(v), sigma)
            out["bdry_mixed"] += float(area @ _inner(dirac_b, sigma))
            out["bdry_A"] += float(area @ _inner(a_sigma, sigma))
            out["bdry_q"] += 0.5 * float(area @ _inner(p_sigma, sigma))

            cos = Nv @ np.asarray(n0, dtype=float)
            sin = np.sqrt(np.clip(1.0 - cos ** 2, 0.0, None))
            factor = surface.H + cos * surface.tr_q - sin * surface.q_nu_norm - trace_norm(dN)
            norm2 = _inner(sigma, sigma)
            out["bound"] += 0.5 * float(area @ (factor * norm2))
            out["factor_min"] = min(out["factor_min"], float(np.min(factor)))
            defect = np.linalg.norm(np.einsum("pmk,pk->pm", bops.chi, sigma) - sigma, axis=-1)
            out["chi_defect"] = max(out["chi_defect"], float(np.max(defect / np.sqrt(np.maximum(norm2, 1e-300)))))
    return out


def _check_inputs(fields: FieldSet, domain: Polyhedron, section: PolynomialSection, rep) -> None:
    if domain.n != fields.n:
        raise DimensionError(f"domain has dimension {domain.n}, fields {fields.n}")
    if section.dim != rep.m ** 2:
        raise DimensionError(f"section has {section.dim} components, the twisted fiber {rep.m ** 2}")


def _evaluate(fields, domain, section, n0, resolution, method, boundary_map, literal_sign):
    rep, flat = build_pair(fields.n)
    _check_inputs(fields, domain, section, rep)
    lo, hi = _box_bounds(domain)
    points, weights, h = cell_centers(lo, hi, resolution)
    volume = _volume_terms(fields, points, weights, section, n0, rep, flat, method, literal_sign)
    boundary = _boundary_terms(fields, domain, resolution, section, n0, rep, flat, method, literal_sign, boundary_map)
    terms = {
        "grad": volume["grad"],
        "bulk_energy": volume["bulk_energy"],
        "bdry_mixed": boundary["bdry_mixed"],
        "bdry_A": boundary["bdry_A"],
        "bdry_q": boundary["bdry_q"],
    }
    residual = volume["lhs"] - sum(terms.values())
    scale = abs(volume["lhs"]) + sum(abs(v) for v in terms.values()) + 1e-30
    report = SLReport(
        lhs=volume["lhs"], terms=terms, residual=residual, relative=residual / scale,
        h=h, resolution=resolution, method=method, bulk_integral=volume["bulk_integral"],
    )
    if literal_sign:
        report.conventions["Dhat"] = "D - Psi"
    return report, volume, boundary


def verify_sl(fields: FieldSet, domain: Polyhedron, section: PolynomialSection, n0, resolution: int,
              method: str = "analytic", boundary_map=None, literal_sign: bool = False) -> SLReport:
    """
    Evaluate both sides of the integrated identity on a box.

    Args:
        fields: Initial data (with an analytic source for method="analytic")
        domain: Axis-aligned box inside the sampled region
        section: Polynomial section with exact partials
        n0: Unit direction N0
        resolution: Cells per axis for volume and faces
        method: Jet source
        boundary_map: Optional callable (points, face) -> (N, dN) giving a
            Euclidean unit map and its coordinate derivatives dN[p, k, m] = d_k N^m
        literal_sign: Use Dhat = D - Psi

    Raises:
        DimensionError: On dimension mismatch (the identity is defined for even n)
        DomainError: For non-box domains or points outside the grid
    """
    if fields.n % 2:
        raise DimensionError("the integrated identity is implemented for even n")
    report, _, _ = _evaluate(fields, domain, section, n0, resolution, method, boundary_map, literal_sign)
    logger.info("identity at resolution %d: relative residual %.3e", resolution, report.relative)
    return report


def admissible_vector(n: int) -> np.ndarray:
    """Unit fiber vector with chi sigma = sigma on every face of an axis-aligned box (diagonal metrics)."""
    rep, flat = build_pair(n)
    basis = rigid_space(rep, flat)
    return basis[:, 0] / np.linalg.norm(basis[:, 0])


def verify_sl_inequality(fields: FieldSet, domain: Polyhedron, section, n0, resolution: int,
                         method: str = "analytic", chi_tol: float = 1e-10, project: bool = True,
                         literal_sign: bool = False) -> SLInequalityReport:
    """
    Check int |Dhat sigma|^2 >= volume terms + boundary lower bound.

    With project (the default) sigma is replaced by the smooth section that
    keeps its interior values and is projected pointwise to chi sigma = sigma
    on the boundary (BoundaryProjectedSection). Without it sigma must already
    satisfy the condition, as phi(x) v with v from admissible_vector does for
    diagonal metrics.

    Raises:
        EigenspaceError: If the boundary condition fails beyond chi_tol
    """
    if fields.n % 2:
        raise DimensionError("the integrated identity is implemented for even n")
    if project:
        section = BoundaryProjectedSection(fields, domain, section, method)
    report, volume, boundary = _evaluate(fields, domain, section, n0, resolution, method, None, literal_sign)
    if boundary["chi_defect"] > chi_tol:
        raise EigenspaceError(f"section violates chi sigma = sigma on the boundary (defect {boundary['chi_defect']:.2e})")
    rhs = volume["grad"] + volume["bulk_energy"] + boundary["bound"]
    lhs = volume["lhs"]
    scale = abs(lhs) + abs(rhs)
    tolerance = abs(report.residual) + 1e-12 * max(scale, 1.0)
    return SLInequalityReport(
        lhs=lhs, rhs=rhs, margin=lhs - rhs, tolerance=tolerance, identity=report,
        boundary_factor_min=boundary["factor_min"], chi_defect=boundary["chi_defect"],
    )

"""
Pointwise Riemannian geometry of an initial data set (g, q).

Everything here works on batches of jets: Christoffel symbols, Gram-Schmidt
frames and their rotation coefficients, the curvature tensor, covariant
derivatives of q, the constraint densities mu and J, hypersurface data of
faces and level sets, and the rigidity residuals built from
Rhat_ijkl = R_ijkl + q_jk q_il - q_ik q_jl.

Curvature convention: R_ijkl = <R(e_i, e_j) e_k, e_l> with
R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y], so R_ijji is the sectional
curvature and the scalar curvature is sum_ab R_abba.
"""
from dataclasses import dataclass
import logging
import numpy as np

from app.config import CHUNK_SIZE
from .errors import GeometryError
from .fields import FieldSet, Jets
from .polyhedron import Polyhedron

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FramePoint:
    """
    Frame geometry at a batch of points (leading axis P).

    Attributes:
        points: Array (P, n)
        g, g_inv: Metric and inverse, (P, n, n)
        dg: Coordinate derivatives of g, (P, n, n, n)
        christoffel: Gamma[p, k, i, j] = Gamma^k_ij
        frame: E[p, i, a], the a-th g-orthonormal frame vector in coordinates
        connection: omega[p, a, b, c] = g(nabla_{e_a} e_b, e_c), skew in (b, c)
        riemann: Frame components R_abcd
        q: Frame components q_ab
        dq: Frame components (nabla_{e_a} q)(e_b, e_c)
    """
    points: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    christoffel: np.ndarray
    frame: np.ndarray
    connection: np.ndarray
    riemann: np.ndarray
    q: np.ndarray
    dq: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return self.points.shape[-1]

    @property
    def tr_q(self) -> np.ndarray:
        return np.trace(self.q, axis1=-2, axis2=-1)

    @property
    def scalar_curvature(self) -> np.ndarray:
        return np.einsum("pabba->p", self.riemann)

    @property
    def mu(self) -> np.ndarray:
        """Energy density: 2 mu = R + (tr q)^2 - |q|^2."""
        return 0.5 * (self.scalar_curvature + self.tr_q ** 2 - np.einsum("pab,pab->p", self.q, self.q))

    @property
    def current(self) -> np.ndarray:
        """Frame components of J = div q - d(tr q)."""
        return np.einsum("paac->pc", self.dq) - np.einsum("pcaa->pc", self.dq)

    def frame_defect(self) -> float:
        """max |g(e_a, e_b) - delta_ab|."""
        G = np.einsum("pia,pij,pjb->pab", self.frame, self.g, self.frame)
        return float(np.max(np.abs(G - np.eye(self.n))))

    def symmetry_defects(self) -> dict:
        """Pair-symmetry and first Bianchi defects of the curvature tensor."""
        R = self.riemann
        pair = R - np.einsum("pabcd->pcdab", R)
        bianchi = R + np.einsum("pbcad->pabcd", R) + np.einsum("pcabd->pabcd", R)
        return {"pair": float(np.max(np.abs(pair))), "bianchi": float(np.max(np.abs(bianchi)))}


def christoffel_symbols(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)."""
    lower = 0.5 * (np.einsum("pijl->plij", dg) + np.einsum("pjil->plij", dg) - dg)
    return np.einsum("pkl,plij->pkij", g_inv, lower)


def _christoffel_derivative(g_inv, dg, d2g) -> np.ndarray:
    # dGamma[p, m, k, i, j] = d_m Gamma^k_ij
    lower = 0.5 * (np.einsum("pijl->plij", dg) + np.einsum("pjil->plij", dg) - dg)
    dlower = 0.5 * (
        np.einsum("pmijl->pmlij", d2g) + np.einsum("pmjil->pmlij", d2g) - d2g
    )
    dg_inv = -np.einsum("pka,pmab,pbl->pmkl", g_inv, dg, g_inv)
    return np.einsum("pmkl,plij->pmkij", dg_inv, lower) + np.einsum("pkl,pmlij->pmkij", g_inv, dlower)


def coordinate_riemann(jets: Jets, g_inv: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Coordinate components R_ijkl, antisymmetric in (i, j) and in (k, l)."""
    dgamma = _christoffel_derivative(g_inv, jets.dg, jets.d2g)
    A = np.einsum("pimjk->pijkm", dgamma)
    C = np.einsum("psjk,pmis->pijkm", gamma, gamma)
    Rv = A - np.swapaxes(A, 1, 2) + C - np.swapaxes(C, 1, 2)
    R = np.einsum("pijkm,pml->pijkl", Rv, jets.g)
    return 0.5 * (R - np.swapaxes(R, 3, 4))


def orthonormal_frame(g: np.ndarray, dg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Gram-Schmidt frame in index order and its coordinate derivatives.

    With g = L L^T (Cholesky), E = L^{-T} has g-orthonormal columns and e_1 is
    parallel to d/dx1.

    Returns:
        E[p, i, a] and dE[p, k, i, a] = d_k E^i_a

    Raises:
        GeometryError: If g is not positive definite somewhere
    """
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as e:
        raise GeometryError(f"metric is not positive definite: {e}") from e
    L_inv = np.linalg.inv(L)
    E = np.swapaxes(L_inv, -1, -2)
    n = g.shape[-1]
    X = np.einsum("pab,pkbc,pdc->pkad", L_inv, dg, L_inv)
    phi = np.tril(X, -1) + 0.5 * X * np.eye(n)
    dL = np.einsum("pab,pkbc->pkac", L, phi)
    dE = -np.einsum("pia,pkba,pbc->pkic", E, dL, E)
    return E, dE


def frame_geometry(jets: Jets) -> FramePoint:
    """Assemble FramePoint data from a batch of jets."""
    g_inv = np.linalg.inv(jets.g)
    gamma = christoffel_symbols(g_inv, jets.dg)
    E, dE = orthonormal_frame(jets.g, jets.dg)

    nabla_E = dE + np.einsum("pikl,plb->pkib", gamma, E)
    C = np.einsum("pkib,pij,pjc->pkbc", nabla_E, jets.g, E)
    C = 0.5 * (C - np.swapaxes(C, -1, -2))
    connection = np.einsum("pka,pkbc->pabc", E, C)

    R = coordinate_riemann(jets, g_inv, gamma)
    riemann = np.einsum("pijkl,pia,pjb,pkc,pld->pabcd", R, E, E, E, E, optimize=True)

    nabla_q = (
        jets.dq
        - np.einsum("pmki,pmj->pkij", gamma, jets.q)
        - np.einsum("pmkj,pim->pkij", gamma, jets.q)
    )
    q = np.einsum("pia,pij,pjb->pab", E, jets.q, E)
    dq = np.einsum("pkij,pka,pib,pjc->pabc", nabla_q, E, E, E, optimize=True)
    return FramePoint(
        points=jets.points, g=jets.g, g_inv=g_inv, dg=jets.dg, christoffel=gamma,
        frame=E, connection=connection, riemann=riemann, q=q, dq=dq,
    )


def frame_point(fields: FieldSet, x, method: str = "grid") -> FramePoint:
    """FramePoint at one or more locations."""
    return frame_geometry(fields.jets_at(x, method=method))


def _node_chunks(fields: FieldSet, index: np.ndarray, method: str):
    jets = fields.grid_jets()
    for start in range(0, len(index), CHUNK_SIZE):
        chunk = index[start:start + CHUNK_SIZE]
        if method == "grid":
            yield frame_geometry(jets.take(chunk))
        else:
            yield frame_geometry(fields.jets_at(jets.points[chunk], method=method))


@dataclass(eq=False)
class ConstraintDensities:
    """
    Energy and current densities on interior nodes.

    Attributes:
        points: Node coordinates (P, n)
        mu: Energy density
        J: Coordinate covector components J_i
        J_norm: |J|_g
        dec_margin: mu - |J|_g
        h: Grid spacing
    """
    points: np.ndarray
    mu: np.ndarray
    J: np.ndarray
    J_norm: np.ndarray
    dec_margin: np.ndarray
    h: float


def constraint_densities(fields: FieldSet, method: str = "grid", margin: int = 2) -> ConstraintDensities:
    """
    mu and J at every node at least `margin` nodes inside the grid.

    Args:
        fields: Sampled data
        method: "grid" for finite differences, "analytic" for the exact jets
            of the preset at the same nodes
        margin: Excluded boundary layers
    """
    index = fields.interior_index(margin)
    mus, Js, norms, points = [], [], [], []
    for geo in _node_chunks(fields, index, method):
        J_frame = geo.current
        coframe = np.linalg.inv(geo.frame)
        mus.append(geo.mu)
        Js.append(np.einsum("pc,pci->pi", J_frame, coframe))
        norms.append(np.linalg.norm(J_frame, axis=-1))
        points.append(geo.points)
    mu = np.concatenate(mus)
    J_norm = np.concatenate(norms)
    logger.debug("constraint densities on %d nodes (%s)", len(mu), method)
    return ConstraintDensities(
        points=np.concatenate(points), mu=mu, J=np.concatenate(Js),
        J_norm=J_norm, dec_margin=mu - J_norm, h=fields.h,
    )


@dataclass
class DecReport:
    """
    Worst-case dominant energy margin.

    Attributes:
        margin: min of mu - |J|_g
        location: Node attaining the minimum
        max_abs_mu: max |mu|
        max_abs_J: max |J|_g
        violations: Nodes with negative margin beyond tol
    """
    margin: float
    location: list
    max_abs_mu: float
    max_abs_J: float
    violations: list


def dec_report(densities: ConstraintDensities, tol: float = 0.0, max_listed: int = 20) -> DecReport:
    worst = int(np.argmin(densities.dec_margin))
    bad = np.flatnonzero(densities.dec_margin < -tol)
    order = bad[np.argsort(densities.dec_margin[bad])][:max_listed]
    return DecReport(
        margin=float(densities.dec_margin[worst]),
        location=densities.points[worst].tolist(),
        max_abs_mu=float(np.max(np.abs(densities.mu))),
        max_abs_J=float(np.max(densities.J_norm)),
        violations=[
            {"x": densities.points[i].tolist(), "margin": float(densities.dec_margin[i])} for i in order
        ],
    )


def adapted_rotation(nu_frame: np.ndarray) -> np.ndarray:
    """
    Orthogonal matrices O[p] with O e_n = nu_frame (Householder reflection).

    The adapted frame E @ O has the unit normal as its last vector; its first
    n - 1 vectors span the tangent space.
    """
    nu_frame = np.atleast_2d(nu_frame)
    P, n = nu_frame.shape
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    v = nu_frame - e_n
    norm2 = np.einsum("pi,pi->p", v, v)
    O = np.broadcast_to(np.eye(n), (P, n, n)).copy()
    flip = norm2 > 1e-24
    O[flip] -= 2.0 * np.einsum("pi,pj->pij", v[flip], v[flip]) / norm2[flip, None, None]
    return O


def rotate_tensor(T: np.ndarray, O: np.ndarray) -> np.ndarray:
    """Frame components of a covariant tensor in the rotated frame E @ O."""
    out = T
    for axis in range(1, T.ndim):
        out = np.moveaxis(np.einsum("p...i,pia->p...a", np.moveaxis(out, axis, -1), O), -1, axis)
    return out


@dataclass(eq=False)
class HypersurfaceGeometry:
    """
    Geometry of the hypersurfaces through a batch of points.

    Attributes:
        points: Array (P, n)
        nu: g-unit normal, coordinates (P, n)
        nabla_nu: nabla_i nu^k (P, n, n)
        nu_frame: Frame components of nu
        rotation: O with adapted frame = E @ O
        tangent: Coordinates of the tangent frame (P, n, n - 1)
        h: Second fundamental form h(e_a, e_b) = g(nabla_{e_a} nu, e_b), (P, n-1, n-1)
        H: Mean curvature
        tr_q: Trace of q over the tangent space
        q_tangent: q(e_a, e_b) for tangent e_a, e_b, (P, n - 1, n - 1)
        q_nu_tangent: q(nu, e_a) for tangent e_a, (P, n - 1)
    """
    points: np.ndarray
    nu: np.ndarray
    nabla_nu: np.ndarray
    nu_frame: np.ndarray
    rotation: np.ndarray
    tangent: np.ndarray
    h: np.ndarray
    H: np.ndarray
    tr_q: np.ndarray
    q_tangent: np.ndarray
    q_nu_tangent: np.ndarray

    @property
    def q_nu_norm(self) -> np.ndarray:
        return np.linalg.norm(self.q_nu_tangent, axis=-1)


def normal_field(geo: FramePoint, N, dN=None) -> tuple[np.ndarray, np.ndarray]:
    """
    g-unit normal nu = g^{-1} N / |g^{-1} N|_g of the covector N and nabla nu.

    Args:
        geo: Frame data at P points
        N: Covector components (n,) or (P, n)
        dN: d_i N_m, shape (P, n, n); zero if omitted

    Returns:
        (nu, nabla_nu) with nabla_nu[p, i, k] = nabla_i nu^k
    """
    P, n = geo.points.shape
    N = np.broadcast_to(np.asarray(N, dtype=float), (P, n))
    dN = np.zeros((P, n, n)) if dN is None else np.asarray(dN, dtype=float)
    dg_inv = -np.einsum("pka,pmab,pbl->pmkl", geo.g_inv, geo.dg, geo.g_inv)
    u = np.einsum("pkm,pm->pk", geo.g_inv, N)
    du = np.einsum("pikm,pm->pik", dg_inv, N) + np.einsum("pkm,pim->pik", geo.g_inv, dN)
    s2 = np.einsum("pm,pm->p", N, u)
    if np.any(s2 <= 1e-24):
        raise GeometryError("normal covector vanishes")
    ds2 = np.einsum("pim,pm->pi", dN, u) + np.einsum("pm,pim->pi", N, du)
    s = np.sqrt(s2)
    ds = ds2 / (2.0 * s[:, None])
    nu = u / s[:, None]
    dnu = du / s[:, None, None] - u[:, None, :] * ds[:, :, None] / s2[:, None, None]
    nabla_nu = dnu + np.einsum("pkil,pl->pik", geo.christoffel, nu)
    return nu, nabla_nu


def hypersurface_geometry(geo: FramePoint, N, dN=None) -> HypersurfaceGeometry:
    """Hypersurface data for the distribution g-orthogonal to the covector N."""
    nu, nabla_nu = normal_field(geo, N, dN)
    n = geo.n
    nu_frame = np.einsum("pia,pij,pj->pa", geo.frame, geo.g, nu)
    O = adapted_rotation(nu_frame)
    adapted = np.einsum("pib,pba->pia", geo.frame, O)
    tangent = adapted[:, :, : n - 1]
    h = np.einsum("pia,pik,pkl,plb->pab", tangent, nabla_nu, geo.g, tangent)
    q_adapted = rotate_tensor(geo.q, O)
    return HypersurfaceGeometry(
        points=geo.points,
        nu=nu,
        nabla_nu=nabla_nu,
        nu_frame=nu_frame,
        rotation=O,
        tangent=tangent,
        h=h,
        H=np.trace(h, axis1=-2, axis2=-1),
        tr_q=np.trace(q_adapted[:, : n - 1, : n - 1], axis1=-2, axis2=-1),
        q_tangent=q_adapted[:, : n - 1, : n - 1],
        q_nu_tangent=q_adapted[:, n - 1, : n - 1],
    )


@dataclass(eq=False)
class FaceGeometry:
    """
    Face samples with the tilted dominant energy margin.

    Attributes:
        face: Face id
        surface: Hypersurface data at the samples
        cos_theta, sin_theta: Face angle relative to N0
        tilted_margin: H + cos(theta) tr_F q - sin(theta) |q(nu, .)^T|
    """
    face: int
    surface: HypersurfaceGeometry
    cos_theta: float
    sin_theta: float
    tilted_margin: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.surface.points


def face_geometry(fields: FieldSet, poly: Polyhedron, face: int, points, n0=None, method: str = "grid") -> FaceGeometry:
    """
    Normal, second fundamental form and tilted margin along one face.

    Raises:
        GeometryError: If a sample is not on the face
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    u = poly.values(points)[:, face]
    if np.any(np.abs(u) > 1e-9):
        raise GeometryError(f"sample points are not on face {face}")
    n = poly.n
    if n0 is None:
        n0 = np.eye(n)[0]
    theta = poly.theta_profile(n0)
    geo = frame_point(fields, points, method=method)
    surface = hypersurface_geometry(geo, poly.normals[face])
    cos, sin = float(theta.cos_theta[face]), float(theta.sin_theta[face])
    margin = surface.H + cos * surface.tr_q - sin * surface.q_nu_norm
    return FaceGeometry(face=face, surface=surface, cos_theta=cos, sin_theta=sin, tilted_margin=margin)


def null_expansion(surface: HypersurfaceGeometry, sign: int = 1) -> np.ndarray:
    """Null expansion H + sign * tr_Sigma q."""
    if sign not in (1, -1):
        raise GeometryError("null expansion sign must be +1 or -1")
    return surface.H + sign * surface.tr_q


def matching_angle_residual(fields: FieldSet, poly: Polyhedron, points, method: str = "grid") -> np.ndarray:
    """
    g(nu_1, nu_2) - <N_1, N_2> at edge points.

    Raises:
        GeometryError: If a point does not have exactly two active faces
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pairs = []
    for x in points:
        faces = poly.membership(x).faces
        if len(faces) != 2:
            raise GeometryError(f"point {x.tolist()} is not on an edge (active faces: {list(faces)})")
        pairs.append(faces)
    pairs = np.array(pairs)
    g_inv = np.linalg.inv(fields.jets_at(points, method=method).g)
    N1 = poly.normals[pairs[:, 0]]
    N2 = poly.normals[pairs[:, 1]]
    inner = lambda a, b: np.einsum("pi,pij,pj->p", a, g_inv, b)
    cos_g = inner(N1, N2) / np.sqrt(inner(N1, N1) * inner(N2, N2))
    return cos_g - np.einsum("pi,pi->p", N1, N2)


def rhat_tensor(geo: FramePoint) -> np.ndarray:
    """Rhat_abcd = R_abcd + q_bc q_ad - q_ac q_bd in the frame."""
    q = geo.q
    return geo.riemann + np.einsum("pbc,pad->pabcd", q, q) - np.einsum("pac,pbd->pabcd", q, q)


@dataclass
class RigidityResiduals:
    """
    Max-norm residuals of the rigidity identities with e_n the designated normal.

    Attributes:
        codazzi_normal: nabla_i q_jn - nabla_j q_in (i, j tangential)
        rhat_tangential: Rhat_ijkl, all indices tangential
        rhat_mixed: Rhat_ijkn - (nabla_i q_jk - nabla_j q_ik)
        rhat_mixed_opposite: Rhat_ijkn + (nabla_i q_jk - nabla_j q_ik)
        energy_current: mu + J(e_n)
        rhat_normal: Rhat_njkn - (nabla_n q_jk - nabla_j q_nk)
        tau_form: Rhat_ijkl - tau_kl + tau_lk with tau_kl = (nabla_i q_jk - nabla_j q_ik) delta_ln
    """
    codazzi_normal: float
    rhat_tangential: float
    rhat_mixed: float
    rhat_mixed_opposite: float
    energy_current: float
    rhat_normal: float
    tau_form: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def rigidity_residuals(geo: FramePoint, normal_covector) -> RigidityResiduals:
    """
    Rigidity residuals with e_n the g-unit normal of the covector (e.g. N0).

    Tangential indices run over the first n - 1 vectors of the adapted frame.
    """
    n = geo.n
    t = slice(0, n - 1)
    nu, _ = normal_field(geo, normal_covector)
    nu_frame = np.einsum("pia,pij,pj->pa", geo.frame, geo.g, nu)
    O = adapted_rotation(nu_frame)
    Rh = rotate_tensor(rhat_tensor(geo), O)
    dq = rotate_tensor(geo.dq, O)
    J = np.einsum("pc,pca->pa", geo.current, O)

    curl = dq - np.swapaxes(dq, 1, 2)  # curl[p, i, j, k] = nabla_i q_jk - nabla_j q_ik
    last = n - 1
    codazzi = curl[:, t, t, last]
    tangential = Rh[:, t, t, t, t]
    mixed = Rh[:, t, t, t, last] - curl[:, t, t, t]
    mixed_opp = Rh[:, t, t, t, last] + curl[:, t, t, t]
    energy = geo.mu + J[:, last]
    normal = Rh[:, last, t, t, last] - curl[:, last, t, t]
    tau = np.zeros_like(Rh[:, t, t])
    tau[..., last] = curl[:, t, t, :]
    tau_form = Rh[:, t, t] - tau + np.swapaxes(tau, -1, -2)

    peak = lambda a: float(np.max(np.abs(a))) if a.size else 0.0
    return RigidityResiduals(
        codazzi_normal=peak(codazzi),
        rhat_tangential=peak(tangential),
        rhat_mixed=peak(mixed),
        rhat_mixed_opposite=peak(mixed_opp),
        energy_current=peak(energy),
        rhat_normal=peak(normal),
        tau_form=peak(tau_form),
    )


def rigidity_scan(fields: FieldSet, normal_covector, method: str = "grid", margin: int = 2) -> RigidityResiduals:
    """rigidity_residuals maximised over all interior nodes."""
    index = fields.interior_index(margin)
    parts = [rigidity_residuals(geo, normal_covector) for geo in _node_chunks(fields, index, method)]
    keys = parts[0].as_dict().keys()
    return RigidityResiduals(**{k: max(p.as_dict()[k] for p in parts) for k in keys})

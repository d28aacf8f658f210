"""
Transport of spinor tuples by the modified connection, and the conservation,
capillary and boundary identities of the rigidity analysis.

A tuple S (columns s_a) is transported along x(t) = x0 + t (x1 - x0) by

    dS/dt = -Omega(x') S - 1/2 G c(q(x')) S omega_{N0}^T,

the restriction of nabla_i s + 1/2 G q(e_i) omega_{N0} s = 0 to the curve.
Contracting with c in an eigenspace of omega_{N0} gives psi = S conj(c),
f = |psi|^2 and W^a = <G c(e_a) psi, psi>.
"""
from dataclasses import dataclass
import logging
import numpy as np
from scipy.linalg import expm

from .clifford import CliffordRep, build_pair, clifford_matrix, chi_matrix, omega_matrix
from .dirac import rigid_space, spin_connection
from .errors import DomainError, EigenspaceError, GeometryError
from .fields import FieldSet
from .geometry import adapted_rotation, frame_geometry, frame_point, hypersurface_geometry, normal_field
from .polyhedron import Polyhedron

logger = logging.getLogger(__name__)

EIGEN_TOL = 1e-10


@dataclass(eq=False)
class Trajectory:
    """
    States along a straight segment.

    Attributes:
        t: Parameters in [0, 1], shape (K + 1,)
        points: Positions (K + 1, n)
        states: Tuples S (K + 1, m, m)
        n0: Direction N0
        rep, flat: Representations of the two factors
        method: Jet source used
    """
    t: np.ndarray
    points: np.ndarray
    states: np.ndarray
    n0: np.ndarray
    rep: CliffordRep
    flat: CliffordRep
    method: str

    @property
    def steps(self) -> int:
        return len(self.t) - 1


def _resolve_method(fields: FieldSet, method: str | None) -> str:
    if method is None:
        return "analytic" if fields.source is not None else "grid"
    return method


def transport(fields: FieldSet, start, end, s0, steps: int, n0, method: str | None = None) -> Trajectory:
    """
    Integrate the transport equation with the classical fourth-order Runge-Kutta scheme.

    Jets come from the closed-form source when one exists; otherwise from
    linear interpolation of grid jets, which limits the observed order.

    Raises:
        DomainError: If the segment leaves the sampled grid
    """
    method = _resolve_method(fields, method)
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    if steps < 1:
        raise DomainError("transport needs at least one step")
    rep, flat = build_pair(fields.n)
    S = np.array(s0, dtype=complex)
    if S.shape != (rep.m, rep.m):
        raise DomainError(f"initial tuple must be {rep.m}x{rep.m}")

    half = np.linspace(0.0, 1.0, 2 * steps + 1)
    points = start + half[:, None] * (end - start)
    if not np.all(fields.grid.contains(points)):
        raise DomainError("segment exits the sampled grid")
    geo = frame_geometry(fields.jets_at(points, method=method))
    velocity = np.linalg.solve(geo.frame, np.broadcast_to(end - start, points.shape)[..., None])[..., 0]
    spin = np.einsum("pa,paij->pij", velocity, spin_connection(rep, geo.connection))
    qx = np.einsum("pab,pb->pa", geo.q, velocity)
    shift = 0.5 * rep.twist @ clifford_matrix(rep, qx)
    omega_t = omega_matrix(flat, n0).T

    def rhs(k, state):
        return -spin[k] @ state - shift[k] @ state @ omega_t

    dt = 1.0 / steps
    states = [S.copy()]
    for i in range(steps):
        k = 2 * i
        k1 = rhs(k, S)
        k2 = rhs(k + 1, S + 0.5 * dt * k1)
        k3 = rhs(k + 1, S + 0.5 * dt * k2)
        k4 = rhs(k + 2, S + dt * k3)
        S = S + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        states.append(S.copy())
    logger.debug("transported %d steps from %s to %s (%s jets)", steps, start.tolist(), end.tolist(), method)
    return Trajectory(
        t=half[::2], points=points[::2], states=np.array(states), n0=n0, rep=rep, flat=flat, method=method,
    )


def exponential_oracle(n: int, q_matrix, n0, direction, s0, t) -> np.ndarray:
    """
    Closed-form transport for flat g and constant q along a straight line.

    vec S(t) = expm(t L) vec S(0) with L = -1/2 G c(q x') (x) omega_{N0}.
    """
    rep, flat = build_pair(n)
    qx = np.asarray(q_matrix, dtype=float) @ np.asarray(direction, dtype=float)
    L = -0.5 * np.kron(rep.twist @ clifford_matrix(rep, qx), omega_matrix(flat, n0))
    sigma0 = np.asarray(s0, dtype=complex).reshape(-1)
    return np.array([(expm(tk * L) @ sigma0).reshape(rep.m, rep.m) for tk in np.atleast_1d(t)])


def spinor_scalars(rep: CliffordRep, states, c) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    psi = S conj(c), f = |psi|^2 and frame components W^a = <G c(e_a) psi, psi>.
    """
    psi = np.asarray(states) @ np.conj(np.asarray(c, dtype=complex))
    f = np.real(np.einsum("...i,...i->...", psi, np.conj(psi)))
    Gg = np.einsum("ij,ajk->aik", rep.twist, rep.gammas)
    W = np.real(np.einsum("...i,aij,...j->...a", np.conj(psi), Gg, psi))
    return psi, f, W


def eigen_sign(flat: CliffordRep, n0, c) -> int:
    """
    +1 or -1 according to omega_{N0} c = +/- c.

    Raises:
        EigenspaceError: If c is in neither eigenspace
    """
    c = np.asarray(c, dtype=complex)
    omega = omega_matrix(flat, n0)
    scale = max(np.linalg.norm(c), 1e-300)
    for sign in (1, -1):
        if np.linalg.norm(omega @ c - sign * c) <= EIGEN_TOL * scale:
            return sign
    raise EigenspaceError("coefficient vector is not an eigenvector of omega_N0")


def eigen_basis(flat: CliffordRep, n0, sign: int) -> np.ndarray:
    """Orthonormal basis (columns) of Lambda_sign = {c : omega_{N0} c = sign c}."""
    vals, vecs = np.linalg.eigh(omega_matrix(flat, n0))
    return vecs[:, np.isclose(vals, sign)]


@dataclass
class ConservedDrift:
    """
    Maximal drift of the conserved quantities along a trajectory.

    Attributes:
        c1: f^2 - |W|^2
        c2: <psi_+, psi_->
        c3: |z|^2 - |Z|^2
        cauchy_schwarz: max(|W| - f), non-positive up to rounding
        initial: Initial values of the three quantities
    """
    c1: float
    c2: float
    c3: float
    cauchy_schwarz: float
    initial: dict

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _pairing(a, b) -> np.ndarray:
    """<a, b>, linear in the first argument, batched."""
    return np.einsum("...i,...i->...", a, np.conj(b))


def conserved_drift(traj: Trajectory, c, c_plus, c_minus, X=None) -> ConservedDrift:
    """
    Drifts of f^2 - |W|^2, <psi_+, psi_-> and |z|^2 - |Z|^2.

    Args:
        traj: Trajectory from transport
        c: Coefficients in Lambda_+ or Lambda_-
        c_plus: Coefficients in Lambda_+
        c_minus: Coefficients in Lambda_-
        X: Unit vector orthogonal to N0 for the z/Z pair; the first
            coordinate axis made orthogonal to N0 by default

    Raises:
        EigenspaceError: If a coefficient vector is in the wrong eigenspace
    """
    rep, flat, n0 = traj.rep, traj.flat, traj.n0
    eigen_sign(flat, n0, c)
    if eigen_sign(flat, n0, c_plus) != 1 or eigen_sign(flat, n0, c_minus) != -1:
        raise EigenspaceError("c_plus must lie in Lambda_+ and c_minus in Lambda_-")
    if X is None:
        axis = np.argmin(np.abs(n0))
        X = np.eye(len(n0))[axis] - n0[axis] * n0
    X = np.asarray(X, dtype=float)
    X = X - (X @ n0) * n0
    X /= np.linalg.norm(X)

    psi, f, W = spinor_scalars(rep, traj.states, c)
    c1 = f ** 2 - np.sum(W ** 2, axis=-1)
    psi_p, _, _ = spinor_scalars(rep, traj.states, c_plus)
    psi_m, _, _ = spinor_scalars(rep, traj.states, c_minus)
    c2 = _pairing(psi_p, psi_m)

    omega_x = omega_matrix(flat, X)
    psi_a, _, _ = spinor_scalars(rep, traj.states, omega_x @ np.asarray(c_plus, dtype=complex))
    psi_b, _, _ = spinor_scalars(rep, traj.states, omega_x @ np.asarray(c_minus, dtype=complex))
    z = _pairing(psi_a, psi_m) - _pairing(psi_p, psi_b)
    Gg = np.einsum("ij,ajk->aik", rep.twist, rep.gammas)
    Z = (np.einsum("aij,kj,ki->ka", Gg, psi_a, np.conj(psi_m))
         + np.einsum("aij,kj,ki->ka", Gg, psi_p, np.conj(psi_b)))
    c3 = np.abs(z) ** 2 - np.sum(np.abs(Z) ** 2, axis=-1)

    return ConservedDrift(
        c1=float(np.max(np.abs(c1 - c1[0]))),
        c2=float(np.max(np.abs(c2 - c2[0]))),
        c3=float(np.max(np.abs(c3 - c3[0]))),
        cauchy_schwarz=float(np.max(np.linalg.norm(W, axis=-1) - f)),
        initial={"c1": float(c1[0]), "c2": complex(c2[0]), "c3": float(c3[0])},
    )


def alignment_residual(traj: Trajectory, c) -> float:
    """max |G c(W) psi - f psi| along a trajectory (zero when f = |W|)."""
    psi, f, W = spinor_scalars(traj.rep, traj.states, c)
    GW = traj.rep.twist @ clifford_matrix(traj.rep, W)
    return float(np.max(np.linalg.norm(np.einsum("kij,kj->ki", GW, psi) - f[:, None] * psi, axis=-1)))


def rigid_tuple(n: int) -> np.ndarray:
    """
    Tuple S with omega_X s = G X s for every X, normalised to S^H S = Id.

    Raises:
        EigenspaceError: For odd n, where no such tuple exists
    """
    rep, flat = build_pair(n)
    sigma = rigid_space(rep, flat)[:, 0]
    S = sigma.reshape(rep.m, rep.m)
    return S / np.linalg.norm(S[:, 0])


def rigid_initial_state(n: int, xi, n0, seed=None) -> np.ndarray:
    """
    Project a tuple onto the +1 eigenspace of G c(xi) (x) omega_{N0}.

    For c in Lambda_+ the resulting psi satisfies G c(xi) psi = psi, hence f = |W|.

    Raises:
        EigenspaceError: If the projection annihilates the tuple
    """
    rep, flat = build_pair(n)
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    S = rigid_tuple(n) if seed is None else np.asarray(seed, dtype=complex)
    op = np.kron(rep.twist @ clifford_matrix(rep, xi), omega_matrix(flat, n0))
    sigma = 0.5 * (S.reshape(-1) + op @ S.reshape(-1))
    if np.linalg.norm(sigma) <= 1e-12 * max(np.linalg.norm(S), 1e-300):
        raise EigenspaceError("projection annihilates the initial tuple")
    return sigma.reshape(rep.m, rep.m)


@dataclass(eq=False)
class KillingFamily:
    """
    Closed-form solutions s(x) = expm((a.x) L) s0 on flat data with q = kappa a (x) a.

    Attributes:
        a: Unit direction
        kappa: Eigenvalue of q
        s0: Tuple at the origin
        n0: Direction N0
    """
    a: np.ndarray
    kappa: float
    s0: np.ndarray
    n0: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.n0 = np.asarray(self.n0, dtype=float)
        rep, flat = build_pair(len(self.a))
        self.rep, self.flat = rep, flat
        self.generator = -0.5 * self.kappa * np.kron(rep.twist @ clifford_matrix(rep, self.a), omega_matrix(flat, self.n0))

    @property
    def q_matrix(self) -> np.ndarray:
        return self.kappa * np.outer(self.a, self.a)

    def state(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        m = self.rep.m
        vec = np.asarray(self.s0, dtype=complex).reshape(-1)
        return np.array([(expm((self.a @ xk) * self.generator) @ vec).reshape(m, m) for xk in x])

    def gradient(self, x) -> np.ndarray:
        """Coordinate partials d_i S, shape (P, n, m, m)."""
        S = self.state(x)
        P, m = len(S), self.rep.m
        LS = np.einsum("ij,pj->pi", self.generator, S.reshape(P, -1)).reshape(P, m, m)
        return self.a[None, :, None, None] * LS[:, None]


@dataclass
class WGradientResidual:
    """
    Residuals of grad f = -lambda q(W, .), nabla W = -lambda f q and d(W-flat) = 0.

    Attributes:
        df: Exact-derivative residual of the f equation
        dW: Exact-derivative residual of the W equation
        curl: Antisymmetric part of dW
        fd_df: Same as df with central differences
        fd_dW: Same as dW with central differences
    """
    df: float
    dW: float
    curl: float
    fd_df: float
    fd_dW: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def w_gradient_residual(family: KillingFamily, points, c, fd_step: float = 1e-3, fields: FieldSet | None = None) -> WGradientResidual:
    """
    Check the first-order identities of f and W for a closed-form family.

    Args:
        family: Closed-form solution on flat data
        points: Sample points (P, n)
        c: Coefficients in Lambda_+ or Lambda_-
        fd_step: Central-difference step
        fields: If given, must agree with the family's flat data at the points

    Raises:
        DomainError: If fields do not match the family
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rep = family.rep
    lam = eigen_sign(family.flat, family.n0, c)
    q = family.q_matrix
    if fields is not None:
        jets = fields.jets_at(points, method="analytic" if fields.source is not None else "grid")
        if np.max(np.abs(jets.g - np.eye(rep.n))) > 1e-10 or np.max(np.abs(jets.q - q)) > 1e-10:
            raise DomainError("fields do not match the flat data of the closed-form family")

    cbar = np.conj(np.asarray(c, dtype=complex))
    S = family.state(points)
    dS = family.gradient(points)
    psi, f, W = spinor_scalars(rep, S, c)
    dpsi = dS @ cbar
    Gg = np.einsum("ij,ajk->aik", rep.twist, rep.gammas)
    df = 2.0 * np.real(np.einsum("pj,pij->pi", np.conj(psi), dpsi))
    dW = 2.0 * np.real(np.einsum("pj,ajk,pik->pia", np.conj(psi), Gg, dpsi))

    expected_df = -lam * W @ q.T
    expected_dW = -lam * f[:, None, None] * q[None]

    n = rep.n
    fd_f = np.zeros_like(df)
    fd_W = np.zeros_like(dW)
    for i in range(n):
        step = np.zeros(n)
        step[i] = fd_step
        _, fp, Wp = spinor_scalars(rep, family.state(points + step), c)
        _, fm, Wm = spinor_scalars(rep, family.state(points - step), c)
        fd_f[:, i] = (fp - fm) / (2 * fd_step)
        fd_W[:, i] = (Wp - Wm) / (2 * fd_step)

    return WGradientResidual(
        df=float(np.max(np.abs(df - expected_df))),
        dW=float(np.max(np.abs(dW - expected_dW))),
        curl=float(np.max(np.abs(dW - np.swapaxes(dW, 1, 2)))),
        fd_df=float(np.max(np.abs(fd_f - expected_df))),
        fd_dW=float(np.max(np.abs(fd_W - expected_dW))),
    )


@dataclass
class CapillaryResult:
    """
    Attributes:
        residual: |<W, nu> - <N, N0> f|
        f: |psi|^2 after projection
        cross: |<psi_-, psi_+>| part responsible for any residual
    """
    residual: float
    f: float
    cross: float


def capillary_residual(S, nu, N, n0, c) -> CapillaryResult:
    """
    Capillary identity at a boundary point.

    S is projected onto {G c(nu) (x) omega_N sigma = sigma} before evaluation.

    Args:
        S: Tuple (m, m)
        nu: Frame components of the unit normal
        N: Euclidean unit face normal
        n0: Direction N0
        c: Coefficients in Lambda_+

    Raises:
        EigenspaceError: If the projection annihilates S or c is not in Lambda_+
    """
    S = np.asarray(S, dtype=complex)
    rep, flat = build_pair(len(nu))
    if eigen_sign(flat, n0, c) != 1:
        raise EigenspaceError("capillary check needs c in Lambda_+")
    chi = chi_matrix(rep, flat, nu, N)
    sigma = 0.5 * (S.reshape(-1) + chi @ S.reshape(-1))
    if np.linalg.norm(sigma) <= 1e-12 * max(np.linalg.norm(S), 1e-300):
        raise EigenspaceError("boundary projection annihilates the tuple")
    Sp = sigma.reshape(rep.m, rep.m)
    psi, f, W = spinor_scalars(rep, Sp, c)
    cos = float(np.dot(N, n0))
    residual = abs(float(W @ np.asarray(nu, dtype=float)) - cos * float(f))
    Y = np.asarray(N, dtype=float) - cos * np.asarray(n0, dtype=float)
    cross = 0.0
    if np.linalg.norm(Y) > 1e-12:
        Y /= np.linalg.norm(Y)
        psi_y, _, _ = spinor_scalars(rep, Sp, omega_matrix(flat, Y) @ np.asarray(c, dtype=complex))
        cross = abs(complex(_pairing(psi_y, psi)))
    return CapillaryResult(residual=residual, f=float(f), cross=cross)


@dataclass
class Boundary2ffResult:
    """
    Attributes:
        identity: max |h_ik + cos(theta) q_ik - q(e_i, nu) <xi, e_k>|
        geodesic: Max second fundamental form of the face inside the leaf, or
            None when theta is 0 or pi
        cos_theta: Face angle
    """
    identity: float
    geodesic: float | None
    cos_theta: float


def geodesic_residual(geo, surface, xi, nabla_xi) -> float:
    """
    Second fundamental form of F cap Sigma inside Sigma, where Sigma has unit normal xi.

    Raises:
        GeometryError: Where xi is parallel to the face normal (theta = 0 or pi)
    """
    P, n = geo.points.shape
    xi_nu = np.einsum("pi,pij,pj->p", xi, geo.g, surface.nu)
    eta = np.sqrt(np.clip(1.0 - xi_nu ** 2, 0.0, None))
    if np.any(eta < 1e-12):
        raise GeometryError("face is tangent to the leaf (theta = 0 or pi); geodesic check undefined")
    if n < 3:
        return 0.0
    xi_t = np.einsum("pi,pij,pja->pa", xi, geo.g, surface.tangent)
    u = xi_t / np.linalg.norm(xi_t, axis=-1, keepdims=True)
    B = adapted_rotation(u)[:, :, : n - 2]
    S_xi = np.einsum("pia,pik,pkl,plb->pab", surface.tangent, nabla_xi, geo.g, surface.tangent)
    A = np.einsum("pac,pab,pbd->pcd", B, surface.h - xi_nu[:, None, None] * S_xi, B) / eta[:, None, None]
    return float(np.max(np.abs(A)))


def boundary_2ff_residual(fields: FieldSet, poly: Polyhedron, face: int, points, n0, method: str = "grid") -> Boundary2ffResult:
    """
    Boundary second fundamental form identity on a face, with xi the unit
    normal of the level sets of N0.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(np.abs(poly.values(points)[:, face]) > 1e-9):
        raise GeometryError(f"sample points are not on face {face}")
    n0 = np.asarray(n0, dtype=float)
    geo = frame_point(fields, points, method=method)
    surface = hypersurface_geometry(geo, poly.normals[face])
    xi, nabla_xi = normal_field(geo, n0)
    cos = float(poly.theta_profile(n0).cos_theta[face])
    xi_t = np.einsum("pi,pij,pja->pa", xi, geo.g, surface.tangent)
    lhs = surface.h + cos * surface.q_tangent
    rhs = np.einsum("pi,pk->pik", surface.q_nu_tangent, xi_t)
    identity = float(np.max(np.abs(lhs - rhs)))
    geodesic = None
    if 1.0 - abs(cos) > 1e-12:
        geodesic = geodesic_residual(geo, surface, xi, nabla_xi)
    return Boundary2ffResult(identity=identity, geodesic=geodesic, cos_theta=cos)

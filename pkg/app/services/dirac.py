"""
Twisted spinor operators at points.

The twisted fiber is S(g) (x) S(delta) with dimension m^2. The curved factor
is acted on in the g-orthonormal frame, the flat factor in the Euclidean
coordinate frame, where its connection vanishes. With G the twist factor of
the representation (the grading for even n, sqrt(-1) for odd n):

    P_v        = G c(v) (x) G cbar(N0)
    nablahat_a = nabla_a + 1/2 P_{q(e_a)}
    Dhat       = D + Psi,  Psi = 1/2 tr q (1/n) sum_a (c(e_a) G c(e_a)) (x) G cbar(N0)

For even n, Psi reduces to 1/2 tr q (eps (x) epsbar) cbar(N0); for odd n to
1/2 tr q cbar(N0).
"""
from dataclasses import dataclass
import logging
import numpy as np

from .clifford import CliffordRep, clifford_matrix, conjugate_rep, omega_matrix, twisted
from .errors import EigenspaceError, GeometryError
from .geometry import FramePoint, HypersurfaceGeometry

logger = logging.getLogger(__name__)


def _inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Real inner product Re<a, b> over the last axis."""
    return np.real(np.einsum("...i,...i->...", a, np.conj(b)))


@dataclass(eq=False)
class TwistedPointOperators:
    """
    Twisted-fiber matrices at a batch of points.

    Attributes:
        rep: Representation of the curved factor
        flat: Representation of the flat factor
        n0: Fixed Euclidean unit direction N0
        frame: E[p, i, a] from the frame geometry
        cliff: c(e_a) (x) Id, shape (n, M, M)
        spin: Spin connection Omega(e_a) (x) Id, shape (P, n, M, M)
        modification: 1/2 P_{q(e_a)}, shape (P, n, M, M)
        grading: eps (x) epsbar
        psi: Psi, shape (P, M, M)
        literal_sign: Use Dhat = D - Psi instead of D + Psi
    """
    rep: CliffordRep
    flat: CliffordRep
    n0: np.ndarray
    frame: np.ndarray
    cliff: np.ndarray
    spin: np.ndarray
    modification: np.ndarray
    grading: np.ndarray
    psi: np.ndarray
    literal_sign: bool = False

    @property
    def dim(self) -> int:
        return self.rep.m * self.flat.m

    def p_matrix(self, v) -> np.ndarray:
        """P_v for frame components v, shape (..., n)."""
        return twisted(self.rep.twist @ clifford_matrix(self.rep, v), omega_matrix(self.flat, self.n0))


def spin_connection(rep: CliffordRep, connection: np.ndarray) -> np.ndarray:
    """Omega_a = 1/4 sum_bc omega_abc c(e_b) c(e_c) on the curved factor."""
    pairs = np.einsum("bij,cjk->bcik", rep.gammas, rep.gammas)
    return 0.25 * np.einsum("...abc,bcij->...aij", connection, pairs)


def assemble_operators(geo: FramePoint, rep: CliffordRep, n0, flat: CliffordRep | None = None,
                       literal_sign: bool = False) -> TwistedPointOperators:
    """
    Build the point operators from frame geometry.

    Args:
        geo: Frame data at P points
        rep: Curved-factor representation
        n0: Unit Euclidean vector N0
        flat: Flat-factor representation (defaults to rep)
        literal_sign: Subtract Psi in Dhat
    """
    flat = flat or conjugate_rep(rep)
    n0 = np.asarray(n0, dtype=float)
    if abs(np.linalg.norm(n0) - 1.0) > 1e-10:
        raise GeometryError("N0 must be a unit vector")
    I = rep.identity
    omega0 = omega_matrix(flat, n0)
    G = rep.twist
    spin = twisted(spin_connection(rep, geo.connection), I)
    modification = 0.5 * twisted(G @ clifford_matrix(rep, geo.q), omega0)
    sandwich = np.einsum("aij,jk,akl->il", rep.gammas, G, rep.gammas) / rep.n
    phi = twisted(sandwich, omega0)
    psi = 0.5 * geo.tr_q[:, None, None] * phi
    return TwistedPointOperators(
        rep=rep,
        flat=flat,
        n0=n0,
        frame=geo.frame,
        cliff=twisted(rep.gammas, I),
        spin=spin,
        modification=modification,
        grading=twisted(rep.grading, flat.grading),
        psi=psi,
        literal_sign=literal_sign,
    )


def covariant_derivative(ops: TwistedPointOperators, sigma, dsigma) -> np.ndarray:
    """
    nabla_{e_a} sigma for every frame direction.

    Args:
        sigma: Values (P, M)
        dsigma: Coordinate partials (P, n, M), dsigma[p, k] = d_k sigma

    Returns:
        Array (P, n, M)
    """
    directional = np.einsum("pka,pkm->pam", ops.frame, dsigma)
    return directional + np.einsum("pamk,pk->pam", ops.spin, sigma)


def nabla_hat_apply(ops: TwistedPointOperators, direction: int | None, sigma, dsigma) -> np.ndarray:
    """
    Modified connection nablahat_{e_a} sigma.

    Args:
        direction: Frame index a, or None for all directions (P, n, M)
    """
    sigma = np.asarray(sigma, dtype=complex)
    full = covariant_derivative(ops, sigma, dsigma) + np.einsum("pamk,pk->pam", ops.modification, sigma)
    return full if direction is None else full[:, direction]


def dirac_apply(ops: TwistedPointOperators, sigma, dsigma) -> np.ndarray:
    """Unmodified Dirac operator D sigma = sum_a c(e_a) nabla_a sigma."""
    return np.einsum("amk,pak->pm", ops.cliff, covariant_derivative(ops, np.asarray(sigma, dtype=complex), dsigma))


def dirac_hat_apply(ops: TwistedPointOperators, sigma, dsigma, assembly: str = "split") -> np.ndarray:
    """
    Modified Dirac operator.

    Args:
        assembly: "split" evaluates D sigma +/- Psi sigma; "direct" evaluates
            sum_a c(e_a) nablahat_a sigma, which always equals D + Psi
    """
    sigma = np.asarray(sigma, dtype=complex)
    if assembly == "direct":
        return np.einsum("amk,pak->pm", ops.cliff, nabla_hat_apply(ops, None, sigma, dsigma))
    sign = -1.0 if ops.literal_sign else 1.0
    return dirac_apply(ops, sigma, dsigma) + sign * np.einsum("pmk,pk->pm", ops.psi, sigma)


@dataclass(eq=False)
class BoundaryPointOperators:
    """
    Boundary matrices at a batch of boundary points, in frame components.

    Attributes:
        nu: Frame components of the g-unit outward normal (P, n)
        tangent: Frame components of the tangent frame, tangent[p, :, j] (P, n, n - 1)
        w: Frame components of nabla_{e_j} nu (P, n - 1, n)
        N: Euclidean boundary map values (P, n)
        dN: Euclidean derivatives of N along the tangent frame (P, n - 1, n)
        H: Mean curvature (P,)
        boundary_cliff: c(e_j) c(nu) (x) Id, (P, n - 1, M, M)
        correction: 1/2 c(w_j) c(nu) (x) Id + 1/2 Id (x) cbar(dN_j) cbar(N), (P, n - 1, M, M)
        chi: Boundary involution, (P, M, M)
        a_operator: 1/2 H + 1/2 sum_j c(nu) c(e_j) (x) cbar(dN_j) cbar(N), (P, M, M)
    """
    nu: np.ndarray
    tangent: np.ndarray
    w: np.ndarray
    N: np.ndarray
    dN: np.ndarray
    H: np.ndarray
    boundary_cliff: np.ndarray
    correction: np.ndarray
    chi: np.ndarray
    a_operator: np.ndarray


def assemble_boundary(rep: CliffordRep, flat: CliffordRep, nu, tangent, w, N, dN) -> BoundaryPointOperators:
    """
    Boundary operators from frame data.

    Raises:
        GeometryError: If nu or N is not unit length
    """
    nu = np.atleast_2d(np.asarray(nu, dtype=float))
    N = np.atleast_2d(np.asarray(N, dtype=float))
    tangent = np.asarray(tangent, dtype=float).reshape(len(nu), rep.n, rep.n - 1)
    w = np.asarray(w, dtype=float).reshape(len(nu), rep.n - 1, rep.n)
    dN = np.asarray(dN, dtype=float).reshape(len(nu), rep.n - 1, rep.n)
    for label, v in (("nu", nu), ("N", N)):
        if np.any(np.abs(np.linalg.norm(v, axis=-1) - 1.0) > 1e-10):
            raise GeometryError(f"{label} must be a unit vector at every boundary point")
    I_g, I_f = rep.identity, flat.identity
    c_nu = clifford_matrix(rep, nu)[:, None]
    c_t = clifford_matrix(rep, np.swapaxes(tangent, 1, 2))
    c_w = clifford_matrix(rep, w)
    cbar_N = clifford_matrix(flat, N)[:, None]
    cbar_dN = clifford_matrix(flat, dN)
    H = np.einsum("pij,pij->p", tangent, w.swapaxes(1, 2))
    boundary_cliff = twisted(c_t @ c_nu, I_f)
    correction = 0.5 * twisted(c_w @ c_nu, I_f) + 0.5 * twisted(I_g, cbar_dN @ cbar_N)
    chi = twisted(rep.twist @ c_nu[:, 0], flat.twist @ cbar_N[:, 0])
    a_op = 0.5 * np.sum(twisted(c_nu @ c_t, cbar_dN @ cbar_N), axis=1)
    a_op = a_op + 0.5 * H[:, None, None] * np.eye(rep.m * flat.m)
    return BoundaryPointOperators(
        nu=nu, tangent=tangent, w=w, N=N, dN=dN, H=H,
        boundary_cliff=boundary_cliff, correction=correction, chi=chi, a_operator=a_op,
    )


def boundary_frame_data(geo: FramePoint, surface: HypersurfaceGeometry, N, dN_coord=None):
    """
    Frame-component inputs for assemble_boundary from a hypersurface sample.

    Args:
        N: Euclidean boundary map values (P, n) or (n,)
        dN_coord: Coordinate derivatives d_k N^m, (P, n, n); zero if omitted

    Returns:
        (nu, tangent, w, N, dN) in the shapes assemble_boundary expects
    """
    P, n = geo.points.shape
    O = surface.rotation
    tangent = O[:, :, : n - 1]
    w = np.einsum("pij,pik,pkl,pla->pja", surface.tangent, surface.nabla_nu, geo.g, geo.frame)
    N = np.broadcast_to(np.asarray(N, dtype=float), (P, n))
    if dN_coord is None:
        dN = np.zeros((P, n - 1, n))
    else:
        dN = np.einsum("pkj,pkm->pjm", surface.tangent, dN_coord)
    return surface.nu_frame, tangent, w, N, dN


def boundary_dirac_apply(bops: BoundaryPointOperators, sigma, nabla_sigma) -> np.ndarray:
    """
    Boundary Dirac operator D^b sigma = sum_j c(e_j) c(nu) [nabla_j sigma + correction_j sigma].

    Args:
        sigma: Values (P, M)
        nabla_sigma: Covariant derivatives along the tangent frame (P, n - 1, M)
    """
    sigma = np.asarray(sigma, dtype=complex)
    inner = np.asarray(nabla_sigma, dtype=complex) + np.einsum("pjmk,pk->pjm", bops.correction, sigma)
    return np.einsum("pjmk,pjk->pm", bops.boundary_cliff, inner)


def random_boundary_draw(n: int, rng: np.random.Generator, with_dN: bool = True):
    """
    Random admissible boundary data at one point, in frame components.

    The normal and tangent frame are the columns of a random orthogonal
    matrix, w_j = sum_k h_jk e_k with h symmetric, N is a random unit vector
    and every dN_j is orthogonal to N.
    """
    O, _ = np.linalg.qr(rng.normal(size=(n, n)))
    nu = O[:, -1]
    tangent = O[:, : n - 1]
    h = rng.normal(size=(n - 1, n - 1))
    h = 0.5 * (h + h.T)
    w = h @ tangent.T
    N = rng.normal(size=n)
    N /= np.linalg.norm(N)
    dN = rng.normal(size=(n - 1, n)) if with_dN else np.zeros((n - 1, n))
    dN -= np.outer(dN @ N, N)
    return nu, tangent, w, N, dN


def anticommutator_residual(rep: CliffordRep, flat: CliffordRep, nu, tangent, w, N, dN) -> float:
    """
    Operator norm of D^b chi + chi D^b at one boundary point.

    D^b acts on the jet (sigma, nabla_1 sigma, ..., nabla_{n-1} sigma) and chi
    varies along the boundary with
    nabla_j chi = G c(w_j) (x) G cbar(N) + G c(nu) (x) G cbar(dN_j),
    so the residual is exact linear algebra on the jet space.
    """
    bops = assemble_boundary(rep, flat, nu, tangent, w, N, dN)
    n, M = rep.n, bops.chi.shape[-1]
    chi = bops.chi[0]
    G, Gf = rep.twist, flat.twist
    c_nu = clifford_matrix(rep, bops.nu[0])
    cbar_N = clifford_matrix(flat, bops.N[0])
    dchi = [
        twisted(G @ clifford_matrix(rep, bops.w[0, j]), Gf @ cbar_N)
        + twisted(G @ c_nu, Gf @ clifford_matrix(flat, bops.dN[0, j]))
        for j in range(n - 1)
    ]
    # columns: sigma block then one block per tangent derivative
    def dirac_blocks(zeroth, firsts):
        total = np.zeros((M, n * M), dtype=complex)
        for j in range(n - 1):
            Bj, Cj = bops.boundary_cliff[0, j], bops.correction[0, j]
            total += Bj @ (firsts[j] + Cj @ zeroth)
        return total

    Z = np.zeros((M, n * M), dtype=complex)
    sigma_block = Z.copy()
    sigma_block[:, :M] = np.eye(M)
    deriv_blocks = []
    for j in range(n - 1):
        block = Z.copy()
        block[:, (j + 1) * M:(j + 2) * M] = np.eye(M)
        deriv_blocks.append(block)

    of_chi_sigma = dirac_blocks(chi @ sigma_block, [dchi[j] @ sigma_block + chi @ deriv_blocks[j] for j in range(n - 1)])
    chi_of = chi @ dirac_blocks(sigma_block, deriv_blocks)
    return float(np.linalg.norm(of_chi_sigma + chi_of, ord=2))


def chi_projector(chi: np.ndarray, sign: int = 1) -> np.ndarray:
    return 0.5 * (np.eye(chi.shape[-1]) + sign * chi)


def chi_eigenspace_vanishing(rep: CliffordRep, flat: CliffordRep, nu, N, Y, v, sigma, sign: int = 1) -> tuple[float, float]:
    """
    Pairings <G c(nu) (x) G cbar(Y) sigma, sigma> and <G c(v) (x) G cbar(N) sigma, sigma>.

    sigma is first projected to the sign-eigenspace of chi(nu, N); both
    pairings vanish when Y is orthogonal to N and v to nu.

    Raises:
        GeometryError: If Y is not orthogonal to N or v not orthogonal to nu
        EigenspaceError: If the projection annihilates sigma
    """
    nu, N, Y, v = (np.asarray(a, dtype=float) for a in (nu, N, Y, v))
    if abs(Y @ N) > 1e-10 or abs(v @ nu) > 1e-10:
        raise GeometryError("Y must be orthogonal to N and v orthogonal to nu")
    bops = assemble_boundary(rep, flat, nu, np.zeros((rep.n, rep.n - 1)), np.zeros((rep.n - 1, rep.n)), N,
                             np.zeros((rep.n - 1, rep.n)))
    projected = chi_projector(bops.chi[0], sign) @ np.asarray(sigma, dtype=complex)
    if np.linalg.norm(projected) <= 1e-12 * max(1.0, np.linalg.norm(sigma)):
        raise EigenspaceError("projection onto the chi eigenspace annihilates sigma")
    G, Gf = rep.twist, flat.twist
    first = twisted(G @ clifford_matrix(rep, nu), Gf @ clifford_matrix(flat, Y)) @ projected
    second = twisted(G @ clifford_matrix(rep, v), Gf @ clifford_matrix(flat, N)) @ projected
    return abs(np.vdot(projected, first)), abs(np.vdot(projected, second))


def trace_norm(dN: np.ndarray) -> np.ndarray:
    """Sum of singular values of the map e_j -> dN_j, shape (..., n - 1, n)."""
    return np.sum(np.linalg.svd(np.asarray(dN, dtype=float), compute_uv=False), axis=-1)


def a_operator_bound(rep: CliffordRep, flat: CliffordRep, H: float, nu, tangent, N, dN, sigma) -> tuple[float, float]:
    """
    (<A sigma, sigma>, 1/2 (H - ||dN||_tr) |sigma|^2) at one boundary point.

    The mean curvature enters directly; w is chosen as H/(n - 1) times the
    tangent frame so that the assembled A carries exactly this H.
    """
    n = rep.n
    tangent = np.asarray(tangent, dtype=float)
    w = (H / (n - 1)) * tangent.T
    bops = assemble_boundary(rep, flat, nu, tangent, w, N, dN)
    sigma = np.asarray(sigma, dtype=complex)
    value = float(np.real(np.vdot(sigma, bops.a_operator[0] @ sigma)))
    bound = 0.5 * (H - float(trace_norm(bops.dN[0]))) * float(np.real(np.vdot(sigma, sigma)))
    return value, bound


def common_plus_space(operators) -> np.ndarray:
    """
    Orthonormal basis (columns) of the common +1 eigenspace of commuting involutions.

    Raises:
        EigenspaceError: If the common eigenspace is trivial
    """
    operators = list(operators)
    M = operators[0].shape[-1]
    projector = np.eye(M, dtype=complex)
    for op in operators:
        projector = projector @ chi_projector(op)
    projector = 0.5 * (projector + projector.conj().T)
    vals, vecs = np.linalg.eigh(projector)
    basis = vecs[:, vals > 0.5]
    if basis.shape[1] == 0:
        raise EigenspaceError("the involutions have no common +1 eigenvector")
    return basis


def rigid_space(rep: CliffordRep, flat: CliffordRep | None = None) -> np.ndarray:
    """
    Common +1 eigenspace of G c(e_a) (x) G cbar(E_a) over all a.

    For even n this is spanned by the canonical identification
    sigma = sum_a s_a (x) sbar_a; for odd n it is trivial.
    """
    flat = flat or conjugate_rep(rep)
    return common_plus_space(
        twisted(rep.twist @ rep.gammas[a], flat.twist @ flat.gammas[a]) for a in range(rep.n)
    )

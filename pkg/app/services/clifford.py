"""
Complex Clifford algebra representations.

Gamma matrices are built by iterated tensor products of Pauli matrices and
multiplied by sqrt(-1), so every generator is skew-Hermitian and squares to
minus the identity. The same construction serves both factors of the twisted
bundle: the curved factor (acting in a g-orthonormal frame) and the flat
factor (acting in the Euclidean coordinate frame).
"""
from dataclasses import dataclass
from functools import reduce
import numpy as np

from .errors import ConfigError, DimensionError, GeometryError

MIN_DIMENSION = 2
MAX_DIMENSION = 8

# Pauli matrices
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class CliffordRep:
    """
    Matrix representation of the complex Clifford algebra in dimension n.

    Attributes:
        n: Ambient dimension
        m: Spinor dimension 2^(n // 2)
        gammas: Array (n, m, m) of skew-Hermitian generators
        parity: "even" or "odd"
        grading: Chirality involution for even n, complex volume element for odd n
        twist: Factor multiplying Clifford actions in the modified connection;
            the grading for even n and sqrt(-1) times the identity for odd n
    """
    n: int
    m: int
    gammas: np.ndarray
    parity: str
    grading: np.ndarray
    twist: np.ndarray

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.m, dtype=complex)


def _kron_all(factors: list[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def build_rep(n: int) -> CliffordRep:
    """
    Build the standard representation for dimension n.

    Args:
        n: Dimension, 2 <= n <= 8

    Returns:
        CliffordRep with frozen (read-only) matrices

    Raises:
        DimensionError: If n is outside the supported range
    """
    if not isinstance(n, (int, np.integer)) or not MIN_DIMENSION <= n <= MAX_DIMENSION:
        raise DimensionError(
            f"dimension must be an integer in [{MIN_DIMENSION}, {MAX_DIMENSION}], got {n!r}"
        )
    k = n // 2
    hermitian = []
    for j in range(k):
        head = [_Z] * j
        tail = [_I2] * (k - j - 1)
        hermitian.append(_kron_all(head + [_X] + tail))
        hermitian.append(_kron_all(head + [_Y] + tail))
    if n % 2 == 1:
        hermitian.append(_kron_all([_Z] * k))

    gammas = 1j * np.stack(hermitian)
    m = 2 ** k
    product = reduce(np.matmul, gammas)
    if n % 2 == 0:
        parity = "even"
        grading = (1j ** (n // 2)) * product
        twist = grading
    else:
        parity = "odd"
        grading = (1j ** ((n + 1) // 2)) * product
        twist = 1j * np.eye(m, dtype=complex)

    for arr in (gammas, grading, twist):
        arr.setflags(write=False)
    return CliffordRep(n=n, m=m, gammas=gammas, parity=parity, grading=grading, twist=twist)


def conjugate_rep(rep: CliffordRep) -> CliffordRep:
    """
    Representation on the conjugate spinor space in the basis {sbar_a}.

    Clifford action and grading are the entrywise conjugates of those of rep;
    multiplication by sqrt(-1) stays sqrt(-1) in the conjugate basis, so the
    odd-dimensional twist factor is unchanged.
    """
    gammas = np.conj(rep.gammas)
    grading = np.conj(rep.grading)
    twist = grading if rep.parity == "even" else 1j * np.eye(rep.m, dtype=complex)
    for arr in (gammas, grading, twist):
        arr.setflags(write=False)
    return CliffordRep(n=rep.n, m=rep.m, gammas=gammas, parity=rep.parity, grading=grading, twist=twist)


def build_pair(n: int) -> tuple[CliffordRep, CliffordRep]:
    """Representations of the curved factor and of the conjugate flat factor."""
    rep = build_rep(n)
    return rep, conjugate_rep(rep)


def clifford_matrix(rep: CliffordRep, v) -> np.ndarray:
    """
    Matrix of Clifford multiplication by v = sum v_i e_i.

    Args:
        rep: Representation
        v: Components, shape (..., n); real or complex

    Returns:
        Array (..., m, m)
    """
    v = np.asarray(v)
    if v.shape[-1] != rep.n:
        raise DimensionError(f"vector has {v.shape[-1]} components, expected {rep.n}")
    return np.einsum("...i,ijk->...jk", v, rep.gammas)


def clifford_mul(rep: CliffordRep, v, s) -> np.ndarray:
    """
    Clifford multiplication (sum v_i gamma_i) s.

    Raises:
        DimensionError: On size mismatch
    """
    s = np.asarray(s, dtype=complex)
    if s.shape[-1] != rep.m:
        raise DimensionError(f"spinor has {s.shape[-1]} components, expected {rep.m}")
    return np.einsum("...jk,...k->...j", clifford_matrix(rep, v), s)


def omega_matrix(rep: CliffordRep, X, parity_mode: str | None = None) -> np.ndarray:
    """
    Matrix omega_X acting on spinor m-tuples.

    Entries are <epsbar cbar(X) sbar_b, sbar_a> in the standard basis, i.e.
    the matrix epsbar cbar(X) itself; the odd mode uses sqrt(-1) cbar(X).

    Args:
        rep: Representation of the flat factor (see conjugate_rep)
        X: Euclidean vector(s), shape (..., n)
        parity_mode: "even" or "odd"; defaults to rep.parity

    Returns:
        Hermitian array (..., m, m)

    Raises:
        ConfigError: If parity_mode disagrees with the representation
    """
    mode = parity_mode or rep.parity
    if mode != rep.parity:
        raise ConfigError(f"parity mode {mode!r} does not match a {rep.parity}-dimensional representation")
    return rep.twist @ clifford_matrix(rep, X)


def twisted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Tensor product a (x) b on the twisted fiber, batched over leading axes.

    The twisted vector sigma = sum_a s_a (x) sbar_a is stored as the row-major
    flattening of the m x m matrix whose columns are the spinors s_a, so
    (a (x) b) sigma corresponds to a S b^T.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    m1, m2 = a.shape[-1], b.shape[-1]
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    return out.reshape(out.shape[:-4] + (m1 * m2, m1 * m2))


def tuple_to_twisted(S: np.ndarray) -> np.ndarray:
    """Flatten an m-tuple of spinors (columns of S) into a twisted vector."""
    S = np.asarray(S)
    return S.reshape(S.shape[:-2] + (S.shape[-2] * S.shape[-1],))


def twisted_to_tuple(sigma: np.ndarray, m: int) -> np.ndarray:
    """Inverse of tuple_to_twisted."""
    sigma = np.asarray(sigma)
    return sigma.reshape(sigma.shape[:-1] + (m, m))


def _check_unit(v: np.ndarray, label: str) -> None:
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-10:
        raise GeometryError(f"{label} must be a unit vector, |{label}| = {norm:.3e}")


def chi_matrix(rep_g: CliffordRep, rep_flat: CliffordRep, nu, N) -> np.ndarray:
    """
    Boundary involution chi = (eps (x) epsbar)(c(nu) (x) cbar(N)).

    In odd dimension the factors are c(sqrt(-1) nu) and cbar(sqrt(-1) N).

    Args:
        rep_g: Representation of the curved factor
        rep_flat: Representation of the flat factor
        nu: Frame components of the g-unit normal
        N: Euclidean unit vector

    Returns:
        Hermitian involution of size m^2

    Raises:
        GeometryError: If nu or N is not a unit vector
    """
    nu = np.asarray(nu, dtype=float)
    N = np.asarray(N, dtype=float)
    _check_unit(nu, "nu")
    _check_unit(N, "N")
    return twisted(rep_g.twist @ clifford_matrix(rep_g, nu), rep_flat.twist @ clifford_matrix(rep_flat, N))

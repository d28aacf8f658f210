"""
Convex polyhedra in half-space form, their faces, and the log-sum-exp smoothing.

A polyhedron is the intersection of half-spaces {u_l <= 0} with
u_l(x) = <a_l, x> + b_l. The smoothing replaces it by the sublevel set
{sum_l exp(lambda u_l) <= 1}, whose Gauss map is the exponentially weighted
average of the face normals.
"""
from dataclasses import dataclass, field
from itertools import combinations
import logging
import numpy as np
from scipy.optimize import brentq, linprog
from scipy.special import logsumexp

from .errors import DimensionError, DomainError, GeometryError

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-9
DEFAULT_LAMBDAS = (8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class HalfSpace:
    """
    Half-space {u <= 0} with u(x) = <a, x> + b.

    Attributes:
        a: Non-zero coefficient vector
        b: Offset
    """
    a: tuple
    b: float

    def __post_init__(self):
        if not np.any(np.asarray(self.a, dtype=float)):
            raise GeometryError("half-space coefficient vector must be non-zero")


@dataclass(frozen=True)
class Membership:
    """
    Classification of a point.

    Attributes:
        kind: "interior", "boundary" or "exterior"
        faces: Face ids active at a boundary point (empty otherwise)
    """
    kind: str
    faces: tuple = ()


@dataclass(frozen=True)
class ThetaProfile:
    """
    Per-face angles between the fixed direction N0 and the face normals.

    Attributes:
        n0: Unit direction
        cos_theta: cos(theta_l) = <N0, N_l>
        theta: Angles in [0, pi]
    """
    n0: np.ndarray
    cos_theta: np.ndarray
    theta: np.ndarray

    @property
    def sin_theta(self) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - self.cos_theta ** 2, 0.0, None))


@dataclass(frozen=True)
class FaceQuadrature:
    """
    Midpoint-rule nodes on one face.

    Attributes:
        face: Face id
        points: Array (P, n)
        weights: Array (P,), summing to the Euclidean area of the face
        h: Mesh width used
    """
    face: int
    points: np.ndarray
    weights: np.ndarray
    h: float


@dataclass(eq=False)
class Polyhedron:
    """
    Compact convex polyhedron with non-empty interior.

    Attributes:
        halfspaces: Defining half-spaces
        name: Preset name or "custom"
        A: Array (L, n) of coefficient vectors
        b: Array (L,) of offsets
        normals: Outward Euclidean unit normals N_l
        bbox: Array (2, n) of lower and upper corners
        center: Chebyshev center (interior point)
        inradius: Radius of the largest inscribed ball
    """
    halfspaces: list
    name: str = "custom"
    A: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)
    normals: np.ndarray = field(init=False)
    bbox: np.ndarray = field(init=False)
    center: np.ndarray = field(init=False)
    inradius: float = field(init=False)

    def __post_init__(self):
        if not self.halfspaces:
            raise GeometryError("a polyhedron needs at least one half-space")
        self.A = np.array([np.asarray(h.a, dtype=float) for h in self.halfspaces])
        self.b = np.array([float(h.b) for h in self.halfspaces])
        norms = np.linalg.norm(self.A, axis=1)
        self.normals = self.A / norms[:, None]
        self.bbox = self._bounding_box()
        self.center, self.inradius = self._chebyshev_center()
        if self.inradius <= 1e-12:
            raise GeometryError(f"polyhedron {self.name!r} has empty interior")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def face_count(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_rows(cls, rows, name: str = "custom") -> "Polyhedron":
        """Build from (a, b) rows as read from a run configuration."""
        return cls([HalfSpace(tuple(float(v) for v in a), float(b)) for a, b in rows], name=name)

    def _bounding_box(self) -> np.ndarray:
        n = self.n
        box = np.zeros((2, n))
        for k in range(n):
            for side, sign in ((0, 1.0), (1, -1.0)):
                c = np.zeros(n)
                c[k] = sign
                res = linprog(c, A_ub=self.A, b_ub=-self.b, bounds=[(None, None)] * n, method="highs")
                if res.status != 0:
                    raise GeometryError(f"polyhedron {self.name!r} is unbounded or infeasible along axis {k}")
                box[side, k] = res.x[k]
        return box

    def _chebyshev_center(self) -> tuple[np.ndarray, float]:
        n = self.n
        norms = np.linalg.norm(self.A, axis=1)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.A, norms[:, None]])
        res = linprog(c, A_ub=A_ub, b_ub=-self.b, bounds=[(None, None)] * n + [(0, None)], method="highs")
        if res.status != 0:
            raise GeometryError(f"could not locate an interior point of {self.name!r}")
        return res.x[:n], float(res.x[-1])

    def values(self, x) -> np.ndarray:
        """Affine functions u_l at x, shape (..., L)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionError(f"point has {x.shape[-1]} coordinates, expected {self.n}")
        return x @ self.A.T + self.b

    def membership(self, x, tol: float = BOUNDARY_TOL) -> Membership:
        u = self.values(x)
        if np.any(u > tol):
            return Membership("exterior")
        active = tuple(int(i) for i in np.flatnonzero(np.abs(u) <= tol))
        if active:
            return Membership("boundary", active)
        return Membership("interior")

    def log_levelset(self, lam: float, x) -> np.ndarray:
        """log F_lambda(x), evaluated with the shifted log-sum-exp."""
        if lam <= 0:
            raise DomainError(f"smoothing parameter must be positive, got {lam}")
        return logsumexp(lam * self.values(x), axis=-1)

    def smoothing_levelset(self, lam: float, x) -> np.ndarray:
        """
        F_lambda(x) = sum_l exp(lambda u_l(x)); the smoothed body is {F_lambda <= 1}.

        Overflow is avoided by going through log_levelset; values too large
        for a double come back as inf, with the sign of the log deciding membership.
        """
        with np.errstate(over="ignore"):
            return np.exp(self.log_levelset(lam, x))

    def smoothed_gauss(self, lam: float, x) -> np.ndarray:
        """
        Normalized exponential-weighted average of the face normals.

        Raises:
            GeometryError: If the weighted sum degenerates
        """
        exps = lam * self.values(x)
        weights = np.exp(exps - np.max(exps, axis=-1, keepdims=True))
        total = weights @ self.A
        norm = np.linalg.norm(total, axis=-1, keepdims=True)
        scale = np.max(weights * np.linalg.norm(self.A, axis=1), axis=-1, keepdims=True)
        if np.any(norm <= 1e-12 * scale):
            raise GeometryError("smoothed Gauss map is degenerate (cancelling normals)")
        return total / norm

    def theta_profile(self, n0) -> ThetaProfile:
        n0 = np.asarray(n0, dtype=float)
        if abs(np.linalg.norm(n0) - 1.0) > 1e-10:
            raise GeometryError("N0 must be a unit vector")
        cos = np.clip(self.normals @ n0, -1.0, 1.0)
        return ThetaProfile(n0=n0, cos_theta=cos, theta=np.arccos(cos))

    def is_box(self) -> bool:
        """True for axis-aligned boxes (one pair of opposite faces per axis)."""
        if self.face_count != 2 * self.n:
            return False
        axes = []
        for N in self.normals:
            k = int(np.argmax(np.abs(N)))
            if abs(abs(N[k]) - 1.0) > 1e-12:
                return False
            axes.append((k, np.sign(N[k])))
        return sorted(axes) == sorted((k, s) for k in range(self.n) for s in (-1.0, 1.0))

    def vertices(self) -> np.ndarray:
        """
        Vertices by intersecting n hyperplanes at a time (n <= 3 only).

        Raises:
            DimensionError: For n > 3
        """
        if self.n > 3:
            raise DimensionError("vertex enumeration is only implemented for n <= 3")
        found = []
        for idx in combinations(range(self.face_count), self.n):
            M = self.A[list(idx)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            x = np.linalg.solve(M, -self.b[list(idx)])
            if np.all(self.values(x) <= 1e-9) and not any(np.allclose(x, y, atol=1e-9) for y in found):
                found.append(x)
        return np.array(found)

    def face_vertices(self, face: int) -> np.ndarray:
        """Vertices of one face, ordered counter-clockwise around its centroid for n = 3."""
        verts = self.vertices()
        on_face = verts[np.abs(self.values(verts)[:, face]) <= 1e-9]
        if len(on_face) < self.n:
            raise GeometryError(f"face {face} is degenerate (fewer than {self.n} vertices)")
        if self.n == 3:
            centroid = on_face.mean(axis=0)
            N = self.normals[face]
            t1 = on_face[0] - centroid
            t1 /= np.linalg.norm(t1)
            t2 = np.cross(N, t1)
            rel = on_face - centroid
            order = np.argsort(np.arctan2(rel @ t2, rel @ t1))
            on_face = on_face[order]
        return on_face

    def face_quadrature(self, face: int, resolution: int) -> FaceQuadrature:
        """
        Midpoint-rule nodes on a face.

        Supports axis-aligned boxes in any dimension and faces of arbitrary
        polyhedra for n <= 3 (segments for n = 2, fan-triangulated polygons for n = 3).

        Raises:
            DomainError: For unsupported shapes
        """
        if resolution < 1:
            raise DomainError("face quadrature resolution must be positive")
        if not 0 <= face < self.face_count:
            raise DomainError(f"face id {face} out of range")
        if self.is_box():
            return self._box_face_quadrature(face, resolution)
        if self.n == 2:
            return self._segment_quadrature(face, resolution)
        if self.n == 3:
            return self._polygon_quadrature(face, resolution)
        raise DomainError(
            "exact face meshing is available for axis-aligned boxes and for n <= 3; "
            "use the cube/box/simplex/prism presets"
        )

    def _box_face_quadrature(self, face: int, resolution: int) -> FaceQuadrature:
        N = self.normals[face]
        k = int(np.argmax(np.abs(N)))
        fixed = self.bbox[1, k] if N[k] > 0 else self.bbox[0, k]
        axes = []
        widths = []
        for j in range(self.n):
            if j == k:
                axes.append(np.array([fixed]))
                continue
            lo, hi = self.bbox[0, j], self.bbox[1, j]
            h = (hi - lo) / resolution
            axes.append(lo + h * (np.arange(resolution) + 0.5))
            widths.append(h)
        points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        weights = np.full(len(points), float(np.prod(widths)))
        return FaceQuadrature(face, points, weights, max(widths) if widths else 0.0)

    def _segment_quadrature(self, face: int, resolution: int) -> FaceQuadrature:
        p, q = self.face_vertices(face)[:2]
        t = (np.arange(resolution) + 0.5) / resolution
        points = p + t[:, None] * (q - p)
        length = np.linalg.norm(q - p)
        return FaceQuadrature(face, points, np.full(resolution, length / resolution), length / resolution)

    def _polygon_quadrature(self, face: int, resolution: int) -> FaceQuadrature:
        verts = self.face_vertices(face)
        points, weights = [], []
        r = resolution
        # barycentric centroids of the r^2 congruent sub-triangles
        up = [((i + 1 / 3) / r, (j + 1 / 3) / r) for i in range(r) for j in range(r - i)]
        down = [((i + 2 / 3) / r, (j + 2 / 3) / r) for i in range(r) for j in range(r - i - 1)]
        bary = np.array(up + down)
        h = 0.0
        for t in range(1, len(verts) - 1):
            p0, p1, p2 = verts[0], verts[t], verts[t + 1]
            area = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0))
            points.append(p0 + bary[:, :1] * (p1 - p0) + bary[:, 1:] * (p2 - p0))
            weights.append(np.full(len(bary), area / r ** 2))
            h = max(h, np.linalg.norm(p1 - p0) / r, np.linalg.norm(p2 - p0) / r)
        return FaceQuadrature(face, np.vstack(points), np.concatenate(weights), h)

    def ray_directions(self, count: int, seed: int = 0) -> np.ndarray:
        """Deterministic unit directions for ray sampling."""
        rng = np.random.default_rng(seed)
        d = rng.normal(size=(count, self.n))
        axes = np.vstack([np.eye(self.n), -np.eye(self.n), np.ones((1, self.n)), -np.ones((1, self.n))])
        d = np.vstack([axes, d])
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    def ray_exit(self, origin, direction) -> float:
        """Distance from an interior origin to the boundary along direction."""
        slope = self.A @ direction
        u0 = self.values(origin)
        hits = -u0[slope > 0] / slope[slope > 0]
        return float(np.min(hits))

    def hausdorff_to_levelset(self, lam: float, directions: np.ndarray | None = None) -> float:
        """
        Sampled radial distance between {F_lambda = 1} and the boundary.

        Rays start at the Chebyshev center; along each ray the smoothed boundary
        is located with Brent's method on log F_lambda.

        Raises:
            DomainError: If the center is not inside the smoothed body
        """
        if directions is None:
            directions = self.ray_directions(200)
        c = self.center
        if self.log_levelset(lam, c) >= 0:
            raise DomainError(f"lambda = {lam} too small: the smoothed body misses the center")
        gap = 0.0
        for d in directions:
            t_exit = self.ray_exit(c, d)
            f = lambda t: float(self.log_levelset(lam, c + t * d))
            t_lam = t_exit if f(t_exit) <= 0 else brentq(f, 0.0, t_exit, xtol=1e-14)
            gap = max(gap, t_exit - t_lam)
        logger.debug("lambda=%s radial gap=%.3e", lam, gap)
        return gap


def cube(n: int, side: float = 1.0, origin=None) -> Polyhedron:
    """Axis-aligned cube [origin, origin + side]^n."""
    origin = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
    return box(origin, origin + side, name=f"cube({n}, {side})")


def box(lo, hi, name: str | None = None) -> Polyhedron:
    """Axis-aligned box with corners lo and hi."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    rows = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        rows.append(HalfSpace(tuple(-e), float(lo[k])))
        rows.append(HalfSpace(tuple(e), float(-hi[k])))
    return Polyhedron(rows, name=name or "box")


def simplex(n: int) -> Polyhedron:
    """Standard simplex {x_i >= 0, sum x_i <= 1}."""
    rows = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = -1.0
        rows.append(HalfSpace(tuple(e), 0.0))
    rows.append(HalfSpace(tuple(np.ones(n)), -1.0))
    return Polyhedron(rows, name=f"simplex({n})")


def prism(height: float = 1.0) -> Polyhedron:
    """Triangular prism: standard triangle in (x1, x2) times [0, height] in x3."""
    rows = [
        HalfSpace((-1.0, 0.0, 0.0), 0.0),
        HalfSpace((0.0, -1.0, 0.0), 0.0),
        HalfSpace((1.0, 1.0, 0.0), -1.0),
        HalfSpace((0.0, 0.0, -1.0), 0.0),
        HalfSpace((0.0, 0.0, 1.0), -float(height)),
    ]
    return Polyhedron(rows, name="prism")


PRESETS = {
    "cube": cube,
    "box": box,
    "simplex": simplex,
    "prism": prism,
}

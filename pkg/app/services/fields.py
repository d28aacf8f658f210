"""
Grid-sampled initial data sets (g, q) with analytic presets.

A FieldSet stores the metric g and the symmetric 2-tensor q at the nodes of
a uniform grid. Derivatives come from second-order finite differences
(centered inside, one-sided second order at the edges). Presets also keep
their sympy expressions, which give exact jets for closed-form comparisons
and for smooth evaluation along curves.
"""
from dataclasses import dataclass, field
from pathlib import Path
import logging
import numpy as np
import sympy as sp
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, DomainError, GeometryError

logger = logging.getLogger(__name__)

MIN_EIGENVALUE = 1e-8
GRID_FILE_MAGIC = "# rigidity-grid v1"


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Uniform node grid over an axis-aligned box.

    Attributes:
        origin: Coordinates of the first node, shape (n,)
        spacing: Node spacing per axis, shape (n,)
        shape: Number of nodes per axis
    """
    origin: np.ndarray
    spacing: np.ndarray
    shape: tuple

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.spacing * (np.array(self.shape) - 1)

    @property
    def h(self) -> float:
        return float(np.max(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [self.origin[k] + self.spacing[k] * np.arange(self.shape[k]) for k in range(self.n)]

    def points(self) -> np.ndarray:
        """All node coordinates in C order, shape (P, n)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.n)

    def contains(self, x, margin: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(self.upper))))
        return np.all((x >= self.origin + margin - tol) & (x <= self.upper - margin + tol), axis=-1)

    @classmethod
    def from_box(cls, lo, hi, resolution: int, margin_cells: int = 0) -> "Grid":
        """
        Grid with `resolution` cells per axis across [lo, hi], padded by margin cells.

        Raises:
            ConfigError: For non-positive resolution or an empty box
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if resolution < 2:
            raise ConfigError("grid resolution must be at least 2")
        if np.any(hi <= lo):
            raise ConfigError("grid box must have positive extent on every axis")
        spacing = (hi - lo) / resolution
        origin = lo - margin_cells * spacing
        shape = tuple([resolution + 1 + 2 * margin_cells] * len(lo))
        return cls(origin=origin, spacing=spacing, shape=shape)


@dataclass(eq=False)
class Jets:
    """
    Metric and q with derivatives at a batch of points.

    Attributes:
        points: Array (P, n)
        g: Array (P, n, n)
        dg: Array (P, n, n, n), dg[p, k, i, j] = d_k g_ij
        d2g: Array (P, n, n, n, n), d2g[p, k, l, i, j] = d_k d_l g_ij
        q: Array (P, n, n)
        dq: Array (P, n, n, n), dq[p, k, i, j] = d_k q_ij
    """
    points: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    q: np.ndarray
    dq: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def take(self, index) -> "Jets":
        return Jets(self.points[index], self.g[index], self.dg[index], self.d2g[index], self.q[index], self.dq[index])


class AnalyticSource:
    """
    Closed-form g and q given as sympy matrices in the coordinates x1..xn.

    Every component and its derivatives are compiled with lambdify so that
    exact jets can be evaluated at arbitrary points.
    """

    def __init__(self, symbols, g_expr: sp.Matrix, q_expr: sp.Matrix, name: str = "custom"):
        self.symbols = tuple(symbols)
        self.n = len(self.symbols)
        self.g_expr = sp.Matrix(g_expr)
        self.q_expr = sp.Matrix(q_expr)
        self.name = name
        if self.g_expr.shape != (self.n, self.n) or self.q_expr.shape != (self.n, self.n):
            raise ConfigError(f"expressions for g and q must be {self.n}x{self.n} matrices")
        if self.g_expr != self.g_expr.T or self.q_expr != self.q_expr.T:
            raise ConfigError("g and q expressions must be symmetric")

        n, x = self.n, self.symbols
        g = [[self.g_expr[i, j] for j in range(n)] for i in range(n)]
        q = [[self.q_expr[i, j] for j in range(n)] for i in range(n)]
        dg = [[[sp.diff(g[i][j], x[k]) for j in range(n)] for i in range(n)] for k in range(n)]
        d2g = [[[[sp.diff(dg[k][i][j], x[l]) for j in range(n)] for i in range(n)] for l in range(n)] for k in range(n)]
        dq = [[[sp.diff(q[i][j], x[k]) for j in range(n)] for i in range(n)] for k in range(n)]
        self._compiled = {
            "g": self._compile(g, (n, n)),
            "dg": self._compile(dg, (n, n, n)),
            "d2g": self._compile(d2g, (n, n, n, n)),
            "q": self._compile(q, (n, n)),
            "dq": self._compile(dq, (n, n, n)),
        }

    def _compile(self, nested, shape):
        flat = list(np.array(nested, dtype=object).reshape(-1))
        funcs = []
        for expr in flat:
            expr = sp.sympify(expr)
            if expr.is_zero:
                funcs.append(None)
            else:
                funcs.append(sp.lambdify(self.symbols, expr, modules="numpy"))
        return funcs, shape

    def _evaluate(self, key: str, points: np.ndarray) -> np.ndarray:
        funcs, shape = self._compiled[key]
        P = len(points)
        cols = [points[:, k] for k in range(self.n)]
        out = np.zeros((P, len(funcs)))
        for idx, func in enumerate(funcs):
            if func is not None:
                out[:, idx] = np.broadcast_to(np.asarray(func(*cols), dtype=float), (P,))
        return out.reshape((P,) + shape)

    def metric(self, points) -> np.ndarray:
        return self._evaluate("g", np.atleast_2d(np.asarray(points, dtype=float)))

    def tensor_q(self, points) -> np.ndarray:
        return self._evaluate("q", np.atleast_2d(np.asarray(points, dtype=float)))

    def jets(self, points) -> Jets:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return Jets(
            points=points,
            g=self._evaluate("g", points),
            dg=self._evaluate("dg", points),
            d2g=self._evaluate("d2g", points),
            q=self._evaluate("q", points),
            dq=self._evaluate("dq", points),
        )


@dataclass(eq=False)
class FieldSet:
    """
    Metric g and symmetric tensor q sampled on a grid.

    Attributes:
        grid: Node grid
        g: Array grid.shape + (n, n), symmetric positive definite
        q: Array grid.shape + (n, n), symmetric
        provenance: Preset name or file path
        source: Closed-form expressions when built from a preset
    """
    grid: Grid
    g: np.ndarray
    q: np.ndarray
    provenance: str
    source: AnalyticSource | None = None
    _jets: Jets | None = field(default=None, init=False, repr=False)
    _interpolator: RegularGridInterpolator | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        n = self.grid.n
        expected = tuple(self.grid.shape) + (n, n)
        if self.g.shape != expected or self.q.shape != expected:
            raise ConfigError(f"field arrays must have shape {expected}")
        if not np.allclose(self.g, np.swapaxes(self.g, -1, -2), atol=1e-12):
            raise GeometryError("metric is not symmetric")
        if not np.allclose(self.q, np.swapaxes(self.q, -1, -2), atol=1e-12):
            raise GeometryError("q is not symmetric")
        eig = np.linalg.eigvalsh(self.g)[..., 0]
        if np.min(eig) <= MIN_EIGENVALUE:
            idx = np.unravel_index(int(np.argmin(eig)), eig.shape)
            where = self.grid.origin + self.grid.spacing * np.array(idx)
            raise GeometryError(f"metric is degenerate at node {idx} (x = {where.tolist()})")

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    def grid_jets(self) -> Jets:
        """Finite-difference jets at every node (flattened in C order), cached."""
        if self._jets is None:
            n = self.n
            h = self.grid.spacing
            dg = np.stack([np.gradient(self.g, h[k], axis=k, edge_order=2) for k in range(n)], axis=-3)
            d2g = np.stack([np.gradient(dg, h[l], axis=l, edge_order=2) for l in range(n)], axis=-4)
            d2g = 0.5 * (d2g + np.swapaxes(d2g, -4, -3))
            dq = np.stack([np.gradient(self.q, h[k], axis=k, edge_order=2) for k in range(n)], axis=-3)
            P = int(np.prod(self.grid.shape))
            self._jets = Jets(
                points=self.grid.points(),
                g=self.g.reshape(P, n, n),
                dg=dg.reshape(P, n, n, n),
                d2g=d2g.reshape(P, n, n, n, n),
                q=self.q.reshape(P, n, n),
                dq=dq.reshape(P, n, n, n),
            )
        return self._jets

    def interior_index(self, margin: int = 2) -> np.ndarray:
        """Flat indices of nodes at least `margin` nodes away from every edge."""
        ranges = [np.arange(margin, s - margin) for s in self.grid.shape]
        if any(len(r) == 0 for r in ranges):
            raise DomainError(f"grid too coarse for an interior margin of {margin} nodes")
        mesh = np.meshgrid(*ranges, indexing="ij")
        return np.ravel_multi_index([m.reshape(-1) for m in mesh], self.grid.shape)

    def _grid_interpolator(self) -> RegularGridInterpolator:
        if self._interpolator is None:
            jets = self.grid_jets()
            S = tuple(self.grid.shape)
            stacked = np.concatenate(
                [a.reshape(S + (-1,)) for a in (jets.g, jets.dg, jets.d2g, jets.q, jets.dq)], axis=-1
            )
            self._interpolator = RegularGridInterpolator(self.grid.axes(), stacked, method="linear")
        return self._interpolator

    def jets_at(self, points, method: str = "grid") -> Jets:
        """
        Jets at arbitrary points.

        Args:
            points: Array (P, n)
            method: "grid" (linear interpolation of finite-difference jets) or
                "analytic" (exact jets of the preset expressions)

        Raises:
            DomainError: If a point lies outside the grid or no analytic source exists
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if method == "analytic":
            if self.source is None:
                raise DomainError(f"field {self.provenance!r} has no closed-form source")
            return self.source.jets(points)
        if method != "grid":
            raise ConfigError(f"unknown jet method {method!r}")
        inside = self.grid.contains(points)
        if not np.all(inside):
            bad = points[np.argmin(inside)]
            raise DomainError(f"point {bad.tolist()} lies outside the sampled grid")
        points = np.clip(points, self.grid.origin, self.grid.upper)
        values = self._grid_interpolator()(points)
        n = self.n
        sizes = [n * n, n ** 3, n ** 4, n * n, n ** 3]
        parts = np.split(values, np.cumsum(sizes)[:-1], axis=-1)
        P = len(points)
        return Jets(
            points=points,
            g=parts[0].reshape(P, n, n),
            dg=parts[1].reshape(P, n, n, n),
            d2g=parts[2].reshape(P, n, n, n, n),
            q=parts[3].reshape(P, n, n),
            dq=parts[4].reshape(P, n, n, n),
        )


def coordinate_symbols(n: int) -> tuple:
    return sp.symbols(f"x1:{n + 1}", real=True)


def parse_expression(text, symbols) -> sp.Expr:
    """
    Parse a user expression in x1..xn.

    Raises:
        ConfigError: If the expression cannot be parsed or uses unknown names
    """
    names = {str(s): s for s in symbols}
    try:
        expr = sp.sympify(text, locals=names)
    except (sp.SympifyError, SyntaxError, TypeError) as e:
        raise ConfigError(f"cannot parse expression {text!r}: {e}") from e
    unknown = {str(s) for s in expr.free_symbols} - set(names)
    if unknown:
        raise ConfigError(f"expression {text!r} uses unknown symbols {sorted(unknown)}")
    return expr


def parse_matrix(rows, symbols) -> sp.Matrix:
    n = len(symbols)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"matrix expressions must be {n}x{n}")
    return sp.Matrix([[parse_expression(v, symbols) for v in row] for row in rows])


def _with_extra(q: sp.Matrix, params: dict, symbols) -> sp.Matrix:
    extra = params.get("q_extra")
    if extra is None:
        return q
    return q + parse_matrix(extra, symbols)


def _flat_source(n: int, params: dict) -> AnalyticSource:
    x = coordinate_symbols(n)
    g = sp.eye(n)
    if params.get("q_matrix") is not None:
        q = sp.Matrix(params["q_matrix"]).applyfunc(sp.nsimplify)
    else:
        q = sp.nsimplify(params.get("q_scale", 0)) * sp.eye(n)
    return AnalyticSource(x, g, _with_extra(q, params, x), name="flat")


def _hyperbolic_source(n: int, params: dict) -> AnalyticSource:
    x = coordinate_symbols(n)
    g = x[-1] ** -2 * sp.eye(n)
    q = sp.nsimplify(params.get("sign", 1)) * g
    return AnalyticSource(x, g, _with_extra(q, params, x), name="hyperbolic_uhs")


def _minkowski_graph_source(n: int, params: dict) -> AnalyticSource:
    x = coordinate_symbols(n)
    f = parse_expression(params.get("f", "0.2*sin(x1)"), x)
    grad = sp.Matrix([sp.diff(f, xi) for xi in x])
    hess = sp.hessian(f, x)
    lapse = sp.sqrt(1 - (grad.T * grad)[0, 0])
    g = sp.eye(n) - grad * grad.T
    q = hess / lapse
    src = AnalyticSource(x, g, _with_extra(q, params, x), name="minkowski_graph")
    src.height = f
    src.height_gradient = sp.lambdify(x, list(grad), modules="numpy")
    return src


def _conformal_source(n: int, params: dict) -> AnalyticSource:
    x = coordinate_symbols(n)
    phi = parse_expression(params.get("phi", "0.1*sin(x1)*cos(x2)"), x)
    g = sp.exp(2 * phi) * sp.eye(n)
    q = sp.nsimplify(params.get("q_scale", 0)) * sp.eye(n)
    return AnalyticSource(x, g, _with_extra(q, params, x), name="conformal")


def _product_source(n: int, params: dict) -> AnalyticSource:
    x = coordinate_symbols(n)
    phi = parse_expression(params.get("phi", "0.1*sin(x2)"), x)
    if x[0] in phi.free_symbols:
        raise ConfigError("product preset: phi must not depend on x1")
    g = sp.diag(1, *([sp.exp(2 * phi)] * (n - 1)))
    q = sp.zeros(n)
    q[0, 0] = sp.nsimplify(params.get("b", 0))
    return AnalyticSource(x, g, _with_extra(q, params, x), name="product")


def _custom_source(n: int, params: dict) -> AnalyticSource:
    x = coordinate_symbols(n)
    if "g" not in params or "q" not in params:
        raise ConfigError("custom preset needs both 'g' and 'q' expression matrices")
    return AnalyticSource(x, parse_matrix(params["g"], x), _with_extra(parse_matrix(params["q"], x), params, x))


PRESET_SOURCES = {
    "flat": _flat_source,
    "hyperbolic_uhs": _hyperbolic_source,
    "minkowski_graph": _minkowski_graph_source,
    "conformal": _conformal_source,
    "product": _product_source,
    "custom": _custom_source,
}


def default_domain(name: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Default coordinate box for a preset."""
    lo, hi = np.zeros(n), np.ones(n)
    if name == "hyperbolic_uhs":
        lo[-1], hi[-1] = 2.0, 3.0
    return lo, hi


def preset_source(name: str, params: dict | None, n: int) -> AnalyticSource:
    """
    Closed-form source of a named preset.

    Raises:
        ConfigError: For an unknown preset name
    """
    if name not in PRESET_SOURCES:
        raise ConfigError(f"unknown field preset {name!r}; valid: {sorted(PRESET_SOURCES)}")
    return PRESET_SOURCES[name](n, dict(params or {}))


def preset_field(name: str, params: dict | None, grid: Grid) -> FieldSet:
    """
    Sample a preset on the nodes of a grid.

    Raises:
        ConfigError: Unknown preset or bad parameters
        DomainError: Minkowski graph with |grad f| >= 1 somewhere on the grid
    """
    source = preset_source(name, params, grid.n)
    points = grid.points()
    if name == "minkowski_graph":
        grad = np.stack(
            [np.broadcast_to(np.asarray(c, dtype=float), (len(points),))
             for c in source.height_gradient(*points.T)],
            axis=-1,
        )
        worst = float(np.max(np.linalg.norm(grad, axis=-1)))
        if worst >= 1.0:
            raise DomainError(f"graph is not spacelike on the grid: max |grad f| = {worst:.4f}")
    shape = tuple(grid.shape) + (grid.n, grid.n)
    g = source.metric(points).reshape(shape)
    q = source.tensor_q(points).reshape(shape)
    logger.info("sampled preset %s on %s nodes (h=%.4g)", name, grid.shape, grid.h)
    return FieldSet(grid=grid, g=g, q=q, provenance=name, source=source)


def save_grid_file(fields: FieldSet, path) -> None:
    """Write a FieldSet in the text grid format (upper triangles of g and q per node)."""
    n = fields.n
    iu = np.triu_indices(n)
    P = int(np.prod(fields.grid.shape))
    g = fields.g.reshape(P, n, n)[:, iu[0], iu[1]]
    q = fields.q.reshape(P, n, n)[:, iu[0], iu[1]]
    lines = [
        GRID_FILE_MAGIC,
        f"n {n}",
        "dims " + " ".join(str(s) for s in fields.grid.shape),
        "spacing " + " ".join(repr(float(v)) for v in fields.grid.spacing),
        "origin " + " ".join(repr(float(v)) for v in fields.grid.origin),
    ]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in np.hstack([g, q]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid_file(path) -> FieldSet:
    """
    Read a FieldSet written by save_grid_file.

    Raises:
        ConfigError: On a malformed header, a bad record (with its line
            number) or a wrong record count
    """
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != GRID_FILE_MAGIC:
        raise ConfigError(f"{path}: missing grid file header")
    header = {}
    for line in text[1:5]:
        key, *vals = line.split()
        header[key] = vals
    try:
        n = int(header["n"][0])
        dims = tuple(int(v) for v in header["dims"])
        spacing = np.array([float(v) for v in header["spacing"]])
        origin = np.array([float(v) for v in header["origin"]])
    except (KeyError, ValueError, IndexError) as e:
        raise ConfigError(f"{path}: malformed header ({e})") from e
    t = n * (n + 1) // 2
    P = int(np.prod(dims))
    rows = []
    for number, line in enumerate(text[5:], start=6):
        if not line.strip():
            continue
        try:
            row = [float(v) for v in line.split()]
        except ValueError as e:
            raise ConfigError(f"{path}:{number}: non-numeric record ({e})") from e
        if len(row) != 2 * t:
            raise ConfigError(f"{path}:{number}: expected {2 * t} values, got {len(row)}")
        rows.append(row)
    if len(rows) != P:
        raise ConfigError(f"{path}: expected {P} records, got {len(rows)}")
    records = np.array(rows)
    iu = np.triu_indices(n)
    g = np.zeros((P, n, n))
    q = np.zeros((P, n, n))
    g[:, iu[0], iu[1]] = records[:, :t]
    q[:, iu[0], iu[1]] = records[:, t:]
    g = g + np.triu(g, 1).swapaxes(-1, -2)
    q = q + np.triu(q, 1).swapaxes(-1, -2)
    grid = Grid(origin=origin, spacing=spacing, shape=dims)
    return FieldSet(grid=grid, g=g.reshape(dims + (n, n)), q=q.reshape(dims + (n, n)), provenance=str(path))

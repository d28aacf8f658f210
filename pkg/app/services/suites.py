"""
Suite runner: turns a RunConfig into check records and refinement tables.

Suites run in a fixed order (algebra, dec, faces, smoothing, sl, transport,
rigidity). Each suite draws from its own generator seeded by (seed, suite
index), so enabling a subset of suites does not change the draws of the rest.
"""
import logging
import math
import numpy as np

from app.config import VERSION
from app.schemas import SUITE_NAMES, CheckRecord, CheckReport, ConvergenceRow, RunConfig
from .clifford import build_pair, build_rep, conjugate_rep, omega_matrix
from .dirac import (
    a_operator_bound, anticommutator_residual, assemble_boundary, chi_eigenspace_vanishing, chi_projector,
    random_boundary_draw,
)
from .errors import ConfigError, DomainError, RigidityError
from .fields import FieldSet, Grid, default_domain, load_grid_file, preset_field
from .geometry import (
    constraint_densities, dec_report, face_geometry, matching_angle_residual, null_expansion, rigidity_scan,
)
from .polyhedron import Polyhedron, box, cube, prism, simplex
from .reporting import convergence_basis, convergence_rows
from .sl_verifier import PolynomialSection, verify_sl, verify_sl_inequality
from .transport import (
    KillingFamily, alignment_residual, boundary_2ff_residual, capillary_residual, conserved_drift, eigen_basis,
    exponential_oracle, rigid_initial_state, rigid_tuple, transport, w_gradient_residual,
)

logger = logging.getLogger(__name__)


def build_polyhedron(config: RunConfig) -> Polyhedron:
    """
    Polyhedron described by a run configuration.

    Raises:
        ConfigError: If the description does not match the dimension
    """
    spec, n = config.polyhedron, config.dimension
    if spec.rows is not None:
        if any(len(row) != n + 1 for row in spec.rows):
            raise ConfigError(f"polyhedron.rows: every row needs {n + 1} entries (a_1..a_{n}, b)")
        return Polyhedron.from_rows([(row[:-1], row[-1]) for row in spec.rows])
    if spec.preset == "cube":
        if spec.origin is not None and len(spec.origin) != n:
            raise ConfigError(f"polyhedron.origin: expected {n} components")
        return cube(n, spec.side, spec.origin)
    if spec.preset == "box":
        if len(spec.lo) != n or len(spec.hi) != n:
            raise ConfigError(f"polyhedron.lo/hi: expected {n} components")
        return box(spec.lo, spec.hi)
    if spec.preset == "simplex":
        return simplex(n)
    if spec.preset == "prism":
        if n != 3:
            raise ConfigError("polyhedron.preset: 'prism' is three-dimensional")
        return prism(spec.height)
    lo, hi = default_domain(config.initial_data.preset, n)
    return box(lo, hi, name=f"domain({config.initial_data.preset})")


def build_fields(config: RunConfig, poly: Polyhedron, resolution: int) -> FieldSet:
    """Sample the configured initial data on a grid covering the polyhedron."""
    spec = config.initial_data
    if spec.grid_file is not None:
        fields = load_grid_file(spec.grid_file)
        if fields.n != config.dimension:
            raise ConfigError(f"initial_data.grid_file: file has dimension {fields.n}, config {config.dimension}")
        return fields
    grid = Grid.from_box(poly.bbox[0], poly.bbox[1], resolution, spec.margin_cells)
    return preset_field(spec.preset, spec.params, grid)


def edge_points(poly: Polyhedron) -> np.ndarray:
    """Sample points with exactly two active faces (boxes in any dimension, other shapes for n <= 3)."""
    n = poly.n
    candidates = []
    if poly.is_box():
        lo, hi = poly.bbox
        mid = 0.5 * (lo + hi)
        for i in range(n):
            for j in range(i + 1, n):
                for a in (lo[i], hi[i]):
                    for b in (lo[j], hi[j]):
                        x = mid.copy()
                        x[i], x[j] = a, b
                        candidates.append(x)
    elif n == 2:
        candidates = list(poly.vertices())
    elif n == 3:
        verts = poly.vertices()
        candidates = [0.5 * (verts[i] + verts[j]) for i in range(len(verts)) for j in range(i + 1, len(verts))]
    points = [x for x in candidates if len(poly.membership(x).faces) == 2]
    return np.array(points).reshape(-1, n)


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_in(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    coeffs = rng.normal(size=basis.shape[1]) + 1j * rng.normal(size=basis.shape[1])
    v = basis @ coeffs
    return v / np.linalg.norm(v)


class SuiteRunner:
    """
    Runs the enabled suites of a configuration:
    1. algebra - Clifford relations and pointwise operator identities
    2. dec - constraint densities and the dominant energy condition
    3. faces - tilted boundary condition, null expansions, matching angles
    4. smoothing - log-sum-exp smoothing of the polyhedron
    5. sl - integrated identity and inequality on a box
    6. transport - transport along segments and its conserved quantities
    7. rigidity - rigidity residuals and boundary identities
    """

    # Face samples per axis for pointwise face checks
    FACE_RESOLUTION = 4
    # Sample counts
    RAY_COUNT = 200
    CONTAINMENT_SAMPLES = 2000
    KILLING_POINTS = 20
    TRANSPORT_ORACLE_STEPS = 64
    ALGEBRA_DIMENSIONS = (2, 3, 4, 5, 6)

    def __init__(self, config: RunConfig):
        """
        Initialize the runner.

        Args:
            config: Validated run configuration

        Raises:
            ConfigError: If the polyhedron does not fit the dimension
        """
        self.config = config
        self.tol = config.tolerances
        self.n = config.dimension
        self.n0 = np.array(config.direction, dtype=float)
        self.poly = build_polyhedron(config)
        if self.poly.n != self.n:
            raise ConfigError(f"polyhedron has dimension {self.poly.n}, config {self.n}")
        self.records: list[CheckRecord] = []
        self.rows: list[ConvergenceRow] = []
        self._fields: dict[int, FieldSet] = {}

    # ----- shared helpers -----

    @property
    def resolutions(self) -> list[int]:
        if self.config.initial_data.grid_file is not None:
            return [self.config.resolutions[0]]
        return list(self.config.resolutions)

    def fields(self, resolution: int | None = None) -> FieldSet:
        resolution = resolution or self.resolutions[-1]
        if resolution not in self._fields:
            self._fields[resolution] = build_fields(self.config, self.poly, resolution)
        return self._fields[resolution]

    def method(self, fields: FieldSet) -> str:
        return self.config.method if fields.source is not None else "grid"

    def _record(self, suite: str, name: str, value, threshold=None, comparison: str = "<=",
                location=None, detail: str = "", passed: bool | None = None, **params) -> CheckRecord:
        """Append a check record; pass/fail follows from value, comparison and threshold unless given."""
        if value is not None and not math.isfinite(float(value)):
            detail = (detail + " " if detail else "") + f"non-finite value {value}"
            value = None
        if passed is None:
            if comparison == "info" or threshold is None:
                passed = True
            elif value is None:
                passed = False
            elif comparison == "<=":
                passed = value <= threshold
            else:
                passed = value >= threshold
        record = CheckRecord(
            name=name, suite=suite, value=None if value is None else float(value),
            comparison=comparison, threshold=threshold, passed=bool(passed),
            location=None if location is None else [float(v) for v in location],
            params=params, detail=detail,
        )
        level = logging.INFO if record.passed else logging.WARNING
        logger.log(level, "[%s] %s value=%s threshold=%s %s", suite, name, record.value, threshold,
                   "ok" if record.passed else "FAILED")
        self.records.append(record)
        return record

    def _table(self, check: str, hs, residuals) -> None:
        self.rows.extend(convergence_rows(check, list(hs), list(residuals)))

    @staticmethod
    def _convergence(series: dict[str, list[float]], min_order: float, abs_tol: float) -> tuple[bool, str]:
        """Pass flag over refinement series and, per series, the criterion that decided it."""
        ok, parts = True, []
        for key, values in series.items():
            basis = convergence_basis(values, min_order, abs_tol)
            ok = ok and basis is not None
            parts.append(f"{key}: {basis or 'not converging'}")
        return ok, "; ".join(parts)

    # ----- entry point -----

    def run(self) -> CheckReport:
        """
        Run every enabled suite and assemble the report.

        Errors raised inside a suite are recorded as a failed check named after
        the suite; the remaining suites still run.
        """
        for suite in self.config.enabled_suites:
            logger.info("suite %s: start", suite)
            rng = np.random.default_rng([self.config.seed, SUITE_NAMES.index(suite)])
            try:
                getattr(self, f"_suite_{suite}")(rng)
            except RigidityError as exc:
                logger.error("suite %s aborted: %s", suite, exc)
                self._record(suite, suite, None, passed=False, detail=f"{type(exc).__name__}: {exc}")
            logger.info("suite %s: done", suite)

        environment = {
            "version": VERSION,
            "seed": self.config.seed,
            "dimension": self.n,
            "method": self.config.method,
            "polyhedron": self.poly.name,
            "field": self.config.initial_data.grid_file or self.config.initial_data.preset,
            "dhat": "D - Psi" if self.config.literal_dhat_sign else "D + Psi",
            "grid": {str(r): {"shape": list(f.grid.shape), "h": f.h} for r, f in sorted(self._fields.items())},
        }
        return CheckReport(
            version=VERSION,
            seed=self.config.seed,
            environment=environment,
            config=self.config.model_dump(mode="json"),
            checks=self.records,
            convergence=self.rows,
            passed=all(r.passed for r in self.records),
        )

    # ----- suites -----

    def _suite_algebra(self, rng: np.random.Generator) -> None:
        """Clifford relations for several dimensions, operator identities at the configured one."""
        for d in sorted(set(self.ALGEBRA_DIMENSIONS) | {self.n}):
            rep = build_rep(d)
            flat = conjugate_rep(rep)
            I = rep.identity
            g = rep.gammas
            anti = np.einsum("iab,jbc->ijac", g, g) + np.einsum("jab,ibc->ijac", g, g)
            anti += 2 * np.einsum("ij,ac->ijac", np.eye(d), I)
            eps = rep.grading
            swap = -1 if rep.parity == "even" else 1
            defect = max(
                np.max(np.abs(anti)),
                np.max(np.abs(g + np.conj(np.swapaxes(g, 1, 2)))),
                np.max(np.abs(eps @ eps - I)),
                np.max(np.abs(eps - eps.conj().T)),
                np.max(np.abs(np.einsum("ab,ibc->iac", eps, g) - swap * np.einsum("iab,bc->iac", g, eps))),
            )
            self._record("algebra", "clifford-relations", defect, self.tol.algebra, dimension=d)

            X, Y = rng.normal(size=d), rng.normal(size=d)
            a, b = rng.normal(size=2)
            wX, wY = omega_matrix(flat, X), omega_matrix(flat, Y)
            defect = max(
                np.max(np.abs(wX - wX.conj().T)),
                np.max(np.abs(wX @ wX - (X @ X) * I)),
                np.max(np.abs(omega_matrix(flat, a * X + b * Y) - a * wX - b * wY)),
            )
            self._record("algebra", "omega-matrix", defect, self.tol.algebra, dimension=d)

        rep, flat = build_pair(self.n)
        anti, vanish, bound_margin = 0.0, 0.0, np.inf
        for _ in range(self.config.algebra_draws):
            nu, tangent, w, N, dN = random_boundary_draw(self.n, rng)
            anti = max(anti, anticommutator_residual(rep, flat, nu, tangent, w, N, dN))

            Y = rng.normal(size=self.n)
            Y -= (Y @ N) * N
            Y /= np.linalg.norm(Y)
            v = tangent @ rng.normal(size=self.n - 1)
            bops = assemble_boundary(rep, flat, nu, tangent, w, N, dN)
            sigma = chi_projector(bops.chi[0]) @ random_in(np.eye(rep.m ** 2), rng)
            vanish = max(vanish, *chi_eigenspace_vanishing(rep, flat, nu, N, Y, v, sigma))

            H = float(rng.normal())
            value, bound = a_operator_bound(rep, flat, H, nu, tangent, N, dN, sigma)
            bound_margin = min(bound_margin, value - bound)

        draws = self.config.algebra_draws
        self._record("algebra", "chi-anticommute", anti, self.tol.operator, dimension=self.n, draws=draws)
        self._record("algebra", "chi-vanishing", vanish, self.tol.operator, dimension=self.n, draws=draws)
        self._record("algebra", "a-operator-bound", bound_margin, -self.tol.operator, ">=",
                     dimension=self.n, draws=draws)

    def _suite_dec(self, rng: np.random.Generator) -> None:
        """Finite-difference constraint densities against closed form, then the energy condition."""
        hs, err_mu, err_J = [], [], []
        for res in self.resolutions:
            fields = self.fields(res)
            if fields.source is None:
                break
            fd = constraint_densities(fields, "grid")
            exact = constraint_densities(fields, "analytic")
            hs.append(fields.h)
            err_mu.append(float(np.max(np.abs(fd.mu - exact.mu))))
            err_J.append(float(np.max(np.abs(fd.J - exact.J))))
            logger.info("dec: resolution %d, |mu err| %.3e, |J err| %.3e", res, err_mu[-1], err_J[-1])
        if hs:
            self._table("constraints-mu", hs, err_mu)
            self._table("constraints-J", hs, err_J)
            ok, detail = self._convergence({"mu": err_mu, "J": err_J}, self.tol.order, self.tol.fd)
            self._record("dec", "constraints", max(err_mu[-1], err_J[-1]), self.tol.fd, passed=ok,
                         detail=detail, h=hs[-1])

        fields = self.fields()
        report = dec_report(constraint_densities(fields, self.method(fields)), tol=self.tol.dec)
        self._record("dec", "dec", report.margin, -self.tol.dec, ">=", location=report.location,
                     detail=f"{len(report.violations)} violating nodes listed",
                     max_abs_mu=report.max_abs_mu, max_abs_J=report.max_abs_J, violations=report.violations)

    def _suite_faces(self, rng: np.random.Generator) -> None:
        """Tilted condition and null expansions per face, matching angles along edges."""
        fields = self.fields()
        method = self.method(fields)
        for face in range(self.poly.face_count):
            quad = self.poly.face_quadrature(face, self.FACE_RESOLUTION)
            fg = face_geometry(fields, self.poly, face, quad.points, self.n0, method)
            worst = int(np.argmin(fg.tilted_margin))
            self._record("faces", "tilt-dec", fg.tilted_margin[worst], -self.tol.dec, ">=",
                         location=quad.points[worst], face=face, theta=math.acos(max(-1.0, min(1.0, fg.cos_theta))))
            plus = null_expansion(fg.surface, 1)
            minus = null_expansion(fg.surface, -1)
            self._record("faces", "null-expansion", float(np.min(plus)), comparison="info", face=face,
                         min_plus=float(np.min(plus)), min_minus=float(np.min(minus)))

        edges = edge_points(self.poly)
        if len(edges):
            res = matching_angle_residual(fields, self.poly, edges, method)
            worst = int(np.argmax(np.abs(res)))
            self._record("faces", "matching-angle", abs(float(res[worst])), self.tol.pointwise,
                         location=edges[worst], samples=len(edges))

    def _suite_smoothing(self, rng: np.random.Generator) -> None:
        """Distance to the smoothed body, containment, and the smoothed Gauss map at face centers."""
        lambdas = sorted(self.config.lambdas)
        directions = self.poly.ray_directions(self.RAY_COUNT, seed=self.config.seed)
        gaps = [self.poly.hausdorff_to_levelset(lam, directions) for lam in lambdas]
        self._table("smoothing-hausdorff", [1.0 / lam for lam in lambdas], gaps)
        monotone = all(b < a for a, b in zip(gaps[:-1], gaps[1:]))
        self._record("smoothing", "smoothing-hausdorff", gaps[-1], passed=monotone,
                     detail="strictly decreasing" if monotone else "not monotone", gaps=gaps, lambdas=lambdas)

        lo, hi = self.poly.bbox
        samples = lo + rng.random((self.CONTAINMENT_SAMPLES, self.n)) * (hi - lo)
        bad = 0
        for lam in lambdas:
            inside = self.poly.log_levelset(lam, samples) <= 0
            outside = np.any(self.poly.values(samples) > 1e-12, axis=-1)
            bad += int(np.count_nonzero(inside & outside))
        self._record("smoothing", "smoothing-containment", bad, 0, samples=self.CONTAINMENT_SAMPLES)

        lam = lambdas[-1]
        err, where = 0.0, None
        for face in range(self.poly.face_count):
            try:
                quad = self.poly.face_quadrature(face, 2)
            except DomainError:
                continue
            center = quad.weights @ quad.points / quad.weights.sum()
            e = float(np.linalg.norm(self.poly.smoothed_gauss(lam, center) - self.poly.normals[face]))
            if e >= err:
                err, where = e, center
        if where is not None:
            self._record("smoothing", "smoothed-gauss", err, self.tol.gauss, location=where, smoothing=lam)

    def _sl_domain(self) -> Polyhedron:
        if self.poly.is_box():
            return self.poly
        logger.info("sl: %s is not a box, using its bounding box", self.poly.name)
        return box(self.poly.bbox[0], self.poly.bbox[1])

    def _suite_sl(self, rng: np.random.Generator) -> None:
        """Integrated identity over the resolution ladder and the inequality for boundary-projected draws."""
        if self.n % 2:
            self._record("sl", "sl", None, comparison="info", detail="integrated identity needs even n")
            return
        domain = self._sl_domain()
        literal = self.config.literal_dhat_sign
        rep, _ = build_pair(self.n)
        section = PolynomialSection.random(self.n, rep.m ** 2, rng, degree=2, center=domain.center)
        hs, rel = [], []
        for res in self.resolutions:
            fields = self.fields(res)
            report = verify_sl(fields, domain, section, self.n0, res, method=self.method(fields), literal_sign=literal)
            hs.append(report.h)
            rel.append(abs(report.relative))
        self._table("sl", hs, rel)
        ok, detail = self._convergence({"relative residual": rel}, self.tol.order, self.tol.sl)
        self._record("sl", "sl", rel[-1], self.tol.sl, passed=ok, detail=detail, h=hs[-1],
                     bulk_integral=report.bulk_integral, conventions=report.conventions)

        res = self.resolutions[0]
        fields = self.fields(res)
        worst, factor_min, defect = np.inf, np.inf, 0.0
        for _ in range(self.config.sl_draws):
            draw = PolynomialSection.random(self.n, rep.m ** 2, rng, degree=2, center=domain.center)
            out = verify_sl_inequality(fields, domain, draw, self.n0, res, method=self.method(fields),
                                       literal_sign=literal)
            worst = min(worst, out.margin + out.tolerance)
            factor_min = min(factor_min, out.boundary_factor_min)
            defect = max(defect, out.chi_defect)
        self._record("sl", "sl-inequality", worst, 0.0, ">=", draws=self.config.sl_draws,
                     resolution=res, boundary_factor_min=factor_min, chi_defect=defect)

    def _segments(self, rng: np.random.Generator, count: int) -> list[tuple[np.ndarray, np.ndarray]]:
        lo, hi = self.poly.bbox
        inner_lo, inner_hi = lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)
        draw = lambda: inner_lo + rng.random(self.n) * (inner_hi - inner_lo)
        return [(draw(), draw()) for _ in range(count)]

    def _suite_transport(self, rng: np.random.Generator) -> None:
        """Oracle comparison, conservation drifts, closed-form gradient identities, capillary identity."""
        n, n0 = self.n, self.n0
        rep, flat = build_pair(n)

        unit = Grid.from_box(np.zeros(n), np.ones(n), 4)
        constant_q = preset_field("flat", {"q_scale": 1}, unit)
        start, end = np.full(n, 0.25), np.full(n, 0.25) + 0.5 * rng.random(n)
        S0 = random_unitary(rep.m, rng)
        traj = transport(constant_q, start, end, S0, self.TRANSPORT_ORACLE_STEPS, n0, method="analytic")
        oracle = exponential_oracle(n, np.eye(n), n0, end - start, S0, traj.t)
        self._record("transport", "transport-oracle", float(np.max(np.abs(traj.states - oracle))),
                     self.tol.operator, steps=self.TRANSPORT_ORACLE_STEPS)

        fields = self.fields()
        method = self.method(fields)
        c_plus = random_in(eigen_basis(flat, n0, 1), rng)
        c_minus = random_in(eigen_basis(flat, n0, -1), rng)
        segments = self._segments(rng, self.config.transport_segments)
        starts = [random_unitary(rep.m, rng) for _ in segments]
        steps = self.config.transport_steps
        drifts = {"c1": [], "c2": [], "c3": []}
        excess = -np.inf
        for k in steps:
            level = {"c1": 0.0, "c2": 0.0, "c3": 0.0}
            for (a, b), S in zip(segments, starts):
                traj = transport(fields, a, b, S, k, n0, method)
                drift = conserved_drift(traj, c_plus, c_plus, c_minus)
                for key in level:
                    level[key] = max(level[key], getattr(drift, key))
                excess = max(excess, drift.cauchy_schwarz)
            for key in drifts:
                drifts[key].append(level[key])
        for key, values in drifts.items():
            self._table(f"drift-{key}", [1.0 / k for k in steps], values)
        ok, detail = self._convergence(drifts, self.tol.transport_order, self.tol.drift)
        self._record("transport", "transport-conservation", max(v[-1] for v in drifts.values()), self.tol.drift,
                     passed=ok, detail=detail,
                     **{f"drift_{key}": values[-1] for key, values in drifts.items()})
        self._record("transport", "cauchy-schwarz", excess, self.tol.pointwise)

        a = rng.normal(size=n)
        family = KillingFamily(a=a / np.linalg.norm(a), kappa=1.0, s0=random_unitary(rep.m, rng), n0=n0)
        points = rng.random((self.KILLING_POINTS, n))
        wres = w_gradient_residual(family, points, c_plus)
        self._record("transport", "w-gradient", max(wres.df, wres.dW, wres.curl), self.tol.operator,
                     fd_df=wres.fd_df, fd_dW=wres.fd_dW)

        if n % 2:
            self._record("transport", "alignment", None, comparison="info", detail="rigid tuple needs even n")
            self._record("transport", "capillary", None, comparison="info", detail="rigid tuple needs even n")
            return

        (a0, b0), = self._segments(rng, 1)
        S_rigid = rigid_initial_state(n, n0, n0)
        traj = transport(fields, a0, b0, S_rigid, 4 * steps[-1], n0, method)
        self._record("transport", "alignment", alignment_residual(traj, c_plus), self.tol.alignment,
                     steps=4 * steps[-1])

        S = rigid_tuple(n)
        Y = rng.normal(size=n)
        Y -= (Y @ n0) * n0
        Y /= np.linalg.norm(Y)
        worst = 0.0
        for theta in (0.0, math.pi / 3, math.pi / 2):
            N = math.cos(theta) * n0 + math.sin(theta) * Y
            result = capillary_residual(S, N, N, n0, c_plus)
            worst = max(worst, result.residual)
        self._record("transport", "capillary", worst, self.tol.pointwise, angles=[0.0, math.pi / 3, math.pi / 2])

    def _suite_rigidity(self, rng: np.random.Generator) -> None:
        """Rigidity residuals with e_n the normal of N0, then boundary identities per face."""
        hs, scans = [], []
        for res in self.resolutions:
            fields = self.fields(res)
            hs.append(fields.h)
            scans.append(rigidity_scan(fields, self.n0, "grid").as_dict())
        keys = [k for k in scans[0] if k != "rhat_mixed_opposite"]
        series = {key: [s[key] for s in scans] for key in keys}
        for key, values in series.items():
            self._table(f"rigidity-{key}", hs, values)
        ok, detail = self._convergence(series, self.tol.order, self.tol.fd)
        self._record("rigidity", "rigidity-residuals", max(scans[-1][k] for k in keys), self.tol.fd,
                     passed=ok, detail=detail, **scans[-1])

        coarse = self.fields(self.resolutions[0])
        if coarse.source is not None:
            exact = rigidity_scan(coarse, self.n0, "analytic").as_dict()
            self._record("rigidity", "rigidity-exact", max(exact[k] for k in keys), self.tol.pointwise, **exact)

        self._boundary_identities()

    def _boundary_identities(self) -> None:
        levels = [self.fields()] if self.config.method == "analytic" else [self.fields(r) for r in self.resolutions]
        identity, geodesic, hs = [], [], []
        where = None
        for fields in levels:
            method = self.method(fields)
            worst_id, worst_geo = 0.0, 0.0
            for face in range(self.poly.face_count):
                quad = self.poly.face_quadrature(face, self.FACE_RESOLUTION)
                out = boundary_2ff_residual(fields, self.poly, face, quad.points, self.n0, method)
                if out.identity >= worst_id:
                    worst_id, where = out.identity, (face, quad.points[0])
                if out.geodesic is not None:
                    worst_geo = max(worst_geo, out.geodesic)
            identity.append(worst_id)
            geodesic.append(worst_geo)
            hs.append(fields.h)
        if len(levels) > 1:
            self._table("boundary-2ff", hs, identity)
            self._table("boundary-geodesic", hs, geodesic)
        tol = self.tol.pointwise if len(levels) == 1 else self.tol.fd
        face, point = where
        ok, detail = self._convergence({"identity": identity}, self.tol.order, tol)
        self._record("rigidity", "boundary-2ff", identity[-1], tol, passed=ok, detail=detail,
                     location=point, face=face)
        ok, detail = self._convergence({"geodesic": geodesic}, self.tol.order, tol)
        self._record("rigidity", "boundary-geodesic", geodesic[-1], tol, passed=ok, detail=detail)

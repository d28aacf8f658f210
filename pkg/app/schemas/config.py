"""
Pydantic schemas for run configurations.
"""
from typing import Literal, Optional
import math
from pydantic import BaseModel, Field, field_validator, model_validator

SUITE_NAMES = ("algebra", "dec", "faces", "smoothing", "sl", "transport", "rigidity")


class PolyhedronSpec(BaseModel):
    """
    Polyhedron given by a preset or by half-space rows.

    Attributes:
        preset: "cube", "box", "simplex", "prism" or "domain" (the default
            coordinate box of the field preset)
        side: Edge length for "cube"
        origin: Lower corner for "cube"
        lo: Lower corner for "box"
        hi: Upper corner for "box"
        height: Height for "prism"
        rows: Half-space rows [a_1, ..., a_n, b] meaning <a, x> + b <= 0
    """
    preset: Optional[Literal["cube", "box", "simplex", "prism", "domain"]] = None
    side: float = Field(1.0, gt=0, description="Cube edge length")
    origin: Optional[list[float]] = None
    lo: Optional[list[float]] = None
    hi: Optional[list[float]] = None
    height: float = Field(1.0, gt=0, description="Prism height")
    rows: Optional[list[list[float]]] = None

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.rows is None):
            raise ValueError("polyhedron: give exactly one of 'preset' or 'rows'")
        if self.preset == "box" and (self.lo is None or self.hi is None):
            raise ValueError("polyhedron: preset 'box' needs 'lo' and 'hi'")
        return self


class FieldSpec(BaseModel):
    """
    Initial data set: a named preset with parameters, or a grid file.

    Attributes:
        preset: flat, hyperbolic_uhs, minkowski_graph, conformal, product or custom
        params: Preset parameters (expressions as strings)
        grid_file: Path of a grid file; replaces the preset and fixes the resolution
        margin_cells: Grid cells added around the polyhedron's bounding box
    """
    preset: str = Field("flat", description="Field preset name")
    params: dict = Field(default_factory=dict, description="Preset parameters")
    grid_file: Optional[str] = None
    margin_cells: int = Field(3, ge=0)

    class Config:
        extra = "forbid"


class ToleranceSpec(BaseModel):
    """
    Thresholds used by the suites.

    Attributes:
        algebra: Exact matrix identities
        operator: Operator identities at a point (anticommutators, eigenspaces)
        pointwise: Closed-form pointwise residuals
        dec: Allowed negative dominant energy margin
        sl: Relative residual of the integrated identity at the finest level
        order: Minimal observed order of second-order discretisations
        transport_order: Minimal observed order of transport drifts
        drift: Absolute drift accepted without an order study
        gauss: Smoothed Gauss map against face normals
        fd: Absolute grid residual accepted without an order study
        alignment: f psi - G c(W) psi along a transported rigid state
    """
    algebra: float = 1e-12
    operator: float = 1e-10
    pointwise: float = 1e-10
    dec: float = 1e-8
    sl: float = 1e-3
    order: float = 1.7
    transport_order: float = 3.5
    drift: float = 1e-10
    gauss: float = 1e-6
    fd: float = 1e-10
    alignment: float = 1e-8

    class Config:
        extra = "forbid"


class RunConfig(BaseModel):
    """
    A complete run configuration.

    Attributes:
        dimension: Ambient dimension n
        parity_mode: "even" or "odd"; must match the dimension when given
        polyhedron: Domain
        initial_data: Field preset or grid file
        resolutions: Grid resolutions, strictly increasing
        lambdas: Smoothing parameters
        n0: Unit direction N0 (defaults to the first coordinate axis)
        suites: Suite names or "all"
        method: Jet source for pointwise checks ("analytic" or "grid")
        seed: Seed of every randomized draw
        output: Report directory
        sl_draws: Random boundary-projected draws for the integrated inequality
        algebra_draws: Random frames for operator identities
        transport_steps: Step counts of the transport refinement study
        transport_segments: Random segments per transport study
        literal_dhat_sign: Use Dhat = D - Psi instead of D + Psi in the sl suite
        tolerances: Thresholds
    """
    dimension: int = Field(..., ge=2, le=8, description="Ambient dimension n")
    parity_mode: Optional[Literal["even", "odd"]] = None
    polyhedron: PolyhedronSpec = Field(default_factory=lambda: PolyhedronSpec(preset="domain"))
    initial_data: FieldSpec = Field(default_factory=FieldSpec)
    resolutions: list[int] = Field(default_factory=lambda: [8, 16, 32])
    lambdas: list[float] = Field(default_factory=lambda: [8.0, 16.0, 32.0, 64.0])
    n0: Optional[list[float]] = None
    suites: list[str] = Field(default_factory=lambda: ["all"])
    method: Literal["analytic", "grid"] = "analytic"
    seed: int = 0
    output: Optional[str] = None
    sl_draws: int = Field(20, ge=1)
    algebra_draws: int = Field(50, ge=1)
    transport_steps: list[int] = Field(default_factory=lambda: [16, 32, 64])
    transport_segments: int = Field(3, ge=1)
    literal_dhat_sign: bool = False
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)

    class Config:
        extra = "forbid"
        json_schema_extra = {
            "example": {
                "dimension": 3,
                "polyhedron": {"preset": "domain"},
                "initial_data": {"preset": "hyperbolic_uhs", "params": {}},
                "resolutions": [16, 32, 64],
                "n0": [0.0, 0.0, 1.0],
                "suites": ["dec", "faces", "rigidity"],
                "seed": 7,
            }
        }

    @field_validator("resolutions", "transport_steps")
    @classmethod
    def _strictly_increasing(cls, values: list[int]) -> list[int]:
        if not values:
            raise ValueError("must not be empty")
        if any(v < 2 for v in values):
            raise ValueError("entries must be at least 2")
        if any(b <= a for a, b in zip(values[:-1], values[1:])):
            raise ValueError("must be strictly increasing")
        return values

    @field_validator("lambdas")
    @classmethod
    def _positive(cls, values: list[float]) -> list[float]:
        if not values or any(v <= 0 for v in values):
            raise ValueError("smoothing parameters must be positive")
        return values

    @field_validator("suites")
    @classmethod
    def _known_suites(cls, values: list[str]) -> list[str]:
        unknown = [v for v in values if v != "all" and v not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suite(s) {unknown}; valid: {list(SUITE_NAMES) + ['all']}")
        return values

    @model_validator(mode="after")
    def _consistent(self):
        n = self.dimension
        expected = "even" if n % 2 == 0 else "odd"
        if self.parity_mode is not None and self.parity_mode != expected:
            raise ValueError(f"parity_mode: {self.parity_mode!r} does not match dimension {n}")
        if self.n0 is not None:
            if len(self.n0) != n:
                raise ValueError(f"n0: expected {n} components, got {len(self.n0)}")
            norm = math.sqrt(sum(v * v for v in self.n0))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"n0: must be a unit vector (|n0| = {norm:.6g})")
        return self

    @property
    def enabled_suites(self) -> list[str]:
        if "all" in self.suites:
            return list(SUITE_NAMES)
        return [s for s in SUITE_NAMES if s in self.suites]

    @property
    def direction(self) -> list[float]:
        if self.n0 is not None:
            return list(self.n0)
        return [1.0] + [0.0] * (self.dimension - 1)

"""
Tests for the suite runner.
"""
import numpy as np
import pytest

from app.schemas import RunConfig
from app.services.errors import ConfigError
from app.services.reporting import failed_checks, report_body
from app.services.suites import SuiteRunner, build_polyhedron, edge_points


def config(**overrides):
    base = {
        "dimension": 3,
        "polyhedron": {"preset": "cube"},
        "initial_data": {"preset": "flat", "params": {}, "margin_cells": 2},
        "resolutions": [4, 8],
        "suites": ["faces"],
    }
    base.update(overrides)
    return RunConfig.model_validate(base)


def names(report):
    return [c.name for c in report.checks]


def test_flat_cube_passes():
    report = SuiteRunner(config(suites=["dec", "faces", "smoothing"])).run()
    assert report.passed, [c for c in failed_checks(report)]
    assert {"constraints", "dec", "tilt-dec", "null-expansion", "matching-angle", "smoothing-hausdorff",
            "smoothing-containment", "smoothed-gauss"} <= set(names(report))
    assert names(report).count("tilt-dec") == 6
    assert report.environment["dimension"] == 3
    assert report.environment["polyhedron"].startswith("cube")
    assert any(row.check == "constraints-mu" for row in report.convergence)


def test_tilted_violation_fails_faces_suite():
    """Test: q = -delta/2 with N0 = e1 violates the tilted condition"""
    cfg = config(initial_data={"preset": "flat", "params": {"q_scale": -0.5}}, n0=[1.0, 0.0, 0.0])
    report = SuiteRunner(cfg).run()
    assert not report.passed
    failed = failed_checks(report)
    assert {c.name for c in failed} == {"tilt-dec"}
    assert min(c.value for c in failed) == pytest.approx(-1.0)
    assert all(c.comparison == ">=" for c in failed)


def test_same_seed_same_report():
    cfg = config(suites=["algebra", "smoothing"], dimension=2, polyhedron={"preset": "cube"}, algebra_draws=3, seed=5)
    first, second = SuiteRunner(cfg).run(), SuiteRunner(cfg).run()
    assert report_body(first) == report_body(second)


def test_suite_draws_do_not_depend_on_other_suites():
    both = SuiteRunner(config(suites=["algebra", "smoothing"], dimension=2, algebra_draws=3)).run()
    alone = SuiteRunner(config(suites=["smoothing"], dimension=2)).run()
    pick = lambda report: [c for c in report.checks if c.suite == "smoothing"]
    assert pick(both) == pick(alone)


def test_algebra_suite():
    report = SuiteRunner(config(suites=["algebra"], dimension=4, algebra_draws=5)).run()
    assert report.passed
    assert names(report).count("clifford-relations") == 5
    assert {"chi-anticommute", "chi-vanishing", "a-operator-bound"} <= set(names(report))


def test_transport_suite_on_flat_data():
    cfg = config(suites=["transport"], dimension=2, transport_steps=[8, 16], transport_segments=2)
    report = SuiteRunner(cfg).run()
    assert report.passed, [c for c in failed_checks(report)]
    assert {"transport-oracle", "transport-conservation", "cauchy-schwarz", "w-gradient", "alignment",
            "capillary"} <= set(names(report))


def test_odd_dimension_reports_info():
    cfg = config(suites=["sl"], dimension=3)
    report = SuiteRunner(cfg).run()
    assert report.passed
    assert report.checks[0].comparison == "info"


def test_sl_suite():
    cfg = config(suites=["sl"], dimension=2, initial_data={"preset": "flat", "params": {"q_scale": 0.3}},
                 resolutions=[8, 16], sl_draws=2)
    report = SuiteRunner(cfg).run()
    assert report.passed, [c for c in failed_checks(report)]
    assert names(report) == ["sl", "sl-inequality"]
    assert report.environment["dhat"] == "D + Psi"
    sl, inequality = report.checks
    assert sl.params["conventions"]["Dhat"] == "D + Psi"
    assert "relative residual: " in sl.detail
    assert inequality.params["chi_defect"] <= 1e-10


def test_literal_dhat_sign_is_reported():
    cfg = config(suites=["sl"], dimension=2, initial_data={"preset": "flat", "params": {"q_scale": 0.3}},
                 resolutions=[8, 16], sl_draws=1, literal_dhat_sign=True)
    report = SuiteRunner(cfg).run()
    assert report.environment["dhat"] == "D - Psi"
    assert report.checks[0].params["conventions"]["Dhat"] == "D - Psi"


def test_rigidity_suite_on_hyperbolic_data():
    """Test: hyperbolic space with q = g is rigid: residuals vanish at the finite-difference order"""
    cfg = config(suites=["rigidity"], polyhedron={"preset": "domain"},
                 initial_data={"preset": "hyperbolic_uhs", "params": {}}, resolutions=[8, 16], n0=[0, 0, 1])
    report = SuiteRunner(cfg).run()
    assert report.passed, [c for c in failed_checks(report)]
    assert report.environment["polyhedron"] == "domain(hyperbolic_uhs)"
    assert {"rigidity-residuals", "rigidity-exact", "boundary-2ff", "boundary-geodesic"} <= set(names(report))
    residuals = next(c for c in report.checks if c.name == "rigidity-residuals")
    assert "not converging" not in residuals.detail
    assert "observed order" in residuals.detail or "within tolerance" in residuals.detail


def test_suite_errors_become_failed_records():
    cfg = config(suites=["faces"], dimension=4, polyhedron={"preset": "simplex"}, resolutions=[2, 4])
    report = SuiteRunner(cfg).run()
    assert not report.passed
    assert report.checks[-1].name == "faces"
    assert "DomainError" in report.checks[-1].detail


def test_polyhedron_dimension_mismatch():
    with pytest.raises(ConfigError):
        SuiteRunner(config(dimension=4, polyhedron={"preset": "prism"}))
    with pytest.raises(ConfigError):
        build_polyhedron(config(polyhedron={"preset": "box", "lo": [0, 0], "hi": [1, 1]}))
    with pytest.raises(ConfigError):
        build_polyhedron(config(polyhedron={"rows": [[1, 0, 0]]}))


def test_edge_points_of_cube():
    points = edge_points(build_polyhedron(config()))
    assert points.shape == (12, 3)
    assert np.all(np.sum((points == 0) | (points == 1), axis=1) == 2)

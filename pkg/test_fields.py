"""
Tests for grid-sampled initial data sets and their presets.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.services.errors import ConfigError, DomainError, GeometryError
from app.services.fields import (
    FieldSet, Grid, default_domain, load_grid_file, preset_field, preset_source, save_grid_file,
)


@pytest.fixture
def unit_grid():
    return Grid.from_box([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], 8, margin_cells=2)


def test_grid_from_box():
    grid = Grid.from_box([0.0, 1.0], [1.0, 3.0], 4, margin_cells=1)
    assert grid.shape == (7, 7)
    assert_allclose(grid.origin, [-0.25, 0.5])
    assert_allclose(grid.spacing, [0.25, 0.5])
    assert grid.h == pytest.approx(0.5)
    assert_allclose(grid.upper, [1.25, 3.5])
    assert grid.points().shape == (49, 2)
    assert_allclose(grid.contains([[0.0, 1.0], [1.3, 1.0]]), [True, False])


@pytest.mark.parametrize("resolution, lo, hi", [(1, [0, 0], [1, 1]), (4, [0, 0], [1, 0])])
def test_grid_rejects_bad_boxes(resolution, lo, hi):
    with pytest.raises(ConfigError):
        Grid.from_box(lo, hi, resolution)


def test_flat_preset(unit_grid):
    fields = preset_field("flat", {"q_scale": 0.5}, unit_grid)
    assert fields.n == 3
    assert_allclose(fields.g[2, 3, 4], np.eye(3))
    assert_allclose(fields.q[2, 3, 4], 0.5 * np.eye(3))
    assert fields.source is not None


def test_flat_preset_with_matrix_and_extra(unit_grid):
    q = [[1, 2, 0], [2, 0, 0], [0, 0, 3]]
    fields = preset_field("flat", {"q_matrix": q, "q_extra": [["x1", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]]},
                          unit_grid)
    x = unit_grid.points()[17]
    expected = np.array(q, dtype=float)
    expected[0, 0] += x[0]
    assert_allclose(fields.source.tensor_q(x)[0], expected, atol=1e-14)


def test_hyperbolic_preset():
    lo, hi = default_domain("hyperbolic_uhs", 3)
    assert_allclose(lo, [0, 0, 2])
    assert_allclose(hi, [1, 1, 3])
    grid = Grid.from_box(lo, hi, 4, margin_cells=1)
    fields = preset_field("hyperbolic_uhs", {}, grid)
    x3 = grid.points()[:, 2].reshape(grid.shape)
    assert_allclose(fields.g[..., 0, 0], x3 ** -2)
    assert_allclose(fields.q, fields.g)


def test_hyperbolic_sign():
    grid = Grid.from_box([0, 2], [1, 3], 4)
    fields = preset_field("hyperbolic_uhs", {"sign": -1}, grid)
    assert_allclose(fields.q, -fields.g)


def test_minkowski_graph_must_be_spacelike(unit_grid):
    with pytest.raises(DomainError):
        preset_field("minkowski_graph", {"f": "2*x1"}, unit_grid)


def test_minkowski_graph_metric(unit_grid):
    fields = preset_field("minkowski_graph", {"f": "0.3*x1"}, unit_grid)
    assert_allclose(fields.g[0, 0, 0], np.diag([1 - 0.09, 1, 1]))
    assert_allclose(fields.q, 0.0, atol=1e-14)


def test_product_preset_rejects_x1_dependence(unit_grid):
    with pytest.raises(ConfigError):
        preset_field("product", {"phi": "x1*x2"}, unit_grid)


@pytest.mark.parametrize(
    "name, params",
    [
        ("nonexistent", {}),
        ("custom", {"g": [["1", "0"], ["0", "1"]]}),
        ("custom", {"g": [["1", "x2"], ["0", "1"]], "q": [["0", "0"], ["0", "0"]]}),
        ("custom", {"g": [["1", "y"], ["y", "1"]], "q": [["0", "0"], ["0", "0"]]}),
        ("custom", {"g": [["1"]], "q": [["0"]]}),
        ("conformal", {"phi": "sin("}),
    ],
)
def test_bad_presets(name, params):
    with pytest.raises(ConfigError):
        preset_source(name, params, 2)


def test_degenerate_metric():
    grid = Grid.from_box([0, 0], [1, 1], 4)
    with pytest.raises(GeometryError):
        preset_field("custom", {"g": [["x1", "0"], ["0", "1"]], "q": [["0", "0"], ["0", "0"]]}, grid)


def test_field_set_shape_check(unit_grid):
    with pytest.raises(ConfigError):
        FieldSet(grid=unit_grid, g=np.zeros((2, 2, 3, 3)), q=np.zeros((2, 2, 3, 3)), provenance="bad")


def test_grid_jets_exact_for_quadratics():
    """Test: second-order differences reproduce derivatives of quadratic fields exactly"""
    grid = Grid.from_box([0, 0], [1, 1], 6, margin_cells=1)
    fields = preset_field(
        "custom", {"g": [["1 + x1**2", "x1*x2/4"], ["x1*x2/4", "2 + x2**2"]], "q": [["x1*x2", "0"], ["0", "x2**2"]]},
        grid,
    )
    fd = fields.grid_jets()
    exact = fields.source.jets(fd.points)
    for name in ("g", "dg", "d2g", "q", "dq"):
        assert_allclose(getattr(fd, name), getattr(exact, name), atol=1e-10)


def test_jets_at_methods(unit_grid):
    fields = preset_field("conformal", {"phi": "0.1*x1*x2", "q_scale": 0.2}, unit_grid)
    x = np.array([[0.31, 0.52, 0.77], [0.5, 0.5, 0.5]])
    grid_jets = fields.jets_at(x, "grid")
    exact = fields.jets_at(x, "analytic")
    assert_allclose(grid_jets.g, exact.g, atol=5e-3)
    assert_allclose(grid_jets.q, exact.q, atol=1e-12)
    with pytest.raises(DomainError):
        fields.jets_at([[5.0, 0.5, 0.5]], "grid")
    with pytest.raises(ConfigError):
        fields.jets_at(x, "spline")


def test_interior_index(unit_grid):
    fields = preset_field("flat", {}, unit_grid)
    index = fields.interior_index(2)
    assert len(index) == 9 ** 3
    with pytest.raises(DomainError):
        fields.interior_index(7)


def test_grid_file(tmp_path):
    grid = Grid.from_box([0, 0], [1, 1], 3, margin_cells=1)
    fields = preset_field("conformal", {"phi": "0.1*x1", "q_scale": 0.3}, grid)
    path = tmp_path / "field.txt"
    save_grid_file(fields, path)
    loaded = load_grid_file(path)
    assert loaded.source is None
    assert loaded.grid.shape == grid.shape
    assert_allclose(loaded.g, fields.g)
    assert_allclose(loaded.q, fields.q)
    with pytest.raises(DomainError):
        loaded.jets_at([[0.5, 0.5]], "analytic")


def test_grid_file_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a grid\n")
    with pytest.raises(ConfigError):
        load_grid_file(path)


def test_grid_file_non_numeric_record(tmp_path):
    """Test: a corrupted record is reported with its line number"""
    fields = preset_field("flat", {}, Grid.from_box([0, 0], [1, 1], 2))
    path = tmp_path / "field.txt"
    save_grid_file(fields, path)
    lines = path.read_text().splitlines()
    lines[5] = " ".join(["abc"] * len(lines[5].split()))
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ConfigError, match=r"field\.txt:6: non-numeric"):
        load_grid_file(path)

    lines[5] = "1.0 2.0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ConfigError, match=r":6: expected 6 values"):
        load_grid_file(path)

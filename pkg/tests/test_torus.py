import json

import numpy as np
import pytest

from cmfib.errors import DomainError, SolvabilityError
from cmfib.torus import TorusField, TorusGrid, laplacian, poisson_solve, read_field, write_field

TWO_PI = 2 * np.pi


@pytest.mark.parametrize("N", [4, 7, 12, 0])
def test_grid_rejects_bad_sizes(N):
    with pytest.raises(DomainError):
        TorusGrid(N)


def test_field_validation():
    g = TorusGrid(8)
    with pytest.raises(DomainError):
        TorusField(g, np.zeros((8, 9)))
    bad = np.zeros((8, 8))
    bad[2, 3] = np.nan
    with pytest.raises(DomainError):
        TorusField(g, bad)


def test_coordinates_are_y_major():
    g = TorusGrid(8)
    X, Y = g.coords()
    assert X[0, 1] == pytest.approx(1 / 8) and Y[0, 1] == 0
    assert Y[1, 0] == pytest.approx(1 / 8) and X[1, 0] == 0


def test_laplacian_of_constant_is_zero():
    u = TorusField(TorusGrid(16), np.full((16, 16), 3.7))
    assert laplacian(u).max_abs() == 0


@pytest.mark.parametrize("N", [32, 64, 128])
def test_laplacian_eigenfunction(N):
    g = TorusGrid(N)
    u = TorusField.from_function(g, lambda x, y: np.cos(TWO_PI * x))
    lap = laplacian(u).values
    exact = -4 * np.pi**2 * u.values
    # symbol (2 cos(2 pi h) - 2)/h^2 = -4 pi^2 (1 - pi^2 h^2 / 3 + ...)
    assert np.max(np.abs(lap - exact)) <= 4 * np.pi**2 * (np.pi**2 / 3) * g.h**2 * 1.01


def test_laplacian_has_zero_mean():
    rng = np.random.default_rng(0)
    for N in (8, 64, 256):
        u = TorusField(TorusGrid(N), rng.normal(size=(N, N)))
        assert abs(laplacian(u).mean()) < 1e-12 * N**2


def test_poisson_zero_and_inverse():
    g = TorusGrid(64)
    assert poisson_solve(TorusField.zeros(g)).max_abs() == 0
    rhs = TorusField.from_function(g, lambda x, y: -4 * np.pi**2 * np.cos(TWO_PI * x))
    u = poisson_solve(rhs)
    cos = np.cos(TWO_PI * g.coords()[0])
    assert np.max(np.abs(u.values - cos)) < 2 * (np.pi**2 / 3) * g.h**2
    assert abs(u.mean()) < 1e-14


def test_poisson_is_exact_inverse_of_stencil():
    rng = np.random.default_rng(1)
    g = TorusGrid(32)
    v = rng.normal(size=(32, 32))
    v -= v.mean()
    u = TorusField(g, v)
    back = poisson_solve(laplacian(u))
    assert np.max(np.abs(back.values - v)) < 1e-11


def test_poisson_rejects_nonzero_mean():
    with pytest.raises(SolvabilityError):
        poisson_solve(TorusField(TorusGrid(16), np.ones((16, 16))))


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    field = TorusField(TorusGrid(16), rng.normal(size=(16, 16)) * 1e-3)
    path = tmp_path / "phi.csv"
    write_field(path, field, "phi")
    assert json.loads((tmp_path / "phi.json").read_text()) == {"N": 16, "field": "phi"}
    lines = path.read_text().splitlines()
    assert len(lines) == 16 and all(len(line.split(",")) == 16 for line in lines)
    back = read_field(path)
    assert np.array_equal(back.values, field.values)


def test_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(DomainError):
        read_field(path)
    path.write_text("\n".join(",".join(["0"] * 8) for _ in range(8)))
    (tmp_path / "bad.json").write_text('{"N": 16, "field": "x"}')
    with pytest.raises(DomainError, match="header"):
        read_field(path)

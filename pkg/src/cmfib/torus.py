"""Scalar fields on the flat unit torus and their periodic finite differences.

Arrays are indexed ``values[j, i]`` with ``x = i h`` and ``y = j h``, so a
CSV row is a line of constant ``y`` (row-major, y-major).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cmfib.errors import DomainError, SolvabilityError

SOLVABILITY_TOL = 1e-10


@dataclass(frozen=True)
class TorusGrid:
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 8 or self.N & (self.N - 1):
            raise DomainError(f"grid size must be a power of two >= 8, got {self.N!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid ``(X, Y)`` with ``X[j, i] = i h`` and ``Y[j, i] = j h``."""
        t = np.arange(self.N) * self.h
        return np.meshgrid(t, t, indexing="xy")

    def laplacian_symbol(self) -> np.ndarray:
        """Eigenvalues of the 5-point Laplacian on the FFT modes, shape (N, N)."""
        theta = 2 * np.pi * np.fft.fftfreq(self.N)
        one_d = (2 * np.cos(theta) - 2) / self.h**2
        return one_d[:, None] + one_d[None, :]


@dataclass(frozen=True, eq=False)
class TorusField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.N, self.grid.N):
            raise DomainError(f"field shape {vals.shape} does not match grid N={self.grid.N}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field has non-finite entries")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> TorusField:
        return cls(grid, np.zeros((grid.N, grid.N)))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn) -> TorusField:
        X, Y = grid.coords()
        return cls(grid, np.broadcast_to(fn(X, Y), X.shape))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        return TorusField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return TorusField(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return TorusField(self.grid, self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return TorusField(self.grid, -self.values)


def _vals(x):
    return x.values if isinstance(x, TorusField) else x


def laplacian(u: TorusField) -> TorusField:
    """Periodic 5-point Laplacian."""
    a = u.values
    lap = (np.roll(a, 1, 0) + np.roll(a, -1, 0) + np.roll(a, 1, 1) + np.roll(a, -1, 1) - 4 * a)
    return TorusField(u.grid, lap / u.grid.h**2)


def poisson_solve(g: TorusField) -> TorusField:
    """Mean-zero ``u`` with 5-point ``Δu = g``, inverted exactly in Fourier space."""
    mean = g.mean()
    if abs(mean) > SOLVABILITY_TOL:
        raise SolvabilityError(
            f"Poisson data must integrate to zero on the torus; mean is {mean:.3e}"
        )
    sym = g.grid.laplacian_symbol()
    sym[0, 0] = 1.0
    ghat = np.fft.fft2(g.values)
    ghat[0, 0] = 0.0
    return TorusField(g.grid, np.fft.ifft2(ghat / sym).real)


def write_field(path: str | Path, field: TorusField, name: str = "field") -> None:
    """Write ``path`` as CSV plus a ``.json`` header sidecar next to it."""
    path = Path(path)
    lines = [",".join(format(x, ".17g") for x in row) for row in field.values]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    header = {"N": field.grid.N, "field": name}
    sidecar_path(path).write_text(json.dumps(header) + "\n", encoding="utf-8")


def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def read_field(path: str | Path) -> TorusField:
    path = Path(path)
    try:
        rows = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
        vals = np.array([[float(x) for x in line.split(",")] for line in rows])
    except ValueError as exc:
        raise DomainError(f"{path}: malformed CSV field ({exc})") from exc
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise DomainError(f"{path}: expected N rows of N values, got shape {vals.shape}")
    side = sidecar_path(path)
    if side.exists():
        header = json.loads(side.read_text(encoding="utf-8"))
        if header.get("N") != vals.shape[0]:
            raise DomainError(f"{path}: header says N={header.get('N')} but CSV has {vals.shape[0]} rows")
    return TorusField(TorusGrid(vals.shape[0]), vals)

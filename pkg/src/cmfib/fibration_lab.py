"""Twist form of an elliptic-curve family over a coordinate chart.

The chart is the rectangle ``[0, 1]^2`` in the base coordinate ``b = x + iy``
sampled like a :class:`~cmfib.torus.TorusGrid`; the family is
``Y_b = C / (Z + tau(b) Z)``.  Finite differences near the edge use a
one-point halo of extra samples just outside the rectangle, so every
sample gets a centred stencil.  Comparisons should still skip the edge
rows and columns, since nothing here is periodic.

Each fibre carries the flat unit-area metric, which is cscK with ``s = 0``.
The induced metric on ``K_{X/B}`` is ``Im tau`` and the twist form is

    a = -i d dbar log Im tau = (|tau'|^2 / (2 (Im tau)^2)) dx ^ dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cmfib.errors import DomainError, TauDomainError
from cmfib.tau_expr import TauExpr, evaluate, parse_tau
from cmfib.torus import TorusField, TorusGrid


@dataclass(frozen=True, eq=False)
class TauFamily:
    expr: TauExpr
    grid: TorusGrid
    fibre_grid: int = 64

    def __post_init__(self):
        if isinstance(self.expr, str):
            object.__setattr__(self, "expr", parse_tau(self.expr))
        if not isinstance(self.fibre_grid, int) or self.fibre_grid < 8:
            raise DomainError(f"fibre grid must be an integer >= 8, got {self.fibre_grid!r}")
        tau, _ = self.sample_padded()
        object.__setattr__(self, "_tau_padded", tau)

    def padded_points(self) -> np.ndarray:
        """Base points ``b`` on the grid plus a one-sample halo, shape (N+2, N+2)."""
        N, h = self.grid.N, self.grid.h
        t = (np.arange(N + 2) - 1) * h
        X, Y = np.meshgrid(t, t, indexing="xy")
        return X + 1j * Y

    def sample_padded(self) -> tuple[np.ndarray, np.ndarray]:
        tau, dtau = evaluate(self.expr, self.padded_points())
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(dtau))):
            raise TauDomainError("tau(b) is not finite on the sampled chart")
        worst = float(np.min(tau.imag))
        if worst <= 0:
            raise TauDomainError(f"Im tau(b) must be positive on the chart; minimum is {worst:.6g}")
        return tau, dtau

    @property
    def tau(self) -> np.ndarray:
        """``tau`` on the N x N chart samples."""
        return self._tau_padded[1:-1, 1:-1]


@dataclass(frozen=True)
class TwistForm:
    """``a = density * dx ^ dy``; ``potential`` satisfies ``density = Δ(potential)/2`` when known."""

    density: TorusField
    potential: Optional[TorusField] = None


def _interior_laplacian(padded: np.ndarray, h: float) -> np.ndarray:
    """5-point Laplacian at the inner points of an array padded by one sample."""
    return (padded[2:, 1:-1] + padded[:-2, 1:-1] + padded[1:-1, 2:] + padded[1:-1, :-2]
            - 4 * padded[1:-1, 1:-1]) / h**2


def weil_petersson_form(family: TauFamily) -> TwistForm:
    """``-i d dbar log Im tau`` by finite differences of ``log Im tau``."""
    log_im = np.log(family._tau_padded.imag)
    dens = -0.5 * _interior_laplacian(log_im, family.grid.h)
    grid = family.grid
    return TwistForm(TorusField(grid, dens), TorusField(grid, -log_im[1:-1, 1:-1]))


def weil_petersson_exact(family: TauFamily) -> TorusField:
    """Closed form ``|tau'|^2 / (2 (Im tau)^2)`` using the exact derivative of the expression."""
    tau, dtau = family.sample_padded()
    dens = np.abs(dtau) ** 2 / (2 * tau.imag**2)
    return TorusField(family.grid, dens[1:-1, 1:-1])


def cauchy_riemann_residual(family: TauFamily) -> float:
    """Max over the chart of ``|d_x tau + i d_y tau|`` by centred differences."""
    tau, h = family._tau_padded, family.grid.h
    dx = (tau[1:-1, 2:] - tau[1:-1, :-2]) / (2 * h)
    dy = (tau[2:, 1:-1] - tau[:-2, 1:-1]) / (2 * h)
    return float(np.max(np.abs(dx + 1j * dy)))


def _fibre_metric(tau: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``g_{w wbar}`` of the flat unit-area metric at fibre points ``w = u + tau v``.

    ``tau`` has shape (P, Q, 1) and the fibre coordinates broadcast against it.
    The lattice ``Z + tau Z`` has covolume ``Im tau``.
    """
    covolume = tau.imag
    return np.broadcast_to(1.0 / covolume, np.broadcast_shapes(tau.shape, u.shape, v.shape))


def _horizontal_part(curvature: np.ndarray) -> np.ndarray:
    # Product chart: the metric on K_{X/B} depends on b alone, so F is pulled
    # back from the base and F_H = F.
    return curvature


def fibre_average_a(family: TauFamily) -> TwistForm:
    """Fibrewise mean of ``i F_H`` for the curvature ``F`` of ``K_{X/B}``.

    At every fibre sample ``(u, v)`` the Hermitian metric on ``K_{X/B}`` is
    ``1 / g_{w wbar}``; its curvature density in the base direction is
    ``-Δ_b log(metric) / 2``.  The fibre mean is weighted by the fibre area
    form ``g_{w wbar} Im tau du dv``.  Rows of the fibre grid are reduced in a
    fixed order.
    """
    M, h = family.fibre_grid, family.grid.h
    tau = family._tau_padded[..., None]
    fib = np.arange(M) / M
    num = np.zeros((family.grid.N, family.grid.N))
    den = np.zeros_like(num)
    for u in fib:
        v = fib[None, None, :]
        g = _fibre_metric(tau, np.full_like(v, u), v)
        log_metric = -np.log(g)
        lap = (log_metric[2:, 1:-1] + log_metric[:-2, 1:-1] + log_metric[1:-1, 2:]
               + log_metric[1:-1, :-2] - 4 * log_metric[1:-1, 1:-1]) / h**2
        i_f = _horizontal_part(-0.5 * lap)
        weight = g[1:-1, 1:-1] * tau[1:-1, 1:-1].imag
        num += np.sum(i_f * weight, axis=-1)
        den += np.sum(weight, axis=-1)
    return TwistForm(TorusField(family.grid, num / den))


def alpha_from_twist(a: TwistForm) -> float:
    """Chart average of the density over ``2 pi``."""
    return a.density.mean() / (2 * math.pi)


def exactness_defect(a: TwistForm) -> float:
    """Interior max of ``|Δ(potential)/2 - density|``."""
    if a.potential is None:
        raise DomainError("twist form carries no potential")
    pot, h = a.potential.values, a.density.grid.h
    lap = _interior_laplacian(pot, h)
    return float(np.max(np.abs(0.5 * lap - a.density.values[1:-1, 1:-1])))

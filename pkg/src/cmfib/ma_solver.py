"""Twisted Monge-Ampere equation on a flat base torus.

The base carries the flat unit-area form ``w0 = dx ^ dy``.  A potential
``phi`` defines ``w = w0 + i dbar d phi``; in complex dimension one
``i dbar d phi = -(1/2) Δphi w0``, so the volume ratio is

    M(phi) = 1 - Δphi / 2

and ``rho(w) - a = lam w`` reduces to the scalar equation

    log M(phi) = lam phi - f,      (1/2) Δf = a + lam.

For ``lam < 0`` the linearisation ``-Δ/2 - lam`` is positive definite and
the solution is unique; for ``lam = 0`` it is unique up to constants and
needs ``mean(exp(-f)) = 1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from cmfib.errors import DensityCollapseError, DomainError, SolvabilityError
from cmfib.torus import SOLVABILITY_TOL, TorusField, TorusGrid, laplacian, poisson_solve

log = logging.getLogger(__name__)

CALABI_TOL = 1e-8
MAX_HALVINGS = 30
CG_RTOL = 1e-12


@dataclass(frozen=True)
class SolveConfig:
    lam: float
    tol: float = 1e-10
    max_newton: int = 50
    continuity_steps: int = 1
    damping: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam > 0:
            raise DomainError(f"lambda must be <= 0, got {self.lam}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_newton < 1:
            raise DomainError("max_newton must be >= 1")
        if self.continuity_steps < 1:
            raise DomainError("continuity_steps must be >= 1")
        if not 0 < self.damping <= 1:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")


@dataclass(frozen=True)
class SolveReport:
    phi: TorusField
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    min_density: float = float("nan")
    lam: float = 0.0

    def to_json(self) -> dict:
        return {
            "N": self.phi.grid.N,
            "lambda": self.lam,
            "converged": self.converged,
            "min_density": self.min_density,
            "newton_iterations": max(len(self.residual_history) - 1, 0),
            "final_residual": self.residual_history[-1] if self.residual_history else None,
            "residual_history": list(self.residual_history),
        }


def density(phi: TorusField) -> np.ndarray:
    """Volume ratio ``M(phi) = 1 - Δphi/2`` as a bare array."""
    return 1.0 - 0.5 * laplacian(phi).values


def _positive_density(phi: TorusField) -> np.ndarray:
    m = density(phi)
    if np.min(m) <= 0:
        raise DensityCollapseError(
            f"volume density 1 - Δphi/2 reaches {np.min(m):.3e}; the metric is not Kähler"
        )
    return m


def _residual(phi: TorusField, m: np.ndarray, f: np.ndarray, lam: float) -> np.ndarray:
    return np.log(m) - lam * phi.values + f


def untraced_residual(phi: TorusField, f: TorusField, lam: float) -> float:
    """Max norm of ``log M(phi) - lam phi + f``."""
    m = _positive_density(phi)
    return float(np.max(np.abs(_residual(phi, m, f.values, lam))))


def traced_residual(phi: TorusField, a_density: TorusField, lam: float) -> float:
    """Max norm of ``S(w) - tr_w a - lam`` for ``w = M(phi) w0``.

    ``S`` is the Kähler-normalised scalar curvature ``tr_w rho(w)``, i.e. half
    the Riemannian scalar curvature ``-Δ log M / M``; this keeps the traced
    constant equal to the un-traced ``lam``.
    """
    m = _positive_density(phi)
    grid = phi.grid
    riemannian = -laplacian(TorusField(grid, np.log(m))).values / m
    trace_a = a_density.values / m
    return float(np.max(np.abs(0.5 * riemannian - trace_a - lam)))


def compute_lambda(a_density: TorusField) -> float:
    """Cohomologically forced ``lam``: ``lam * area = -∫a`` since ``c1`` of a torus vanishes."""
    return -a_density.mean()


def calabi_normalize(f: TorusField) -> TorusField:
    """Shift ``f`` by a constant so that ``mean(exp(-f)) = 1``."""
    return f + math.log(float(np.mean(np.exp(-f.values))))


def make_f(a_density: TorusField, lam: float) -> TorusField:
    """Twist potential with ``(1/2) Δf = a + lam``.

    Mean zero for ``lam < 0``; for ``lam = 0`` the constant is fixed by the
    Calabi normalisation ``mean(exp(-f)) = 1``.
    """
    src = a_density.values + lam
    mean = float(np.mean(src))
    if abs(mean) > SOLVABILITY_TOL:
        raise SolvabilityError(
            f"a and lambda are cohomologically inconsistent: mean(a + lambda) = {mean:.3e}"
        )
    f = poisson_solve(TorusField(a_density.grid, 2.0 * (src - mean)))
    return calabi_normalize(f) if lam == 0 else f


class _NewtonSystem:
    """Symmetrised Newton system ``(-Δ/2 - lam M) δ = -M R``."""

    def __init__(self, grid: TorusGrid, m: np.ndarray, lam: float):
        self.grid, self.m, self.lam = grid, m, lam
        self.half_symbol = -0.5 * grid.laplacian_symbol()

    def solve(self, r: np.ndarray) -> np.ndarray:
        rhs = -self.m * r
        if self.lam == 0:
            # constants span the kernel; the dropped mean is O(|R|^2)
            rhat = np.fft.fft2(rhs - rhs.mean())
            sym = self.half_symbol.copy()
            sym[0, 0] = 1.0
            rhat[0, 0] = 0.0
            return np.fft.ifft2(rhat / sym).real
        n = self.grid.N
        precond_symbol = self.half_symbol - self.lam * float(np.mean(self.m))

        def matvec(x):
            x = x.reshape(n, n)
            lap = laplacian(TorusField(self.grid, x)).values
            return (-0.5 * lap - self.lam * self.m * x).ravel()

        def precond(x):
            return np.fft.ifft2(np.fft.fft2(x.reshape(n, n)) / precond_symbol).real.ravel()

        op = LinearOperator((n * n, n * n), matvec=matvec, dtype=float)
        pre = LinearOperator((n * n, n * n), matvec=precond, dtype=float)
        x, info = cg(op, rhs.ravel(), rtol=CG_RTOL, atol=0.0, M=pre, maxiter=10 * n)
        if info != 0:
            log.warning("inner CG stopped without reaching rtol=%g (info=%d)", CG_RTOL, info)
        return x.reshape(n, n)


def _admissible_start(phi0: Optional[TorusField], grid: TorusGrid) -> TorusField:
    if phi0 is None:
        return TorusField.zeros(grid)
    if phi0.grid != grid:
        raise DomainError("initial guess lives on a different grid")
    phi = phi0
    for _ in range(MAX_HALVINGS):
        if np.min(density(phi)) > 0:
            return phi
        phi = 0.5 * phi
    raise DensityCollapseError("initial guess could not be scaled into the positive-density cone")


def solve_ma(f: TorusField, cfg: SolveConfig, phi0: Optional[TorusField] = None) -> SolveReport:
    """Damped Newton solve of ``log(1 - Δphi/2) = lam phi - f``.

    An initial guess whose density is not positive is halved until it is.
    With ``continuity_steps > 1`` the data is ramped as ``t f``.  A run that
    exhausts ``max_newton`` (or stagnates) comes back with
    ``converged=False``; density collapse under full backtracking raises
    :class:`DensityCollapseError`.
    """
    lam = float(cfg.lam)
    grid = f.grid
    if lam == 0:
        calabi = float(np.mean(np.exp(-f.values)))
        if abs(calabi - 1.0) > CALABI_TOL:
            raise SolvabilityError(
                f"lambda = 0 needs mean(exp(-f)) = 1; got {calabi:.12g}"
            )

    phi = _admissible_start(phi0, grid)
    if lam == 0:
        phi = phi - phi.mean()
    history: list[float] = []
    converged = False

    for step in range(1, cfg.continuity_steps + 1):
        t = step / cfg.continuity_steps
        ft = t * f
        if lam == 0:
            ft = calabi_normalize(ft)
        fv = ft.values
        converged = False
        m = _positive_density(phi)
        r = _residual(phi, m, fv, lam)
        rnorm = float(np.max(np.abs(r)))
        history.append(rnorm)
        for it in range(cfg.max_newton):
            if rnorm <= cfg.tol:
                converged = True
                break
            delta = _NewtonSystem(grid, m, lam).solve(r)
            s = cfg.damping
            accepted = False
            saw_positive = False
            for _ in range(MAX_HALVINGS + 1):
                trial = TorusField(grid, phi.values + s * delta)
                if lam == 0:
                    trial = trial - trial.mean()
                m_trial = density(trial)
                if np.min(m_trial) > 0:
                    saw_positive = True
                    r_trial = _residual(trial, m_trial, fv, lam)
                    rn_trial = float(np.max(np.abs(r_trial)))
                    if rn_trial <= (1 - 1e-4 * s) * rnorm:
                        accepted = True
                        break
                s *= 0.5
            if not accepted:
                if not saw_positive:
                    raise DensityCollapseError(
                        f"Newton step left the positive-density cone after {MAX_HALVINGS} halvings "
                        f"(continuity t={t:g}, iteration {it})"
                    )
                log.warning("line search stagnated at residual %.3e", rnorm)
                break
            phi, m, r, rnorm = trial, m_trial, r_trial, rn_trial
            history.append(rnorm)
            log.debug("t=%g newton %d step=%g residual=%.3e", t, it, s, rnorm)
        else:
            converged = rnorm <= cfg.tol
        if not converged:
            break

    return SolveReport(
        phi=phi,
        residual_history=history,
        converged=converged,
        min_density=float(np.min(density(phi))),
        lam=lam,
    )

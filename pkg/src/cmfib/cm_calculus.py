"""Exact intersection calculus for a polarised fibration over a curve.

All inputs are degrees on the curve base (or on a fibre), stored as
:class:`fractions.Fraction`.  Nothing here touches floating point.

Notation used throughout::

    n         complex fibre dimension
    v         c1(L)|_Y^n                    (fibre degree)
    kl_fibre  c1(K_Y) . c1(L)|_Y^(n-1)
    ell       c1(L)^(n+1)[X]
    k         c1(K_{X/B}) . c1(L)^n [X]
    s         -n kl_fibre / v               (fibre average scalar curvature / 2pi)
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

from cmfib.errors import InconsistentDataError
from cmfib.formal_poly import FormalPoly, RationalLike, as_rational


def _opt_tuple(values: Optional[Sequence[RationalLike]]) -> Optional[tuple[Fraction, ...]]:
    if values is None:
        return None
    return tuple(as_rational(x) for x in values)


@dataclass(frozen=True)
class FibrationData:
    """Intersection invariants of ``(X -> B, L)`` with ``B`` a curve.

    ``lower_order_h[j]`` is the coefficient of ``m^j`` (``j < n - 1``) in the
    fibre Hilbert polynomial; ``lower_order_push[j]`` the coefficient of
    ``m^j`` (``j < n``) in ``deg c1(pi_* L^m)``.  Both default to absent,
    which is treated as zero.

    Pass ``expected_s`` to have the constructor check that it agrees with
    the value forced by ``kl_fibre`` and ``v``.
    """

    n: int
    v: Fraction
    kl_fibre: Fraction
    ell: Fraction
    k: Fraction
    lower_order_h: Optional[tuple[Fraction, ...]] = None
    lower_order_push: Optional[tuple[Fraction, ...]] = None
    expected_s: InitVar[Optional[RationalLike]] = None

    def __post_init__(self, expected_s: Optional[RationalLike]) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise InconsistentDataError(f"fibre dimension n must be an integer >= 1, got {self.n!r}")
        for name in ("v", "kl_fibre", "ell", "k"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        object.__setattr__(self, "lower_order_h", _opt_tuple(self.lower_order_h))
        object.__setattr__(self, "lower_order_push", _opt_tuple(self.lower_order_push))

        if self.v <= 0:
            raise InconsistentDataError(f"fibre degree v must be positive, got {self.v}")
        if self.lower_order_h is not None and len(self.lower_order_h) > self.n - 1:
            raise InconsistentDataError(
                f"lower_order_h holds coefficients of m^0..m^{self.n - 2}; got {len(self.lower_order_h)} entries"
            )
        if self.lower_order_push is not None and len(self.lower_order_push) > self.n:
            raise InconsistentDataError(
                f"lower_order_push holds coefficients of m^0..m^{self.n - 1}; got {len(self.lower_order_push)} entries"
            )
        if expected_s is not None:
            s = as_rational(expected_s)
            # c1(Y) = -c1(K_Y) on the fibre, so kl_fibre = -(s/n) v
            if self.kl_fibre != -s * self.v / self.n:
                raise InconsistentDataError(
                    f"kl_fibre={self.kl_fibre} disagrees with s={s}: expected kl_fibre={-s * self.v / self.n}"
                )

    @property
    def s(self) -> Fraction:
        return compute_s(self)

    @classmethod
    def from_json(cls, payload: Mapping[str, Any]) -> FibrationData:
        known = {"n", "v", "kl_fibre", "ell", "k", "lower_order_h", "lower_order_push", "s"}
        unknown = set(payload) - known
        if unknown:
            raise InconsistentDataError(f"unknown FibrationData keys: {sorted(unknown)}")
        missing = {"n", "v", "kl_fibre", "ell", "k"} - set(payload)
        if missing:
            raise InconsistentDataError(f"missing FibrationData keys: {sorted(missing)}")
        try:
            return cls(
                n=payload["n"],
                v=payload["v"],
                kl_fibre=payload["kl_fibre"],
                ell=payload["ell"],
                k=payload["k"],
                lower_order_h=payload.get("lower_order_h"),
                lower_order_push=payload.get("lower_order_push"),
                expected_s=payload.get("s"),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InconsistentDataError):
                raise
            raise InconsistentDataError(str(exc)) from exc

    def to_json(self) -> dict[str, Any]:
        def enc(xs):
            return None if xs is None else [str(x) for x in xs]

        return {
            "n": self.n,
            "v": str(self.v),
            "kl_fibre": str(self.kl_fibre),
            "ell": str(self.ell),
            "k": str(self.k),
            "lower_order_h": enc(self.lower_order_h),
            "lower_order_push": enc(self.lower_order_push),
        }


@dataclass(frozen=True)
class CHReport:
    """Pushed-forward Cornalba-Harris combination for ``E = L^m``."""

    combination: FormalPoly
    top_vanishes: bool
    m2n_coefficient: Fraction
    alpha_degree: Fraction
    nef_sign: str = field(default="zero")

    def to_json(self) -> dict[str, Any]:
        return {
            "combination": self.combination.to_json(),
            "top_vanishes": self.top_vanishes,
            "m2n_coefficient": str(self.m2n_coefficient),
            "alpha_degree": str(self.alpha_degree),
            "nef_sign": self.nef_sign,
        }


def compute_s(data: FibrationData) -> Fraction:
    """Fibre constant ``s = n c1(Y) c1(L)^(n-1) / c1(L)^n`` with ``c1(Y) = -c1(K_Y)``."""
    return -data.n * data.kl_fibre / data.v


def hilbert_poly(data: FibrationData) -> FormalPoly:
    """Fibre Hilbert polynomial ``v (m^n/n! + s m^(n-1)/(2 n!)) + lower terms``."""
    n, fact = data.n, math.factorial(data.n)
    head = FormalPoly({n: data.v / fact, n - 1: data.v * compute_s(data) / (2 * fact)})
    return head + FormalPoly.from_list(data.lower_order_h or ())


def pushforward_degree_poly(data: FibrationData) -> FormalPoly:
    """Degree of ``c1(pi_* L^m)`` on the base: ``ell m^(n+1)/(n+1)! - k m^n/(2 n!) + lower``."""
    n = data.n
    head = FormalPoly({
        n + 1: data.ell / math.factorial(n + 1),
        n: -data.k / (2 * math.factorial(n)),
    })
    return head + FormalPoly.from_list(data.lower_order_push or ())


def cm_degree(data: FibrationData) -> Fraction:
    """Degree of ``c1(L_CM) = 2^(n+1) pi_*[((n+1) K_{X/B} + s L) L^n]``."""
    n = data.n
    return 2 ** (n + 1) * ((n + 1) * data.k + compute_s(data) * data.ell)


def alpha_degree(data: FibrationData) -> Fraction:
    n = data.n
    return cm_degree(data) / (2 ** (n + 1) * (n + 1) * data.v)


def _sign(q: Fraction) -> str:
    return "positive" if q > 0 else "negative" if q < 0 else "zero"


def ch_expand(data: FibrationData) -> CHReport:
    """Expand ``pi_*`` of the Cornalba-Harris inequality for ``E = L^m``.

    The combination is ``h(m) m^(n+1) ell - (n+1) v m^n deg c1(pi_* L^m)``,
    built term by term with :class:`FormalPoly`.  The ``m^(2n)`` coefficient is
    read off that expansion, not from the closed form for ``alpha``.
    """
    n = data.n
    combo = (hilbert_poly(data).shift(n + 1) * data.ell
             - pushforward_degree_poly(data).shift(n) * ((n + 1) * data.v))
    alpha = alpha_degree(data)
    return CHReport(
        combination=combo,
        top_vanishes=combo.coeff(2 * n + 1) == 0,
        m2n_coefficient=combo.coeff(2 * n),
        alpha_degree=alpha,
        nef_sign=_sign(alpha),
    )


def twist(data: FibrationData, deg_a: RationalLike) -> FibrationData:
    """Intersection data of ``L + pi^* A`` where ``deg A = deg_a``.

    Fibre data is untouched.  Since ``pi_*(L^m + pi^*A^m) = pi_* L^m + A^m``,
    the push-forward degree gains ``deg_a * m * h(m)``; the part of that
    below ``m^n`` is carried into ``lower_order_push``.
    """
    a = as_rational(deg_a)
    n, v, s = data.n, data.v, compute_s(data)
    lower_push = data.lower_order_push
    if data.lower_order_h is not None or data.lower_order_push is not None:
        shifted = FormalPoly.from_list(data.lower_order_h or ()).shift(1) * a
        total = FormalPoly.from_list(data.lower_order_push or ()) + shifted
        lower_push = tuple(total.coeff(j) for j in range(n))
    return replace(
        data,
        ell=data.ell + (n + 1) * a * v,
        k=data.k - s * a * v,
        lower_order_push=lower_push,
    )


def morita_genus(g: int, m: int) -> int:
    """Fibre genus ``m^2 g - m(m+1)/2 + 1`` of Morita's covering construction."""
    for name, val in (("g", g), ("m", m)):
        if not isinstance(val, int) or isinstance(val, bool):
            raise InconsistentDataError(f"{name} must be an integer, got {val!r}")
    if g < 2:
        raise InconsistentDataError(f"genus g must be >= 2, got {g}")
    if m < 1:
        raise InconsistentDataError(f"covering degree m must be >= 1, got {m}")
    return m * m * g - m * (m + 1) // 2 + 1

"""Polynomials in the tensor-power variable ``m`` with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

RationalLike = Union[int, Fraction, str]


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: every coefficient in this package must be exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    raise TypeError(f"expected int, Fraction or 'p/q' string, got {type(value).__name__}")


class FormalPoly:
    """Immutable sparse polynomial ``sum c_j m^j`` over the rationals.

    Zero coefficients are never stored, so two polynomials compare equal
    exactly when their coefficient maps do.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, RationalLike] | None = None):
        clean: dict[int, Fraction] = {}
        for exp, c in (coeffs or {}).items():
            if not isinstance(exp, int) or isinstance(exp, bool) or exp < 0:
                raise ValueError(f"exponents must be non-negative ints, got {exp!r}")
            q = as_rational(c)
            if q:
                clean[exp] = q
        self._coeffs = dict(sorted(clean.items()))

    @classmethod
    def monomial(cls, exp: int, coeff: RationalLike = 1) -> FormalPoly:
        return cls({exp: coeff})

    @classmethod
    def from_list(cls, coeffs: Iterable[RationalLike], start: int = 0) -> FormalPoly:
        """Coefficients listed in increasing degree, beginning at ``m^start``."""
        return cls({start + j: c for j, c in enumerate(coeffs)})

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._coeffs)

    @property
    def degree(self) -> int:
        """Largest stored exponent; -1 for the zero polynomial."""
        return max(self._coeffs, default=-1)

    def coeff(self, exp: int) -> Fraction:
        return self._coeffs.get(exp, Fraction(0))

    def is_zero(self) -> bool:
        return not self._coeffs

    def __add__(self, other: FormalPoly) -> FormalPoly:
        if not isinstance(other, FormalPoly):
            return NotImplemented
        out = dict(self._coeffs)
        for e, c in other._coeffs.items():
            out[e] = out.get(e, 0) + c
        return FormalPoly(out)

    def __neg__(self) -> FormalPoly:
        return FormalPoly({e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other: FormalPoly) -> FormalPoly:
        if not isinstance(other, FormalPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: FormalPoly | RationalLike) -> FormalPoly:
        if not isinstance(other, FormalPoly):
            return self.scale(other)
        out: dict[int, Fraction] = {}
        for e1, c1 in self._coeffs.items():
            for e2, c2 in other._coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return FormalPoly(out)

    __rmul__ = __mul__

    def scale(self, factor: RationalLike) -> FormalPoly:
        q = as_rational(factor)
        return FormalPoly({e: q * c for e, c in self._coeffs.items()})

    def shift(self, j: int) -> FormalPoly:
        """Multiply by ``m^j``."""
        if j < 0:
            raise ValueError("shift must be non-negative")
        return FormalPoly({e + j: c for e, c in self._coeffs.items()})

    def __call__(self, m: RationalLike) -> Fraction:
        x = as_rational(m)
        acc = Fraction(0)
        for e in range(self.degree, -1, -1):
            acc = acc * x + self.coeff(e)
        return acc

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FormalPoly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(tuple(self._coeffs.items()))

    def __repr__(self) -> str:
        return f"FormalPoly({ {e: str(c) for e, c in self._coeffs.items()} })"

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        terms = []
        for e in sorted(self._coeffs, reverse=True):
            c = self._coeffs[e]
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "m" if e == 1 else f"m^{e}"
                body = var if mag == 1 else f"({mag})*{var}" if mag.denominator != 1 else f"{mag}*{var}"
            terms.append((sign, body))
        head_sign, head = terms[0]
        text = ("-" if head_sign == "-" else "") + head
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text

    def to_json(self) -> dict[str, str]:
        """Exponent -> ``"p/q"`` map with string keys in increasing order."""
        return {str(e): str(c) for e, c in self._coeffs.items()}

    @classmethod
    def from_json(cls, payload: Mapping[str, RationalLike]) -> FormalPoly:
        return cls({int(e): c for e, c in payload.items()})

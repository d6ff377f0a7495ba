"""Exact arithmetic for Legendre-basis coefficients.

On the unit interval every Legendre coefficient with monomial weights is a
rational number (an iterated integral of a polynomial with rational
coefficients over the ordered simplex).  The normalisation sqrt(2j + 1) of
each basis function and the affine scaling by powers of sqrt(delta) are kept
symbolically in :class:`ExactScalar`.

Polynomials are plain lists of ``gmpy2.mpq`` coefficients in the monomial
basis, lowest degree first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

__all__ = [
    "ExactScalar",
    "squarefree_split",
    "shifted_legendre",
    "unit_moment",
    "poly_mul",
    "poly_antiderivative",
    "simplex_monomial_integral",
]


def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(a, b)`` with ``n == a*a*b`` and ``b`` square-free."""
    if n <= 0:
        raise ValueError(f"radicand must be positive, got {n}")
    return _squarefree_split(n)


@lru_cache(maxsize=4096)
def _squarefree_split(n: int) -> tuple[int, int]:
    a, b = 1, 1
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        a *= d ** (e // 2)
        b *= d ** (e % 2)
        d += 1 if d == 2 else 2
    return a, b * n


@dataclass(frozen=True)
class ExactScalar:
    """The number ``r * sqrt(n) * delta**(h/2)``.

    ``r`` is a reduced fraction, ``n`` a square-free positive integer and ``h``
    an integer half-power of the interval length.  Zero is stored with
    ``n == 1``.  ``delta`` only enters through :meth:`__float__`.
    """

    r: Fraction
    n: int = 1
    h: int = 0
    delta: float = 1.0

    def __post_init__(self):
        r = Fraction(self.r)
        n = int(self.n)
        a, b = squarefree_split(n)
        r *= a
        if r == 0:
            b = 1
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "n", b)
        object.__setattr__(self, "h", int(self.h))
        object.__setattr__(self, "delta", float(self.delta))

    def __float__(self) -> float:
        if self.r == 0:
            return 0.0
        return float(self.r) * math.sqrt(self.n) * self.delta ** (self.h / 2)

    def is_zero(self) -> bool:
        return self.r == 0

    def _check_delta(self, other: "ExactScalar"):
        if self.delta != other.delta:
            raise ValueError("ExactScalar operands refer to different interval lengths")

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactScalar(self.r * other, self.n, self.h, self.delta)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        self._check_delta(other)
        g = math.gcd(self.n, other.n)
        r = self.r * other.r * g
        return ExactScalar(r, (self.n // g) * (other.n // g), self.h + other.h, self.delta)

    __rmul__ = __mul__

    def __neg__(self):
        return ExactScalar(-self.r, self.n, self.h, self.delta)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, ExactScalar):
            return NotImplemented
        self._check_delta(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if (self.n, self.h) != (other.n, other.h):
            raise ValueError(
                f"cannot add exactly: sqrt({self.n})*delta^({self.h}/2) and sqrt({other.n})*delta^({other.h}/2)"
            )
        return ExactScalar(self.r + other.r, self.n, self.h, self.delta)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def compatible(self, other: "ExactScalar") -> bool:
        return self.is_zero() or other.is_zero() or (self.n, self.h) == (other.n, other.h)

    def sign(self) -> int:
        return (self.r > 0) - (self.r < 0)

    def as_triple(self) -> dict:
        return {
            "num": str(self.r.numerator),
            "den": str(self.r.denominator),
            "radicand": self.n,
            "half_power": self.h,
        }

    @classmethod
    def from_triple(cls, d: dict, delta: float) -> "ExactScalar":
        return cls(Fraction(int(d["num"]), int(d["den"])), int(d["radicand"]), int(d["half_power"]), delta)

    def __repr__(self):
        return f"ExactScalar({self.r} * sqrt({self.n}) * delta^({self.h}/2), delta={self.delta})"


@lru_cache(maxsize=None)
def shifted_legendre(n: int) -> tuple:
    """Integer coefficients of P_n(2x - 1), lowest degree first."""
    return tuple(mpq((-1) ** (n + k) * math.comb(n, k) * math.comb(n + k, k)) for k in range(n + 1))


@lru_cache(maxsize=None)
def unit_moment(j: int, e: int) -> mpq:
    """``int_0^1 x**e P_j(2x - 1) dx``; zero when e < j by orthogonality."""
    if e < j:
        return mpq(0)
    return mpq(math.factorial(e) ** 2, math.factorial(e - j) * math.factorial(e + j + 1))


def poly_mul(a, b) -> list:
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_antiderivative(a) -> list:
    """Antiderivative vanishing at 0."""
    return [mpq(0)] + [c / (i + 1) for i, c in enumerate(a)]


def poly_shift(a, q: int, sign: int = 1) -> list:
    """``sign * x**q * a(x)``."""
    if sign == 1:
        return [mpq(0)] * q + list(a)
    return [mpq(0)] * q + [-c for c in a]


def simplex_monomial_integral(exponents) -> Fraction:
    """``int_{0 < x_1 < ... < x_k < 1} prod x_l**a_l`` = prod_l 1 / (a_1 + ... + a_l + l)."""
    out = Fraction(1)
    acc = 0
    for level, a in enumerate(exponents, start=1):
        acc += a
        out /= acc + level
    return out

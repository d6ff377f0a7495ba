"""Time intervals, polynomial weight functions and orthonormal bases on [t, T].

Everything is evaluated through the affine map x = (s - t) / (T - t) onto the
unit interval: a basis function on [t, T] is ``delta**-0.5`` times the
corresponding unit-interval function, and a power weight contributes
``delta**q`` times a signed monomial in x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "QuadratureError",
    "TimeInterval",
    "WeightFunction",
    "BasisSystem",
    "legendre_table",
    "eval_basis",
    "weight_eval",
    "inner_product",
    "gram_matrix",
    "adaptive_gauss_legendre",
    "LEGENDRE",
    "TRIGONOMETRIC",
]

LEGENDRE = "legendre"
TRIGONOMETRIC = "trigonometric"
_BASIS_KINDS = (LEGENDRE, TRIGONOMETRIC)


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class TimeInterval:
    """The integration interval ``[t_start, t_end]``."""

    t_start: float
    t_end: float

    def __post_init__(self):
        t0, t1 = float(self.t_start), float(self.t_end)
        if not (np.isfinite(t0) and np.isfinite(t1)):
            raise DomainError("interval endpoints must be finite")
        if not t1 > t0:
            raise DomainError(f"interval requires t_end > t_start, got [{t0}, {t1}]")
        object.__setattr__(self, "t_start", t0)
        object.__setattr__(self, "t_end", t1)

    @property
    def delta(self) -> float:
        return self.t_end - self.t_start

    def to_unit(self, s):
        """Map times in [t_start, t_end] to [0, 1]."""
        return (np.asarray(s, dtype=float) - self.t_start) / self.delta

    def contains(self, s) -> bool:
        s = np.asarray(s, dtype=float)
        return bool(np.all((s >= self.t_start) & (s <= self.t_end)))


@dataclass(frozen=True)
class WeightFunction:
    """Polynomial weight psi(tau).

    ``kind`` is one of ``"one"`` (psi = 1), ``"power"`` (psi = (t - tau)**q)
    or ``"power_from_left"`` (psi = (tau - t)**q).  The last kind appears when
    merged weights such as ``(t_3 - t)`` are needed for trace targets.
    """

    kind: str = "one"
    q: int = 0

    def __post_init__(self):
        if self.kind not in ("one", "power", "power_from_left"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if int(self.q) != self.q or self.q < 0:
            raise ValueError(f"weight exponent must be a nonnegative integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))
        if self.kind == "one" and self.q != 0:
            raise ValueError("constant weight takes no exponent")

    @classmethod
    def one(cls) -> "WeightFunction":
        return cls("one", 0)

    @classmethod
    def power(cls, q: int) -> "WeightFunction":
        return cls("power", q) if q else cls.one()

    @classmethod
    def power_from_left(cls, q: int) -> "WeightFunction":
        return cls("power_from_left", q) if q else cls.one()

    @property
    def is_one(self) -> bool:
        return self.q == 0

    def unit_monomial(self) -> tuple[int, int]:
        """Return ``(sign, q)`` with psi(t + delta*x) = sign * delta**q * x**q."""
        if self.kind == "power" and self.q % 2:
            return -1, self.q
        return 1, self.q

    def __mul__(self, other: "WeightFunction") -> "WeightFunction":
        if not isinstance(other, WeightFunction):
            return NotImplemented
        if self.is_one:
            return other
        if other.is_one:
            return self
        q = self.q + other.q
        if self.kind == other.kind:
            return WeightFunction(self.kind, q)
        # (t - tau)**a * (tau - t)**b
        a, b = (self.q, other.q) if self.kind == "power" else (other.q, self.q)
        if b % 2 == 0:
            return WeightFunction.power(q)
        if a % 2 == 0:
            return WeightFunction.power_from_left(q)
        raise ValueError(f"product {self} * {other} is not in the weight family")

    def __call__(self, tau, interval: TimeInterval):
        return weight_eval(self, interval, tau)

    def label(self) -> str:
        if self.is_one:
            return "1"
        return f"(t-s)^{self.q}" if self.kind == "power" else f"(s-t)^{self.q}"


@dataclass(frozen=True)
class BasisSystem:
    """Complete orthonormal system on ``interval``: Legendre or trigonometric."""

    kind: str
    interval: TimeInterval

    def __post_init__(self):
        if self.kind not in _BASIS_KINDS:
            raise ValueError(f"basis kind must be one of {_BASIS_KINDS}, got {self.kind!r}")

    @property
    def delta(self) -> float:
        return self.interval.delta

    def unit_values(self, p: int, x) -> np.ndarray:
        """Values of the first ``p + 1`` basis functions on [0, 1], shape ``x.shape + (p + 1,)``.

        These are orthonormal on the unit interval; the functions on [t, T]
        are obtained by multiplying with ``delta**-0.5``.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == LEGENDRE:
            leg = legendre_table(p, 2.0 * x - 1.0)
            return leg * np.sqrt(2.0 * np.arange(p + 1) + 1.0)
        out = np.empty(x.shape + (p + 1,))
        out[..., 0] = 1.0
        if p >= 1:
            r = (np.arange(1, p + 1) + 1) // 2
            angle = 2.0 * np.pi * x[..., None] * r
            odd = (np.arange(1, p + 1) % 2).astype(bool)
            out[..., 1:] = np.sqrt(2.0) * np.where(odd, np.sin(angle), np.cos(angle))
        return out

    def values(self, p: int, s) -> np.ndarray:
        """phi_0..phi_p evaluated at times ``s`` in the interval."""
        if not self.interval.contains(s):
            raise DomainError(f"evaluation point outside [{self.interval.t_start}, {self.interval.t_end}]")
        return self.unit_values(p, self.interval.to_unit(s)) / np.sqrt(self.delta)

    def integrals(self, p: int) -> np.ndarray:
        """Exact ``int_t^T phi_j(s) ds`` for j = 0..p, i.e. sqrt(delta) * [j == 0]."""
        out = np.zeros(p + 1)
        out[0] = np.sqrt(self.delta)
        return out


def legendre_table(n: int, y) -> np.ndarray:
    """P_0..P_n at ``y`` in [-1, 1] by the three-term recurrence, shape ``y.shape + (n + 1,)``."""
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape + (n + 1,))
    out[..., 0] = 1.0
    if n >= 1:
        out[..., 1] = y
    for j in range(1, n):
        out[..., j + 1] = ((2 * j + 1) * y * out[..., j] - j * out[..., j - 1]) / (j + 1)
    return out


def eval_basis(basis: BasisSystem, j: int, s) -> float:
    """phi_j(s); raises DomainError for ``s`` outside the interval or ``j < 0``."""
    if j < 0:
        raise DomainError(f"basis index must be nonnegative, got {j}")
    vals = basis.values(j, s)
    return vals[..., j] if np.ndim(s) else float(vals[j])


def weight_eval(w: WeightFunction, interval: TimeInterval, tau):
    tau = np.asarray(tau, dtype=float)
    if w.is_one:
        val = np.ones_like(tau)
    elif w.kind == "power":
        val = (interval.t_start - tau) ** w.q
    else:
        val = (tau - interval.t_start) ** w.q
    return val if val.ndim else float(val)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def adaptive_gauss_legendre(f, a: float, b: float, *, order: int = 20, tol: float = 1e-12,
                            max_level: int = 14):
    """Composite Gauss-Legendre quadrature of ``f`` over [a, b].

    The panel count is doubled until two successive estimates agree to ``tol``
    (absolute, max-norm for vector-valued integrands).  ``f`` maps an array of
    points of shape (n,) to values of shape (n, ...).

    Returns ``(value, achieved)``.
    """
    x, w = gauss_legendre_unit(order)
    prev = None
    achieved = float("inf")
    for level in range(max_level + 1):
        panels = 2**level
        h = (b - a) / panels
        pts = (a + h * (np.arange(panels)[:, None] + x[None, :])).ravel()
        vals = np.asarray(f(pts), dtype=float)
        wts = np.tile(w * h, panels)
        est = np.tensordot(wts, vals, axes=(0, 0))
        if prev is not None:
            achieved = float(np.max(np.abs(est - prev)))
            if achieved <= tol:
                return est, achieved
        prev = est
    raise QuadratureError(f"composite Gauss-Legendre did not reach {tol:g} after {max_level} halvings",
                          achieved=achieved)


def gram_matrix(basis: BasisSystem, p: int, *, tol: float = 1e-12) -> np.ndarray:
    """Matrix of inner products <phi_i, phi_j> for i, j <= p under the reference quadrature."""
    iv = basis.interval

    def integrand(s):
        v = basis.values(p, np.clip(s, iv.t_start, iv.t_end))
        return v[:, :, None] * v[:, None, :]

    val, _ = adaptive_gauss_legendre(integrand, iv.t_start, iv.t_end, tol=tol)
    return val


def inner_product(basis: BasisSystem, j1: int, j2: int, *, tol: float = 1e-12) -> float:
    if j1 < 0 or j2 < 0:
        raise DomainError("basis indices must be nonnegative")
    iv = basis.interval
    p = max(j1, j2)

    def integrand(s):
        v = basis.values(p, np.clip(s, iv.t_start, iv.t_end))
        return v[:, j1] * v[:, j2]

    val, _ = adaptive_gauss_legendre(integrand, iv.t_start, iv.t_end, tol=tol)
    return float(val)

"""Gauss-Legendre machinery on the unit interval.

``PanelRule`` discretises [0, 1] into equal panels with a fixed number of
Gauss nodes each and carries a spectral antiderivative operator: values of
``F(x) = int_0^x f`` at the nodes are obtained from the values of ``f``.  It is
exact for piecewise polynomials of degree < order on each panel, which makes
the single-panel rule exact for the polynomial integrands of the Legendre
basis.

``simplex_quadrature`` is an unrelated route to the same integrals: a
conical-product Gauss rule on the ordered simplex, used as an oracle.
"""

from __future__ import annotations

import itertools

import numpy as np

from .basis import QuadratureError, gauss_legendre_unit, legendre_table

__all__ = ["PanelRule", "simplex_rule", "simplex_quadrature", "adaptive_simplex_quadrature"]

_SLOC_CACHE: dict[int, np.ndarray] = {}


def _local_integration_matrix(n: int) -> np.ndarray:
    """S[i, j] = int_0^{y_i} l_j(s) ds for the Lagrange basis l_j on the n Gauss nodes y of [0, 1]."""
    if n in _SLOC_CACHE:
        return _SLOC_CACHE[n]
    y, w = gauss_legendre_unit(n)
    leg = legendre_table(n, 2.0 * y - 1.0)  # P~_m(y_i), m = 0..n
    m = np.arange(n)
    # values -> shifted-Legendre coefficients (exact for degree < n)
    to_coef = (2 * m + 1)[:, None] * (w[None, :] * leg[:, :n].T)
    anti = np.empty((n, n))
    anti[:, 0] = y
    mm = m[1:]
    anti[:, 1:] = (leg[:, 2 : n + 1] - leg[:, 0 : n - 1]) / (2.0 * (2 * mm + 1))
    s = anti @ to_coef
    _SLOC_CACHE[n] = s
    return s


class PanelRule:
    """Composite Gauss-Legendre rule on [0, 1] with ``panels`` equal panels of ``order`` nodes."""

    def __init__(self, order: int, panels: int = 1):
        if order < 1 or panels < 1:
            raise ValueError("order and panels must be positive")
        self.order = order
        self.panels = panels
        y, w = gauss_legendre_unit(order)
        h = 1.0 / panels
        self.h = h
        self.nodes = (h * (np.arange(panels)[:, None] + y[None, :])).ravel()
        self.weights = np.tile(w * h, panels)
        self._w_local = w
        self._s_local = _local_integration_matrix(order)

    def __len__(self):
        return self.nodes.size

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=(0, 0))

    def antiderivative(self, values: np.ndarray) -> np.ndarray:
        """Node values of ``int_0^x f`` given node values of ``f`` along axis 0."""
        values = np.asarray(values, dtype=float)
        rest = values.shape[1:]
        f = values.reshape((self.panels, self.order, -1))
        local = self.h * np.einsum("ij,bjr->bir", self._s_local, f)
        totals = self.h * np.einsum("j,bjr->br", self._w_local, f)
        offsets = np.cumsum(totals, axis=0) - totals
        out = local + offsets[:, None, :]
        return out.reshape((self.panels * self.order,) + rest)

    def integral_from(self, values: np.ndarray) -> np.ndarray:
        """Node values of ``int_x^1 f``."""
        return self.integrate(values)[None, ...] - self.antiderivative(values)


def simplex_rule(k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Conical-product Gauss rule for the simplex 0 < t_1 < ... < t_k < 1.

    Collapsed coordinates ``t_k = u_k``, ``t_l = t_{l+1} u_l`` map the unit cube
    onto the simplex with Jacobian ``t_2 t_3 ... t_k``.  Returns points of shape
    (order**k, k), columns ordered t_1..t_k, and weights.
    """
    u, w = gauss_legendre_unit(order)
    grids = np.array(list(itertools.product(range(order), repeat=k)))
    uu = u[grids]  # columns u_1..u_k
    ww = np.prod(w[grids], axis=1)
    t = np.empty_like(uu)
    t[:, k - 1] = uu[:, k - 1]
    for level in range(k - 2, -1, -1):
        t[:, level] = t[:, level + 1] * uu[:, level]
    jac = np.prod(t[:, 1:], axis=1) if k > 1 else np.ones(len(t))
    return t, ww * jac


def simplex_quadrature(f, k: int, order: int):
    """Integrate ``f(points)`` over the unit ordered simplex; ``f`` maps (n, k) to (n, ...)."""
    pts, wts = simplex_rule(k, order)
    return np.tensordot(wts, np.asarray(f(pts), dtype=float), axes=(0, 0))


def adaptive_simplex_quadrature(f, k: int, *, order: int = 8, step: int = 6, rtol: float = 1e-13,
                                atol: float = 1e-15, max_order: int = 60):
    """Raise the conical-product order until two successive estimates agree.

    Agreement means ``|I_n - I_{n+step}| <= atol + rtol * |I_{n+step}|`` entrywise.
    Returns ``(value, order_used)``.
    """
    prev = simplex_quadrature(f, k, order)
    while order + step <= max_order:
        order += step
        est = simplex_quadrature(f, k, order)
        if np.all(np.abs(est - prev) <= atol + rtol * np.abs(est)):
            return est, order
        prev = est
    raise QuadratureError(f"simplex quadrature did not converge by order {max_order}",
                          achieved=float(np.max(np.abs(est - prev))))

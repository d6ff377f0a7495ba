"""Fourier coefficients of the ordered-simplex kernel.

For weights psi_1..psi_k on [t, T] the kernel is

    K(t_1, ..., t_k) = psi_1(t_1) ... psi_k(t_k)   if t_1 < ... < t_k,  else 0,

and its coefficients are the nested integrals

    C[j_k, ..., j_1] = int psi_k phi_{j_k} int^{s_k} ... int^{s_2} psi_1 phi_{j_1} ds_1 ... ds_k.

Arrays of coefficients are indexed in that subscript order, so axis 0 belongs
to the outermost position k and the last axis to position 1.

Two engines compute them, both on the unit interval with the powers of delta
attached afterwards:

* ``exact``: rational polynomial arithmetic (Legendre basis only), producing
  :class:`~iterint.exact.ExactScalar` values;
* ``collocation``: the Gauss-Legendre antiderivative operator of
  :class:`~iterint.quadrature.PanelRule`.  A single panel of sufficient order
  is exact for Legendre integrands; trigonometric integrands use panel
  halving until two refinements agree to 1e-12.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact as ex
from .basis import LEGENDRE, BasisSystem, QuadratureError, TimeInterval, WeightFunction
from .exact import ExactScalar
from .quadrature import PanelRule

__all__ = [
    "FORMAT_VERSION",
    "TableSizeError",
    "MultiIndex",
    "KernelSpec",
    "CoefficientTable",
    "compute_coefficient",
    "build_table",
    "kernel_norm_sq",
    "parseval_residual",
    "trace_sum",
    "trace_sum_exact",
    "load_table",
]

FORMAT_VERSION = 1
MAX_K = 4
# default ceilings on dense tables; above them build_table refuses instead of truncating
MAX_FLOAT_ENTRIES = 20_000_000
MAX_EXACT_ENTRIES = 200_000
# build_table(exact=None) uses the exact engine for Legendre tables up to this size
AUTO_EXACT_ENTRIES = 40_000
TRIG_TOL = 1e-12


class TableSizeError(ValueError):
    """Requested table exceeds the configured memory bound."""


@dataclass(frozen=True)
class MultiIndex:
    """Coefficient subscript ``(j_k, ..., j_1)`` in the written order."""

    subscript: tuple

    def __post_init__(self):
        sub = tuple(int(j) for j in self.subscript)
        if not 1 <= len(sub) <= MAX_K:
            raise ValueError(f"multiplicity must be 1..{MAX_K}, got {len(sub)}")
        if any(j < 0 for j in sub):
            raise ValueError(f"indices must be nonnegative, got {sub}")
        object.__setattr__(self, "subscript", sub)

    @classmethod
    def of(cls, *subscript) -> "MultiIndex":
        return cls(tuple(subscript))

    @property
    def k(self) -> int:
        return len(self.subscript)

    def position(self, l: int) -> int:
        """j_l for l = 1..k."""
        return self.subscript[self.k - l]

    @property
    def by_position(self) -> tuple:
        """``(j_1, ..., j_k)``."""
        return self.subscript[::-1]


@dataclass(frozen=True)
class KernelSpec:
    """Weights psi_1..psi_k (innermost first) on an interval."""

    weights: tuple
    interval: TimeInterval

    def __post_init__(self):
        w = tuple(self.weights)
        if not 1 <= len(w) <= MAX_K:
            raise ValueError(f"multiplicity must be 1..{MAX_K}, got {len(w)}")
        if not all(isinstance(x, WeightFunction) for x in w):
            raise TypeError("weights must be WeightFunction instances")
        object.__setattr__(self, "weights", w)

    @classmethod
    def ones(cls, k: int, interval: TimeInterval) -> "KernelSpec":
        return cls((WeightFunction.one(),) * k, interval)

    @classmethod
    def powers(cls, qs, interval: TimeInterval) -> "KernelSpec":
        """psi_l = (t - tau)**q_l, ``qs`` listed innermost first."""
        return cls(tuple(WeightFunction.power(q) for q in qs), interval)

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def all_ones(self) -> bool:
        return all(w.is_one for w in self.weights)

    def half_power(self) -> int:
        """Exponent h with C = (unit-interval value) * delta**(h/2)."""
        return self.k + 2 * sum(w.q for w in self.weights)

    def unit_weights(self) -> tuple:
        return tuple(w.unit_monomial() for w in self.weights)

    def evaluate(self, points, star: bool = False) -> np.ndarray:
        """K (or K* with ``star``) at ``points`` of shape (..., k), columns t_1..t_k.

        K* replaces the strict ordering indicator of each neighbouring pair by
        ``1{t_l < t_{l+1}} + 1/2 * 1{t_l == t_{l+1}}``.
        """
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} coordinates, got {pts.shape[-1]}")
        val = np.ones(pts.shape[:-1])
        for l, w in enumerate(self.weights):
            val = val * np.asarray(w(pts[..., l], self.interval))
        for l in range(self.k - 1):
            a, b = pts[..., l], pts[..., l + 1]
            ind = (a < b).astype(float)
            if star:
                ind = ind + 0.5 * (a == b)
            val = val * ind
        return val


# ---------------------------------------------------------------------------
# unit-interval engines


def _exact_unit_values(unit_w, idx) -> np.ndarray:
    """Rational unit-interval coefficients for index lists ``idx`` (position 1 first).

    Returns an object array of ``mpq`` with axes in subscript order.
    """
    k = len(unit_w)
    s1, q1 = unit_w[0]
    if k == 1:
        return np.array([s1 * ex.unit_moment(j, q1) for j in idx[0]], dtype=object)
    level = [ex.poly_antiderivative(ex.poly_shift(ex.shifted_legendre(j), q1, s1)) for j in idx[0]]
    for l in range(1, k - 1):
        s, q = unit_w[l]
        nxt = []
        for j in idx[l]:
            g = ex.poly_shift(ex.shifted_legendre(j), q, s)
            nxt.extend(ex.poly_antiderivative(ex.poly_mul(g, f)) for f in level)
        level = nxt
    s, q = unit_w[k - 1]
    maxlen = max(len(f) for f in level)
    out = []
    for j in idx[k - 1]:
        mom = [ex.unit_moment(j, d + q) for d in range(maxlen)]
        lo = max(0, j - q)
        for f in level:
            acc = ex.mpq(0)
            for d in range(lo, len(f)):
                c = f[d]
                if c:
                    acc += c * mom[d]
            out.append(-acc if s < 0 else acc)
    shape = tuple(len(i) for i in reversed(idx))
    arr = np.empty(len(out), dtype=object)
    arr[:] = out
    return arr.reshape(shape)


def _collocation_unit_values(kind: str, unit_w, idx, rule: PanelRule) -> np.ndarray:
    """Float unit-interval coefficients on ``rule``; axes in subscript order."""
    k = len(unit_w)
    x, wts = rule.nodes, rule.weights
    pmax = max(max(i) for i in idx)
    phi = BasisSystem(kind, TimeInterval(0.0, 1.0)).unit_values(pmax, x)
    g = [s * x[:, None] ** q * phi[:, list(ix)] for (s, q), ix in zip(unit_w, idx)]
    if k == 1:
        return wts @ g[0]
    f1 = rule.antiderivative(g[0])
    if k == 2:
        return (g[1] * wts[:, None]).T @ f1
    f2 = rule.antiderivative(g[1][:, :, None] * f1[:, None, :])
    n = len(x)
    if k == 3:
        c = (g[2] * wts[:, None]).T @ f2.reshape(n, -1)
        return c.reshape(len(idx[2]), len(idx[1]), len(idx[0]))
    tail = rule.integral_from(g[3])  # int_x^1 psi_4 phi_{j4}
    u = tail[:, :, None] * g[2][:, None, :]
    c = (u.reshape(n, -1) * wts[:, None]).T @ f2.reshape(n, -1)
    return c.reshape(len(idx[3]), len(idx[2]), len(idx[1]), len(idx[0]))


def _legendre_order(unit_w, idx) -> int:
    """Single-panel Gauss order making every collocation step exact."""
    degs = [max(ix) + q for (_, q), ix in zip(unit_w, idx)]
    k = len(degs)
    total = sum(degs) + k
    inner = degs[0] + 1 if k <= 2 else degs[0] + degs[1] + 2
    return max(inner + 1, total // 2 + 1) + 2


def _float_unit_values(kind: str, unit_w, idx, tol: float = TRIG_TOL) -> tuple[np.ndarray, str]:
    if kind == LEGENDRE:
        return _collocation_unit_values(kind, unit_w, idx, PanelRule(_legendre_order(unit_w, idx))), \
            "collocation"
    order = 24
    freq = sum(2 * math.pi * ((max(ix) + 1) // 2) for ix in idx) + sum(q for _, q in unit_w)
    panels = max(1, int(math.ceil(freq / order)))
    prev = _collocation_unit_values(kind, unit_w, idx, PanelRule(order, panels))
    achieved = math.inf
    for _ in range(8):
        panels *= 2
        est = _collocation_unit_values(kind, unit_w, idx, PanelRule(order, panels))
        achieved = float(np.max(np.abs(est - prev)))
        if achieved <= tol:
            return est, "collocation"
        prev = est
    raise QuadratureError(f"trigonometric coefficients did not converge to {tol:g}", achieved=achieved)


def _radicand(subscript) -> int:
    return math.prod(2 * j + 1 for j in subscript)


def _to_exact(r, subscript, h: int, delta: float) -> ExactScalar:
    return ExactScalar(Fraction(int(r.numerator), int(r.denominator)), _radicand(subscript), h, delta)


def _check_k(spec: KernelSpec):
    if not 1 <= spec.k <= MAX_K:
        raise ValueError(f"unsupported multiplicity {spec.k}")


def compute_coefficient(spec: KernelSpec, basis: BasisSystem, mi: MultiIndex):
    """C_{j_k...j_1} for one multi-index.

    Legendre: an exact :class:`ExactScalar`.  Trigonometric: a float from the
    reference quadrature (raises QuadratureError when it does not converge).
    """
    if isinstance(mi, (tuple, list)):
        mi = MultiIndex(tuple(mi))
    _check_k(spec)
    if mi.k != spec.k:
        raise ValueError(f"multi-index has k={mi.k}, kernel has k={spec.k}")
    idx = [[j] for j in mi.by_position]
    if basis.kind == LEGENDRE:
        r = _exact_unit_values(spec.unit_weights(), idx).ravel()[0]
        return _to_exact(r, mi.subscript, spec.half_power(), spec.interval.delta)
    val, _ = _float_unit_values(basis.kind, spec.unit_weights(), idx)
    return float(val.ravel()[0]) * spec.interval.delta ** (spec.half_power() / 2)


# ---------------------------------------------------------------------------
# tables


@dataclass
class CoefficientTable:
    """Dense table of C[j_k, ..., j_1] for all j_l <= p.

    ``values`` holds floats; ``exact`` holds matching ExactScalar objects when
    the table came from the exact engine, otherwise None.
    """

    spec: KernelSpec
    basis: BasisSystem
    p: int
    values: np.ndarray
    exact: np.ndarray | None = None
    engine: str = "exact"
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def weights(self) -> tuple:
        return self.spec.weights

    @property
    def interval(self) -> TimeInterval:
        return self.spec.interval

    def __getitem__(self, subscript):
        return self.values[subscript]

    def entry(self, mi):
        """ExactScalar if available, else float."""
        sub = mi.subscript if isinstance(mi, MultiIndex) else tuple(mi)
        if self.exact is not None:
            return self.exact[sub]
        return float(self.values[sub])

    def truncated(self, p: int) -> "CoefficientTable":
        if not 0 <= p <= self.p:
            raise ValueError(f"cannot truncate table of p={self.p} to p={p}")
        sl = (slice(0, p + 1),) * self.k
        ex_ = None if self.exact is None else self.exact[sl]
        return CoefficientTable(self.spec, self.basis, p, self.values[sl], ex_, self.engine, dict(self.meta))

    # serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        header = {
            "k": self.k,
            "p": self.p,
            "basis": self.basis.kind,
            "weights": [{"kind": w.kind, "q": w.q} for w in self.weights],
            "t": self.interval.t_start,
            "T": self.interval.t_end,
            "format_version": FORMAT_VERSION,
            "engine": self.engine,
            "exact": self.exact is not None,
            "index_order": "j_k..j_1",
        }
        doc = {"header": header, "entries": [float(v) for v in self.values.ravel()]}
        if self.exact is not None:
            doc["exact_entries"] = [e.as_triple() for e in self.exact.ravel()]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "CoefficientTable":
        h = doc["header"]
        if h.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported table format_version {h.get('format_version')!r}")
        interval = TimeInterval(h["t"], h["T"])
        spec = KernelSpec(tuple(WeightFunction(w["kind"], w["q"]) for w in h["weights"]), interval)
        basis = BasisSystem(h["basis"], interval)
        k, p = int(h["k"]), int(h["p"])
        shape = (p + 1,) * k
        values = np.array(doc["entries"], dtype=float).reshape(shape)
        exact = None
        if "exact_entries" in doc:
            exact = np.empty(len(doc["exact_entries"]), dtype=object)
            exact[:] = [ExactScalar.from_triple(d, interval.delta) for d in doc["exact_entries"]]
            exact = exact.reshape(shape)
        return cls(spec, basis, p, values, exact, h.get("engine", "exact"))

    @classmethod
    def from_json(cls, text: str) -> "CoefficientTable":
        return cls.from_dict(json.loads(text))


def load_table(path) -> CoefficientTable:
    with open(path) as fh:
        return CoefficientTable.from_json(fh.read())


def build_table(spec: KernelSpec, basis: BasisSystem, p: int, *, exact: bool | None = None,
                max_entries: int | None = None) -> CoefficientTable:
    """All (p+1)**k coefficients.

    ``exact=None`` picks the rational engine for Legendre tables of at most
    ``AUTO_EXACT_ENTRIES`` entries and the collocation engine otherwise.
    Inner antiderivatives are shared across all outer indices.
    """
    _check_k(spec)
    if p < 0:
        raise ValueError(f"p must be nonnegative, got {p}")
    if spec.interval != basis.interval:
        raise ValueError("kernel and basis live on different intervals")
    n_entries = (p + 1) ** spec.k
    if exact is None:
        exact = basis.kind == LEGENDRE and n_entries <= AUTO_EXACT_ENTRIES
    if exact and basis.kind != LEGENDRE:
        raise ValueError("exact coefficients are only available for the Legendre basis")
    limit = max_entries if max_entries is not None else (MAX_EXACT_ENTRIES if exact else MAX_FLOAT_ENTRIES)
    if n_entries > limit:
        raise TableSizeError(f"table with {n_entries} entries exceeds the bound of {limit}")

    idx = [list(range(p + 1))] * spec.k
    delta = spec.interval.delta
    h = spec.half_power()
    if exact:
        unit = _exact_unit_values(spec.unit_weights(), idx)
        ex_arr = np.empty(unit.shape, dtype=object)
        for sub in itertools.product(range(p + 1), repeat=spec.k):
            ex_arr[sub] = _to_exact(unit[sub], sub, h, delta)
        values = np.vectorize(float, otypes=[float])(ex_arr)
        return CoefficientTable(spec, basis, p, values, ex_arr, "exact")
    unit, engine = _float_unit_values(basis.kind, spec.unit_weights(), idx)
    return CoefficientTable(spec, basis, p, np.asarray(unit) * delta ** (h / 2), None, engine)


# ---------------------------------------------------------------------------
# norms, residuals, traces


def kernel_norm_sq(spec: KernelSpec) -> ExactScalar:
    """||K||^2 = integral over t < t_1 < ... < t_k < T of prod psi_l(t_l)**2."""
    r = ex.simplex_monomial_integral([2 * w.q for w in spec.weights])
    return ExactScalar(r, 1, 2 * spec.half_power(), spec.interval.delta)


def _sum_exact(items) -> ExactScalar | int:
    acc = 0
    for it in items:
        acc = acc + it
    return acc


def parseval_residual(table: CoefficientTable, p: int | None = None, *, exact: bool = False):
    """||K||^2 - sum of C**2 over all entries with indices <= p.

    Computed exactly when the table carries exact values (and then returned as
    ExactScalar if ``exact=True``).
    """
    t = table if p is None or p == table.p else table.truncated(p)
    norm = kernel_norm_sq(t.spec)
    if t.exact is not None:
        total = _sum_exact(e * e for e in t.exact.ravel())
        res = norm - total if isinstance(total, ExactScalar) else norm
        return res if exact else float(res)
    if exact:
        raise ValueError("table has no exact values")
    return float(norm) - float(np.sum(t.values**2))


def _validate_pairs(k: int, pairs):
    pairs = [tuple(int(a) for a in pr) for pr in pairs]
    if not pairs:
        raise ValueError("contraction needs at least one pair")
    seen = []
    for pr in pairs:
        if len(pr) != 2 or pr[0] == pr[1]:
            raise ValueError(f"malformed pair {pr}")
        for a in pr:
            if not 1 <= a <= k:
                raise ValueError(f"position {a} outside 1..{k}")
            if a in seen:
                raise ValueError(f"position {a} used twice in contraction")
            seen.append(a)
    free = [l for l in range(k, 0, -1) if l not in seen]
    return pairs, free


def trace_sum(table: CoefficientTable, pairs, *, mode: str = "scalar", p: int | None = None):
    """Contract pairs of index positions (1-based, position 1 innermost).

    Paired positions share one summation index 0..p.  In ``"scalar"`` mode the
    free positions are summed too; in ``"vector"`` mode the result is an array
    over the free positions in subscript order (outermost first).

    Example: ``trace_sum(t4, [(1, 2), (3, 4)])`` is sum C_{j4 j4 j1 j1}.
    """
    if mode not in ("scalar", "vector"):
        raise ValueError(f"mode must be 'scalar' or 'vector', got {mode!r}")
    k = table.k
    pairs, free = _validate_pairs(k, pairs)
    vals = table.values if p is None else table.truncated(p).values
    letters = {}
    for n, (a, b) in enumerate(pairs):
        letters[a] = letters[b] = "abcd"[n]
    for n, l in enumerate(free):
        letters[l] = "wxyz"[n]
    sub_in = "".join(letters[l] for l in range(k, 0, -1))
    sub_out = "".join(letters[l] for l in free) if mode == "vector" else ""
    res = np.einsum(f"{sub_in}->{sub_out}", vals)
    return float(res) if sub_out == "" else res


def trace_sum_exact(table: CoefficientTable, pairs, *, free_values=None, p: int | None = None) -> ExactScalar:
    """Exact contracted sum with the free positions fixed to ``free_values``.

    ``free_values`` maps position -> index.  Raises ValueError when the terms do
    not share one radicand and power of delta (they always do when every
    position is either paired or fixed).
    """
    if table.exact is None:
        raise ValueError("table has no exact values")
    k = table.k
    pairs, free = _validate_pairs(k, pairs)
    free_values = dict(free_values or {})
    if set(free_values) != set(free):
        raise ValueError(f"free positions {free} need fixed values, got {sorted(free_values)}")
    top = table.p if p is None else p
    acc = 0
    for js in itertools.product(range(top + 1), repeat=len(pairs)):
        pos = dict(free_values)
        for (a, b), j in zip(pairs, js):
            pos[a] = pos[b] = j
        acc = acc + table.exact[tuple(pos[l] for l in range(k, 0, -1))]
    if acc == 0:
        return ExactScalar(0, 1, table.spec.half_power(), table.interval.delta)
    return acc

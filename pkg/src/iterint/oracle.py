"""Fine-grid Wiener paths and brute-force discrete iterated integrals.

A path stores its increments only.  On the uniform grid tau_n = t + n*delta/N
(n = 0..N-1) the iterated Ito integral is approximated by the ordered
left-point sum

    sum_{n_k} ... sum_{n_1 < n_2} prod_l psi_l(tau_{n_l}) dw^(i_l)_{n_l},

evaluated in O(kN) with exclusive cumulative sums.  The Stratonovich value is
the Ito sum plus the diagonal corrections, each of which is again an ordered
sum with merged weights and a dt slot.

``mc_mse`` couples a path with its extracted draws and measures the
mean-square gap between this oracle and the truncated expansion.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSystem, TimeInterval, WeightFunction, weight_eval
from .coeffs import KernelSpec, build_table
from .expansion import (
    GaussianDraws,
    correction_patterns,
    ito_expand,
    merge_pattern,
    strat_expand,
)
from .rng import GENERATOR, PATH_DOMAIN, normal_stream

__all__ = [
    "WienerPath",
    "simulate_path",
    "simulate_paths",
    "discrete_iterated_ito",
    "discrete_multiple",
    "discrete_stratonovich",
    "extract_draws",
    "MCConfig",
    "MCResult",
    "mc_mse",
    "MSE_CSV_COLUMNS",
    "mse_csv",
]


@dataclass(frozen=True)
class WienerPath:
    """Increments of components 1..m on a uniform partition.

    ``increments`` has shape ``(..., m, N)``; leading axes index independent paths.
    """

    interval: TimeInterval
    increments: np.ndarray

    @property
    def N(self) -> int:
        return self.increments.shape[-1]

    @property
    def m(self) -> int:
        return self.increments.shape[-2]

    @property
    def step(self) -> float:
        return self.interval.delta / self.N

    @property
    def nodes(self) -> np.ndarray:
        """Left endpoints tau_0..tau_{N-1}."""
        return self.interval.t_start + self.step * np.arange(self.N)

    def component(self, i: int) -> np.ndarray:
        """Increments of component ``i``; component 0 is the time step."""
        if i == 0:
            return np.full(self.increments.shape[:-2] + (self.N,), self.step)
        if not 1 <= i <= self.m:
            raise ValueError(f"component {i} outside 0..{self.m}")
        return self.increments[..., i - 1, :]

    def total(self, i: int) -> np.ndarray:
        return self.component(i).sum(axis=-1)

    def positions(self, i: int) -> np.ndarray:
        """w^(i) at tau_0..tau_N relative to w^(i)_t."""
        inc = self.component(i)
        zero = np.zeros(inc.shape[:-1] + (1,))
        return np.concatenate([zero, np.cumsum(inc, axis=-1)], axis=-1)


def simulate_path(seed: int, N: int, m: int, interval: TimeInterval, *, path_index: int = 0) -> WienerPath:
    """One reproducible path; ``path_index`` selects an independent stream."""
    return simulate_paths(seed, N, m, interval, [path_index])[0]


def simulate_paths(seed: int, N: int, m: int, interval: TimeInterval, path_indices) -> list | WienerPath:
    """Paths for several indices.

    Returns a list of single paths when ``path_indices`` is a list, otherwise a
    batched path of shape (len, m, N) for a range/array.
    """
    if N < 1 or m < 1:
        raise ValueError("need N >= 1 and m >= 1")
    idx = list(path_indices)
    scale = np.sqrt(interval.delta / N)
    inc = np.empty((len(idx), m, N))
    for a, pi in enumerate(idx):
        for i in range(1, m + 1):
            inc[a, i - 1] = scale * normal_stream(seed, PATH_DOMAIN, pi, i, N)
    if isinstance(path_indices, list):
        return [WienerPath(interval, inc[a]) for a in range(len(idx))]
    return WienerPath(interval, inc)


def _exclusive_cumsum(x: np.ndarray) -> np.ndarray:
    out = np.cumsum(x, axis=-1)
    out[..., 1:] = out[..., :-1]
    out[..., 0] = 0.0
    return out


def _as_weights(weights, k: int | None = None) -> tuple:
    if weights is None:
        return (WeightFunction.one(),) * k
    return tuple(w if isinstance(w, WeightFunction) else WeightFunction.power(w) for w in weights)


def discrete_iterated_ito(weights, comps, path: WienerPath):
    """Ordered left-point sum for the iterated Ito integral (k <= 4)."""
    comps = tuple(int(i) for i in comps)
    k = len(comps)
    if not 1 <= k <= 4:
        raise ValueError(f"unsupported multiplicity {k}")
    weights = _as_weights(weights, k)
    if len(weights) != k:
        raise ValueError("weights and components disagree on k")
    tau = path.nodes
    acc = None
    for w, i in zip(weights, comps):
        term = np.asarray(weight_eval(w, path.interval, tau)) * path.component(i)
        acc = term if acc is None else term * _exclusive_cumsum(acc)
    return acc.sum(axis=-1)


def discrete_multiple(grid_function, comps, path: WienerPath):
    """Full (unordered) multiple sum of Phi(tau_{n_1}, ..., tau_{n_k}) prod dw.

    ``grid_function`` receives k broadcastable node arrays (t_1 first) and
    returns the values on the (N,)*k grid.  Cost is N**k.
    """
    comps = tuple(int(i) for i in comps)
    k = len(comps)
    tau = path.nodes
    grids = [tau.reshape((1,) * l + (-1,) + (1,) * (k - l - 1)) for l in range(k)]
    phi = np.broadcast_to(np.asarray(grid_function(*grids), dtype=float), (path.N,) * k)
    letters = "abcd"[:k]
    subs = [letters] + ["..." + c for c in letters]
    ops = [phi] + [path.component(i) for i in comps]
    return np.einsum(",".join(subs) + "->...", *ops, optimize=True)


def discrete_stratonovich(weights, comps, path: WienerPath):
    """Ito sum plus the diagonal corrections sum_r 2^-r sum_{A_{k,r}}."""
    comps = tuple(int(i) for i in comps)
    k = len(comps)
    weights = _as_weights(weights, k)
    total = discrete_iterated_ito(weights, comps, path)
    for pat in correction_patterns(k):
        ind, mw, mc = merge_pattern(weights, comps, pat)
        if ind:
            total = total + 0.5**pat.order * discrete_iterated_ito(mw, mc, path)
    return total


def extract_draws(path: WienerPath, basis: BasisSystem, p: int) -> GaussianDraws:
    """Left-point zeta_j^(i) = sum_n phi_j(tau_n) dw^(i)_n; column 0 exact."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    if basis.interval != path.interval:
        raise ValueError("basis and path live on different intervals")
    phi = basis.values(p, path.nodes)  # (N, p+1)
    lead = path.increments.shape[:-2]
    zeta = np.zeros(lead + (p + 1, path.m + 1))
    zeta[..., 1:] = np.einsum("...in,nj->...ji", path.increments, phi)
    zeta[..., 0, 0] = np.sqrt(path.interval.delta)
    return GaussianDraws(zeta)


@dataclass(frozen=True)
class MCConfig:
    k: int
    comps: tuple
    p: int
    N: int = 4096
    M: int = 4000
    seed: int = 0
    basis: str = "legendre"
    interval: TimeInterval = field(default_factory=lambda: TimeInterval(0.0, 1.0))
    weights: tuple | None = None  # exponents q_l or WeightFunction, innermost first
    integral: str = "stratonovich"  # or "ito"
    chunk: int = 250

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be at least 2")
        if len(self.comps) != self.k:
            raise ValueError(f"need {self.k} components, got {len(self.comps)}")
        if self.integral not in ("stratonovich", "ito"):
            raise ValueError(f"integral must be 'stratonovich' or 'ito', got {self.integral!r}")


@dataclass(frozen=True)
class MCResult:
    estimate: float
    std_error: float
    M: int
    seed: int
    p: int
    N: int
    runtime_ms: float
    generator: str = GENERATOR

    def row(self) -> dict:
        return {
            "p": self.p, "N": self.N, "M": self.M, "seed": self.seed,
            "estimate": repr(self.estimate), "std_error": repr(self.std_error),
            "runtime_ms": f"{self.runtime_ms:.1f}",
        }


def mc_mse(cfg: MCConfig) -> MCResult:
    """Mean and standard error of (oracle - expansion)**2 over M coupled paths.

    Path a uses stream a of the seed, so results do not depend on ``chunk``.
    """
    start = time.perf_counter()
    weights = _as_weights(cfg.weights, cfg.k)
    basis = BasisSystem(cfg.basis, cfg.interval)
    table = build_table(KernelSpec(weights, cfg.interval), basis, cfg.p)
    m = max(max(cfg.comps), 1)
    if cfg.integral == "stratonovich":
        expand, oracle = strat_expand, discrete_stratonovich
    else:
        expand, oracle = ito_expand, discrete_iterated_ito
    sq = np.empty(cfg.M)
    for lo in range(0, cfg.M, cfg.chunk):
        hi = min(lo + cfg.chunk, cfg.M)
        path = simulate_paths(cfg.seed, cfg.N, m, cfg.interval, range(lo, hi))
        draws = extract_draws(path, basis, cfg.p)
        approx = expand(table, draws, cfg.comps)
        exact = oracle(weights, cfg.comps, path)
        sq[lo:hi] = (exact - approx) ** 2
    est = float(np.mean(sq))
    se = float(np.std(sq, ddof=1) / np.sqrt(cfg.M))
    ms = 1000.0 * (time.perf_counter() - start)
    return MCResult(est, se, cfg.M, cfg.seed, cfg.p, cfg.N, ms)


MSE_CSV_COLUMNS = ("p", "N", "M", "seed", "estimate", "std_error", "runtime_ms")


def mse_csv(results, *, runtime: bool = True) -> str:
    """CSV text with one row per (p, N) cell; ``runtime=False`` drops the timing column."""
    cols = MSE_CSV_COLUMNS if runtime else MSE_CSV_COLUMNS[:-1]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row())
    return buf.getvalue()

"""Truncated expansions of iterated Ito and Stratonovich integrals.

With Gaussian variables zeta_j^(i) = int phi_j dw^(i) and a coefficient table
C, the Stratonovich expansion is the plain multiple sum

    sum_{j_1..j_k <= p} C[j_k..j_1] zeta_{j_1}^(i_1) ... zeta_{j_k}^(i_k),

and the Ito expansion subtracts, for every set of disjoint position pairs
(a, b) with i_a == i_b != 0, the same sum with j_a == j_b and the paired zeta
factors removed, with alternating sign.  For k <= 4 the pair sets are: none,
six single pairs and three double pairs (k = 4).

Component index 0 stands for w^(0)_tau = tau; its zeta column is the exact
deterministic value sqrt(delta) * [j == 0].
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, TimeInterval, WeightFunction
from .coeffs import CoefficientTable, KernelSpec, build_table, parseval_residual
from .rng import DRAWS_DOMAIN, GENERATOR, normal_stream

__all__ = [
    "HypothesisError",
    "ComponentVector",
    "GaussianDraws",
    "CorrectionPattern",
    "sample_draws",
    "correction_patterns",
    "merge_pattern",
    "ito_expand",
    "strat_expand",
    "ito_strat_convert",
    "truncation_mse_distinct",
]


class HypothesisError(ValueError):
    """The requested expansion is outside the hypotheses it is proven under."""


@dataclass(frozen=True)
class ComponentVector:
    """Wiener component indices ``(i_1, ..., i_k)``; 0 denotes the time component."""

    indices: tuple
    m: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        for i in idx:
            if not 0 <= i <= self.m:
                raise ValueError(f"component {i} outside 0..{self.m}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, *indices, m: int | None = None) -> "ComponentVector":
        return cls(tuple(indices), max(indices) if m is None else m)

    @property
    def k(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def pairwise_distinct_nonzero(self) -> bool:
        return 0 not in self.indices and len(set(self.indices)) == len(self.indices)


@dataclass(frozen=True)
class GaussianDraws:
    """zeta[j, i] for j = 0..p and i = 0..m (column 0 deterministic).

    ``zeta`` may carry leading batch axes: shape ``(..., p + 1, m + 1)``.
    """

    zeta: np.ndarray
    seed: int | None = None
    stream: int = 0
    generator: str = GENERATOR

    @property
    def p(self) -> int:
        return self.zeta.shape[-2] - 1

    @property
    def m(self) -> int:
        return self.zeta.shape[-1] - 1


@dataclass(frozen=True)
class CorrectionPattern:
    """Element ``(s_r, ..., s_1)`` of A_{k,r}: slots s and s+1 collapse into one dt slot."""

    k: int
    positions: tuple

    def __post_init__(self):
        pos = tuple(int(s) for s in self.positions)
        asc = sorted(pos)
        if pos != tuple(reversed(asc)):
            raise ValueError("positions must be listed in decreasing order (s_r, ..., s_1)")
        if any(not 1 <= s <= self.k - 1 for s in pos):
            raise ValueError(f"positions must lie in 1..{self.k - 1}")
        if any(b <= a + 1 for a, b in zip(asc, asc[1:])):
            raise ValueError("positions must satisfy s_l > s_{l-1} + 1")
        object.__setattr__(self, "positions", pos)

    @property
    def order(self) -> int:
        return len(self.positions)


def _components(comps, m: int | None = None) -> ComponentVector:
    if isinstance(comps, ComponentVector):
        return comps
    comps = tuple(comps)
    return ComponentVector(comps, max(comps) if m is None else m)


def sample_draws(seed: int, p: int, m: int, basis: BasisSystem | TimeInterval, *, stream: int = 0
                 ) -> GaussianDraws:
    """Reproducible draws; zeta_j^(i) depends only on (seed, stream, i, j)."""
    if p < 0 or m < 1:
        raise ValueError("need p >= 0 and m >= 1")
    interval = basis.interval if isinstance(basis, BasisSystem) else basis
    zeta = np.zeros((p + 1, m + 1))
    zeta[0, 0] = np.sqrt(interval.delta)
    for i in range(1, m + 1):
        zeta[:, i] = normal_stream(seed, DRAWS_DOMAIN, stream, i, p + 1)
    return GaussianDraws(zeta, seed, stream)


def _zeta_array(draws) -> np.ndarray:
    return draws.zeta if isinstance(draws, GaussianDraws) else np.asarray(draws, dtype=float)


def _partial_matchings(k: int):
    """All sets of disjoint pairs of positions 1..k (including the empty set)."""
    def rec(rest):
        if not rest:
            yield ()
            return
        first, tail = rest[0], rest[1:]
        yield from rec(tail)
        for n, other in enumerate(tail):
            for m in rec(tail[:n] + tail[n + 1:]):
                yield ((first, other),) + m
    return list(rec(tuple(range(1, k + 1))))


def _truncations(table: CoefficientTable, zeta: np.ndarray, p) -> list:
    """Per-position truncation p_l (position 1 first)."""
    k = table.k
    if p is None:
        p = table.p
    if np.ndim(p):
        ps = [int(x) for x in p]
        if len(ps) != k:
            raise ValueError(f"need {k} truncation parameters, got {len(ps)}")
        if k != 2 and len(set(ps)) > 1:
            raise ValueError("distinct truncation parameters are only supported for k = 2")
    else:
        ps = [int(p)] * k
    if min(ps) < 0 or max(ps) > table.p:
        raise ValueError(f"truncation {ps} outside table range 0..{table.p}")
    if max(ps) > zeta.shape[-2] - 1:
        raise ValueError(f"draws only cover j <= {zeta.shape[-2] - 1}")
    return ps


def _wick_sum(table: CoefficientTable, zeta: np.ndarray, comps: ComponentVector, ps, ito: bool):
    k = table.k
    if comps.k != k:
        raise ValueError(f"component vector has k={comps.k}, table has k={k}")
    if max(comps.indices) > zeta.shape[-1] - 1:
        raise ValueError(f"draws only cover components 0..{zeta.shape[-1] - 1}")
    i = {l: comps.indices[l - 1] for l in range(1, k + 1)}
    letters = {l: "abcd"[l - 1] for l in range(1, k + 1)}
    matchings = _partial_matchings(k) if ito else [()]
    total = 0.0
    for match in matchings:
        if any(not (i[a] == i[b] != 0) for a, b in match):
            continue
        let = dict(letters)
        cut = {l: ps[l - 1] for l in range(1, k + 1)}
        paired = set()
        for a, b in match:
            let[b] = let[a]
            cut[a] = cut[b] = min(cut[a], cut[b])
            paired.update((a, b))
        sub_c = "".join(let[l] for l in range(k, 0, -1))
        c = table.values[tuple(slice(0, cut[l] + 1) for l in range(k, 0, -1))]
        operands, subs = [c], [sub_c]
        for l in range(1, k + 1):
            if l not in paired:
                operands.append(zeta[..., : cut[l] + 1, i[l]])
                subs.append("..." + let[l])
        term = np.einsum(",".join(subs) + "->...", *operands, optimize=len(operands) > 2)
        total = total + (-1) ** len(match) * term
    return float(total) if np.ndim(total) == 0 else total


def ito_expand(table: CoefficientTable, draws, comps, p=None):
    """Truncated expansion of the iterated Ito integral J[psi^(k)] (k <= 4).

    ``p`` defaults to ``table.p``; for k = 2 a pair ``(p1, p2)`` truncates the
    inner and outer index separately.
    """
    zeta = _zeta_array(draws)
    comps = _components(comps)
    return _wick_sum(table, zeta, comps, _truncations(table, zeta, p), ito=True)


def strat_expand(table: CoefficientTable, draws, comps, p=None):
    """Truncated expansion of the iterated Stratonovich integral J*[psi^(k)].

    Checked hypotheses: for k = 3 every component must be a Wiener component
    (1..m); for k = 4 every weight must be identically 1.  Smooth polynomial
    weights satisfy the differentiability conditions for k = 2, 3.
    """
    zeta = _zeta_array(draws)
    comps = _components(comps)
    k = table.k
    if k == 3 and 0 in comps.indices:
        raise HypothesisError(
            "triple Stratonovich expansion is only established for Wiener components i_1, i_2, i_3 in 1..m; "
            f"got components {comps.indices}"
        )
    if k == 4 and not table.spec.all_ones:
        raise HypothesisError("fourth-multiplicity Stratonovich expansion requires psi_1 = ... = psi_4 = 1")
    return _wick_sum(table, zeta, comps, _truncations(table, zeta, p), ito=False)


def correction_patterns(k: int, r: int | None = None) -> list:
    """Elements of A_{k,r} (all r = 1..floor(k/2) when ``r`` is None)."""
    orders = range(1, k // 2 + 1) if r is None else [r]
    out = []
    for rr in orders:
        for combo in itertools.combinations(range(1, k), rr):
            if all(b > a + 1 for a, b in zip(combo, combo[1:])):
                out.append(CorrectionPattern(k, tuple(reversed(combo))))
    return out


def merge_pattern(weights, comps, pattern: CorrectionPattern):
    """Collapse slots (s, s+1) for each s in ``pattern``.

    Returns ``(indicator, merged_weights, merged_components)``; the merged slot
    carries psi_s * psi_{s+1} and component 0 (a dt integration).
    """
    weights, comps = tuple(weights), tuple(comps)
    k = len(weights)
    if pattern.k != k or len(comps) != k:
        raise ValueError("pattern, weights and components disagree on k")
    ss = set(pattern.positions)
    indicator = all(comps[s - 1] == comps[s] != 0 for s in ss)
    new_w, new_c = [], []
    l = 1
    while l <= k:
        if l in ss:
            new_w.append(weights[l - 1] * weights[l])
            new_c.append(0)
            l += 2
        else:
            new_w.append(weights[l - 1])
            new_c.append(comps[l - 1])
            l += 1
    return indicator, tuple(new_w), tuple(new_c)


@functools.lru_cache(maxsize=64)
def _cached_table(spec: KernelSpec, basis: BasisSystem, p: int) -> CoefficientTable:
    return build_table(spec, basis, p)


def ito_strat_convert(weights, comps, basis: BasisSystem, draws, p: int):
    """Stratonovich-minus-Ito correction sum_r 2^-r sum_{A_{k,r}} J[psi]^{s_r..s_1}.

    Each correction is a lower-multiplicity Ito integral with merged weights and
    a dt slot, evaluated by :func:`ito_expand` on the same draws and truncation.
    """
    weights = tuple(w if isinstance(w, WeightFunction) else WeightFunction.power(w) for w in weights)
    comps = tuple(_components(comps).indices)
    k = len(weights)
    if not 1 <= k <= 4:
        raise ValueError(f"unsupported multiplicity {k}")
    total = 0.0
    for pat in correction_patterns(k):
        ind, mw, mc = merge_pattern(weights, comps, pat)
        if not ind:
            continue
        table = _cached_table(KernelSpec(mw, basis.interval), basis, p)
        total = total + 0.5**pat.order * ito_expand(table, draws, ComponentVector(mc, max(comps)), p)
    return total


def truncation_mse_distinct(table: CoefficientTable, p: int | None = None) -> float:
    """Mean-square truncation error for pairwise distinct nonzero components: ||K||^2 - sum C^2."""
    return parseval_residual(table, p)

"""Coefficient-level trace identities and their convergence reports.

A trace contracts two index positions of a coefficient table.  The limits
checked here are

* pair:   sum_j C_{jj} -> 1/2 int psi_1 psi_2;
* triple: contraction of neighbouring positions tends to 1/2 times a
  k = 2 coefficient whose merged slot carries psi_s psi_{s+1} and a dt
  integration; the outer-inner contraction tends to 0;
* quad (psi = 1): neighbouring contractions tend to 1/2 times a k = 3
  all-ones coefficient with the merged slot fixed at index 0 (times
  sqrt(delta)), non-neighbouring ones to 0, and the double contractions to
  delta**2 / 8, 0 and 0.

Vector checks compare every free index up to ``free_max`` and report the
largest gap.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .basis import BasisSystem, WeightFunction
from .coeffs import CoefficientTable, KernelSpec, build_table, trace_sum, trace_sum_exact
from .exact import ExactScalar

__all__ = [
    "TraceCheckReport",
    "TOLERANCES",
    "check_pair_trace",
    "check_triple_traces",
    "check_quad_traces",
    "reports_to_json",
    "reports_to_csv",
]

# Gap bounds: a check passes when gap(p) <= c * scale / (p + 1) at every grid
# point.  The constants c were calibrated on a reference run (p up to 200 for
# k = 2, 3 and up to 50 for k = 4, both bases, several weights) with a 1.5x
# margin over the largest observed gap * (p + 1) / scale.
TOLERANCES = {
    "pair": 0.15,
    "triple_i": 0.15,
    "triple_ii": 0.15,
    "triple_iii": 0.3,
    "quad_4411": 0.15,
    "quad_4141": 0.1,
    "quad_4224": 0.1,
    "quad_pair_12": 0.1,
    "quad_pair_23": 0.1,
    "quad_pair_34": 0.1,
    "quad_pair_13": 0.1,
    "quad_pair_24": 0.1,
    "quad_pair_14": 0.1,
}


@dataclass
class TraceCheckReport:
    identity: str
    p_grid: list
    partial_sums: list  # floats (scalar) or nested lists over free indices (vector)
    target: float | list
    gaps: list  # max absolute gap per grid point
    scale: float  # natural magnitude delta**(h/2) of the sum
    tolerance: float | None = None  # rate constant c, see TOLERANCES
    exact_gaps: list | None = None  # string fractions when computed exactly
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = list(self.p_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("p grid must be strictly increasing")
        if not all(math.isfinite(g) for g in self.gaps):
            raise ValueError("non-finite gap")

    @property
    def monotone(self) -> bool:
        """Gaps nonincreasing over the last three grid points."""
        tail = self.gaps[-3:]
        return all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(tail, tail[1:]))

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.gaps, self.gaps[1:]))

    @property
    def final_gap(self) -> float:
        return self.gaps[-1]

    @property
    def passed(self) -> bool:
        if self.tolerance is None:
            return True
        return all(g <= self.tolerance * self.scale / (p + 1) for p, g in zip(self.p_grid, self.gaps))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["monotone"] = self.monotone
        d["passed"] = self.passed
        return d


def _grid(p_grid) -> list:
    grid = sorted({int(p) for p in p_grid})
    if not grid or grid[0] < 0:
        raise ValueError("p grid must hold nonnegative integers")
    return grid


@functools.lru_cache(maxsize=32)
def _table(spec: KernelSpec, basis: BasisSystem, p: int) -> CoefficientTable:
    return build_table(spec, basis, p)


def _as_weight(w) -> WeightFunction:
    return w if isinstance(w, WeightFunction) else WeightFunction.power(int(w))


def _unit_integral(w: WeightFunction) -> Fraction:
    """int_0^1 of the unit-interval monomial of ``w``."""
    sign, q = w.unit_monomial()
    return Fraction(sign, q + 1)


def check_pair_trace(weights, basis: BasisSystem, p_grid) -> TraceCheckReport:
    """sum_{j<=p} C_{jj} against 1/2 int psi_1 psi_2 (exact gaps for Legendre)."""
    w1, w2 = (_as_weight(w) for w in weights)
    grid = _grid(p_grid)
    iv = basis.interval
    spec = KernelSpec((w1, w2), iv)
    table = _table(spec, basis, grid[-1])
    h = spec.half_power()
    target_exact = ExactScalar(_unit_integral(w1 * w2) / 2, 1, h, iv.delta)
    target = float(target_exact)
    sums, gaps, exact_gaps = [], [], None
    if table.exact is not None:
        exact_gaps = []
        for p in grid:
            s = trace_sum_exact(table, [(1, 2)], p=p)
            g = s - target_exact
            sums.append(float(s))
            gaps.append(abs(float(g)))
            exact_gaps.append(str(g.r) if g.n == 1 else repr(g))
    else:
        for p in grid:
            s = trace_sum(table, [(1, 2)], p=p)
            sums.append(s)
            gaps.append(abs(s - target))
    return TraceCheckReport(
        "pair", grid, sums, target, gaps, iv.delta ** (h / 2), TOLERANCES["pair"], exact_gaps,
        {"weights": [w1.label(), w2.label()], "basis": basis.kind},
    )


def _vector_report(identity, table_full, pairs, target_vec, grid, free_max, scale):
    sums, gaps = [], []
    for p in grid:
        f = min(free_max, p)
        v = np.asarray(trace_sum(table_full, pairs, mode="vector", p=p))
        v = v[(slice(0, f + 1),) * v.ndim]
        t = target_vec[(slice(0, f + 1),) * v.ndim]
        sums.append(v.tolist())
        gaps.append(float(np.max(np.abs(v - t))))
    f = min(free_max, grid[0])
    return TraceCheckReport(
        identity, grid, sums, target_vec[(slice(0, f + 1),) * target_vec.ndim].tolist(), gaps, scale,
        TOLERANCES.get(identity), None, {"pairs": [list(p) for p in pairs], "free_max": free_max},
    )


def check_triple_traces(basis: BasisSystem, p_grid, weights=None, *, free_max: int = 4) -> list:
    """Three vector checks on a k = 3 table; ``weights`` default to psi = 1."""
    grid = _grid(p_grid)
    iv = basis.interval
    w = tuple(_as_weight(x) for x in weights) if weights is not None else (WeightFunction.one(),) * 3
    spec = KernelSpec(w, iv)
    table = _table(spec, basis, grid[-1])
    fm = min(free_max, grid[-1])
    scale = iv.delta ** (spec.half_power() / 2)
    root = math.sqrt(iv.delta)
    # (i) positions 1, 2 merged: kernel (psi_1 psi_2, psi_3), merged slot index 0
    t_i = _table(KernelSpec((w[0] * w[1], w[2]), iv), basis, fm).values[:, 0] * root / 2
    # (ii) positions 2, 3 merged: kernel (psi_1, psi_2 psi_3)
    t_ii = _table(KernelSpec((w[0], w[1] * w[2]), iv), basis, fm).values[0, :] * root / 2
    t_iii = np.zeros(fm + 1)
    return [
        _vector_report("triple_i", table, [(1, 2)], t_i, grid, free_max, scale),
        _vector_report("triple_ii", table, [(2, 3)], t_ii, grid, free_max, scale),
        _vector_report("triple_iii", table, [(1, 3)], t_iii, grid, free_max, scale),
    ]


_QUAD_SCALARS = {
    "quad_4411": ([(1, 2), (3, 4)], Fraction(1, 8)),
    "quad_4141": ([(1, 3), (2, 4)], Fraction(0)),
    "quad_4224": ([(1, 4), (2, 3)], Fraction(0)),
}


def check_quad_traces(basis: BasisSystem, p_grid, *, free_max: int = 3, vectors: bool = True) -> list:
    """Three scalar and six vector checks on the all-ones k = 4 table."""
    grid = _grid(p_grid)
    iv = basis.interval
    spec = KernelSpec.ones(4, iv)
    table = _table(spec, basis, grid[-1])
    scale = iv.delta**2
    reports = []
    for name, (pairs, target) in _QUAD_SCALARS.items():
        t = float(target) * scale
        sums = [trace_sum(table, pairs, p=p) for p in grid]
        reports.append(TraceCheckReport(
            name, grid, sums, t, [abs(s - t) for s in sums], scale, TOLERANCES[name], None,
            {"pairs": [list(pr) for pr in pairs]},
        ))
    if not vectors:
        return reports
    fm = min(free_max, grid[-1])
    c3 = _table(KernelSpec.ones(3, iv), basis, fm).values * math.sqrt(iv.delta) / 2
    neighbour_targets = {
        (1, 2): c3[:, :, 0],  # free (j4, j3)
        (2, 3): c3[:, 0, :],  # free (j4, j1)
        (3, 4): c3[0, :, :],  # free (j2, j1)
    }
    for pr, tgt in neighbour_targets.items():
        reports.append(_vector_report(f"quad_pair_{pr[0]}{pr[1]}", table, [pr], tgt, grid, free_max, scale))
    for pr in [(1, 3), (2, 4), (1, 4)]:
        reports.append(_vector_report(f"quad_pair_{pr[0]}{pr[1]}", table, [pr], np.zeros((fm + 1, fm + 1)),
                                      grid, free_max, scale))
    return reports


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True)


def reports_to_csv(reports) -> str:
    """Convergence curves: identity,p,partial_sum,target,gap (vector sums as the max-gap entry)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["identity", "p", "partial_sum", "target", "gap"])
    for r in reports:
        for p, s, g in zip(r.p_grid, r.partial_sums, r.gaps):
            if isinstance(s, list):
                w.writerow([r.identity, p, "vector", "vector", repr(g)])
            else:
                w.writerow([r.identity, p, repr(s), repr(r.target), repr(g)])
    return buf.getvalue()

"""Dominant-complexity formulas and run-local operation counters.

Counting rule (all constants 1): an economy SVD of an ``m x n`` matrix costs
``m*n*min(m, n)`` units; a dense product ``(m x k) @ (k x n)`` costs ``m*k*n``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

METHODS = ("ms_tao", "multistart_ao", "codebook")


@dataclass
class OpCounter:
    """Accumulated dominant-operation units of one solver run, per update kind."""

    units: dict = field(default_factory=lambda: defaultdict(int))

    def add(self, n_units: int, kind: str = "other") -> None:
        if n_units < 0:
            raise ValueError("operation units must be nonnegative")
        self.units[kind] += int(n_units)

    def svd(self, m: int, n: int, kind: str = "other") -> None:
        self.add(m * n * min(m, n), kind)

    def matmul(self, m: int, k: int, n: int, kind: str = "other") -> None:
        self.add(m * k * n, kind)

    @property
    def total(self) -> int:
        return int(sum(self.units.values()))

    def by_kind(self) -> dict:
        return dict(sorted(self.units.items()))


def analytic_cost(method: str, params, n: int, r: int) -> float:
    """Table-style dominant cost with unit constants.

    ``params`` is an :class:`~risbeam.ms_tao.MsTaoParams`,
    :class:`~risbeam.baselines.AoParams` or :class:`~risbeam.baselines.CodebookParams`
    matching ``method``. A codebook ``n_codewords`` of ``None`` means ``N``.
    """
    if n < 1 or r < 1:
        raise ValueError(f"N and R must be positive, got N={n}, R={r}")
    if method == "ms_tao":
        return float(params.i_max * n * r**4)
    if method == "multistart_ao":
        return float(params.n_starts * params.i_outer * n**2 * (r + params.i_ris_inner))
    if method == "codebook":
        n_c = n if params.n_codewords is None else params.n_codewords
        return float(n_c * params.i_refine * n**2 * r)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def measure_run(solver, *args, **kwargs):
    """Run ``solver(*args, counter=..., **kwargs)`` and return ``(result, counter)``."""
    counter = OpCounter()
    result = solver(*args, counter=counter, **kwargs)
    return result, counter


def loglog_slope(ns, costs) -> float:
    """Least-squares slope of ``log(cost)`` against ``log(N)``."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(costs, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("ns and costs must be 1-D sequences of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 points for a slope fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("ns and costs must be strictly positive")
    lx, ly = np.log(x), np.log(y)
    lx -= lx.mean()
    return float(lx @ (ly - ly.mean()) / (lx @ lx))

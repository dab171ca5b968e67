"""Joint-detection spectral efficiency, feasibility audits and the Monte Carlo engine."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from risbeam.baselines import AoParams, CodebookParams, run_codebook, run_multistart_ao
from risbeam.channel_model import ChannelSet, SystemDims, composite_tensor, effective_channel, gen_rayleigh
from risbeam.complexity import METHODS, OpCounter
from risbeam.ms_tao import BeamformerSolution, MsTaoParams, run_ms_tao


class FeasibilityError(ValueError):
    pass


@dataclass(frozen=True)
class SnrConfig:
    """Linear SNR ``rho = P / sigma^2`` shared uniformly over ``r_total`` streams."""

    rho: float
    r_total: int

    def __post_init__(self):
        if not self.rho >= 0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if self.r_total < 1:
            raise ValueError("r_total must be >= 1")

    @classmethod
    def from_db(cls, snr_db: float, r_total: int) -> "SnrConfig":
        return cls(10.0 ** (snr_db / 10.0), r_total)


def sum_rate_jd(a, snr: SnrConfig) -> float:
    """``log2 det(I + rho/R A A^H)`` via the eigenvalues of ``A A^H``."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"effective channel must be square, got shape {a.shape}")
    lam = np.clip(np.linalg.eigvalsh(a @ np.conj(a).T), 0.0, None)
    return float(np.sum(np.log2(1.0 + snr.rho / snr.r_total * lam)))


@dataclass(frozen=True)
class FeasibilityReport:
    w_dev: float
    q_dev: float
    s_dev: float
    tol: float

    @property
    def ok(self) -> bool:
        return max(self.w_dev, self.q_dev, self.s_dev) <= self.tol

    def violations(self) -> list:
        names = {"W^H W = I": self.w_dev, "Q_k^H Q_k = I": self.q_dev, "|s_n| = 1": self.s_dev}
        return [k for k, v in names.items() if v > self.tol]


def _gram_dev(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(np.conj(m).T @ m - np.eye(m.shape[1]))))


def feasibility_audit(sol: BeamformerSolution, tol: float = 1e-9) -> FeasibilityReport:
    """Largest deviation from each constraint of the surrogate problem."""
    q_dev = max((_gram_dev(q) for q in sol.q_blocks), default=0.0)
    s_dev = float(np.max(np.abs(np.abs(sol.s) - 1.0)))
    return FeasibilityReport(w_dev=_gram_dev(sol.w), q_dev=q_dev, s_dev=s_dev, tol=tol)


def assemble_effective(ch: ChannelSet, sol: BeamformerSolution, tol: float = 1e-8) -> np.ndarray:
    """``A = W^H G diag(s) H Q`` (R x R) for a feasible solution."""
    report = feasibility_audit(sol, tol)
    if not report.ok:
        raise FeasibilityError(f"infeasible solution, violated: {', '.join(report.violations())}")
    return np.conj(sol.w).T @ effective_channel(ch, sol.s) @ sol.q


@dataclass(frozen=True)
class RunRecord:
    experiment: str
    method: str
    seed: int
    realization: int
    channel_digest: str
    dims: SystemDims
    snr_db: float
    se: float
    surrogate: float
    iterations: int
    op_units: int
    wall_ms: float


@dataclass(frozen=True)
class McExperiment:
    """One sweep point: fixed dims, a list of SNRs, the methods to compare."""

    dims: SystemDims
    snr_db: tuple = (10.0,)
    realizations: int = 100
    methods: tuple = METHODS
    tao: MsTaoParams = MsTaoParams()
    ao: AoParams = AoParams()
    codebook: CodebookParams = CodebookParams()
    experiment: str = "custom"
    timing: bool = False

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not self.snr_db:
            raise ValueError("need at least one SNR value")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"unknown methods {bad}; expected a subset of {METHODS}")


@dataclass(frozen=True)
class Summary:
    method: str
    snr_db: float
    count: int
    mean: float
    std: float


def realization_seeds(master_seed: int, r: int):
    """Channel and solver seed sequences of realization ``r``, independent of run order."""
    return (
        np.random.SeedSequence(master_seed, spawn_key=(r, 0)),
        np.random.SeedSequence(master_seed, spawn_key=(r, 1)),
    )


def solve(method: str, ch: ChannelSet, exp: McExperiment, solver_seed, counter=None):
    dims = exp.dims
    if method == "ms_tao":
        return run_ms_tao(composite_tensor(ch), dims, exp.tao, counter=counter)
    if method == "multistart_ao":
        return run_multistart_ao(ch, dims, exp.ao, seed=np.random.default_rng(solver_seed), counter=counter)
    if method == "codebook":
        return run_codebook(ch, dims, exp.codebook, counter=counter)
    raise ValueError(f"unknown method {method!r}")


def run_realization(exp: McExperiment, master_seed: int, r: int) -> list:
    """All methods on realization ``r``'s channel; one record per (method, SNR)."""
    ch_seed, solver_seed = realization_seeds(master_seed, r)
    ch = gen_rayleigh(exp.dims, np.random.default_rng(ch_seed))
    digest = ch.digest()
    out = []
    for method in exp.methods:
        counter = OpCounter()
        t0 = time.perf_counter()
        sol = solve(method, ch, exp, solver_seed, counter)
        wall = (time.perf_counter() - t0) * 1e3 if exp.timing else 0.0
        a = assemble_effective(ch, sol)
        surrogate = float(np.sum(np.abs(a) ** 2))
        for snr_db in exp.snr_db:
            se = sum_rate_jd(a, SnrConfig.from_db(snr_db, exp.dims.r))
            out.append(
                RunRecord(
                    experiment=exp.experiment,
                    method=method,
                    seed=master_seed,
                    realization=r,
                    channel_digest=digest,
                    dims=exp.dims,
                    snr_db=float(snr_db),
                    se=se,
                    surrogate=surrogate,
                    iterations=sol.iterations,
                    op_units=counter.total,
                    wall_ms=wall,
                )
            )
    return out


def summarize(records) -> list:
    """Mean and sample std of SE per (method, SNR), in first-seen order."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.method, rec.snr_db), []).append(rec.se)
    out = []
    for (method, snr_db), ses in groups.items():
        n = len(ses)
        mean = math.fsum(ses) / n
        std = math.sqrt(math.fsum((x - mean) ** 2 for x in ses) / (n - 1)) if n > 1 else 0.0
        out.append(Summary(method, snr_db, n, mean, std))
    return out


def monte_carlo(exp: McExperiment, master_seed: int, indices=None, workers: int = 1):
    """Run realizations ``indices`` (default ``range(exp.realizations)``).

    Returns ``(records, summaries)``; records are ordered by realization, then
    method, then SNR, whatever the number of worker processes.
    """
    indices = list(range(exp.realizations) if indices is None else indices)
    job = partial(run_realization, exp, master_seed)
    if workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(job, indices))
    else:
        batches = [job(r) for r in indices]
    records = [rec for batch in batches for rec in batch]
    return records, summarize(records)

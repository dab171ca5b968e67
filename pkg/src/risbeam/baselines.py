"""Comparison schemes: multi-start Frobenius AO and a DFT-codebook design.

Both operate on the separated channels ``G`` and ``H_k`` and maximize the
same surrogate ``||W^H G diag(s) H Q||_F^2`` as MS-TAO.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from risbeam.channel_model import ChannelSet, SystemDims, dft_training, effective_channel
from risbeam.decompositions import leading_left, unit_modulus_ascent
from risbeam.ms_tao import BeamformerSolution, blkdiag


@dataclass(frozen=True)
class AoParams:
    n_starts: int = 20
    i_outer: int = 30
    i_ris_inner: int = 25

    def __post_init__(self):
        if min(self.n_starts, self.i_outer, self.i_ris_inner) < 1:
            raise ValueError(f"AO parameters must all be >= 1: {self}")


@dataclass(frozen=True)
class CodebookParams:
    """``n_codewords=None`` uses one codeword per RIS element."""

    n_codewords: int | None = None
    i_refine: int = 10

    def __post_init__(self):
        if self.n_codewords is not None and self.n_codewords < 1:
            raise ValueError("n_codewords must be >= 1")
        if self.i_refine < 1:
            raise ValueError("i_refine must be >= 1")


def build_ris_quadratic(tmat, w, q_blocks, counter=None) -> np.ndarray:
    """``M = A^H A`` with ``A = (Q^T kron W^H) T``, so ``s^H M s`` is the surrogate."""
    tmat = np.asarray(tmat, dtype=np.complex128)
    q = blkdiag(q_blocks)
    w = np.asarray(w, dtype=np.complex128)
    if tmat.shape[0] != w.shape[0] * q.shape[0]:
        raise ValueError(
            f"composite matrix has {tmat.shape[0]} rows, expected M_R*M_T={w.shape[0] * q.shape[0]}"
        )
    op = np.kron(q.T, np.conj(w).T)
    if counter is not None:
        counter.matmul(op.shape[0], op.shape[1], tmat.shape[1], "ris")
        counter.matmul(tmat.shape[1], op.shape[0], tmat.shape[1], "ris")
    a = op @ tmat
    m = np.conj(a).T @ a
    return 0.5 * (m + np.conj(m).T)


def ris_quadratic_separated(ch: ChannelSet, w, q_blocks, counter=None) -> np.ndarray:
    """Same matrix as :func:`build_ris_quadratic`, built from ``G`` and ``H``.

    ``M = (G^H W W^H G) * (H Q Q^H H^H)^T`` (Hadamard product).
    """
    q = blkdiag(q_blocks)
    h = ch.h
    gw = np.conj(ch.g).T @ w
    hq = h @ q
    if counter is not None:
        n, m_r, m_t, r = ch.g.shape[1], ch.g.shape[0], h.shape[1], q.shape[1]
        counter.matmul(n, m_r, r, "ris")
        counter.matmul(n, m_t, r, "ris")
        counter.matmul(n, r, n, "ris")
        counter.matmul(n, r, n, "ris")
        counter.add(n * n, "ris")
    p = gw @ np.conj(gw).T
    z = hq @ np.conj(hq).T
    m = p * z.T
    return 0.5 * (m + np.conj(m).T)


def _combiner_step(h_eq, q, r, counter=None) -> np.ndarray:
    if counter is not None:
        counter.matmul(h_eq.shape[0], h_eq.shape[1], q.shape[1], "combiner")
    return leading_left(h_eq @ q, r, counter, "combiner")


def _precoder_step(h_eq, w, dims: SystemDims, counter=None) -> list:
    # conj of the leading left vectors of (W^H H_eq,k)^T = leading right vectors of W^H H_eq,k
    out = []
    wh = np.conj(w).T
    for sl, rk in zip(dims.tx_slices(), dims.r_k):
        blk = h_eq[:, sl]
        if counter is not None:
            counter.matmul(wh.shape[0], wh.shape[1], blk.shape[1], "precoder")
        out.append(np.conj(leading_left((wh @ blk).T, rk, counter, "precoder")))
    return out


def _effective(ch: ChannelSet, s, counter=None) -> np.ndarray:
    if counter is not None:
        counter.matmul(ch.g.shape[0], ch.g.shape[1], ch.h.shape[1], "effective")
    return effective_channel(ch, s)


def _initial_precoders(h_eq, dims: SystemDims, counter=None) -> list:
    """Leading right singular vectors of each user's effective block."""
    return [
        np.conj(leading_left(h_eq[:, sl].T, rk, counter, "precoder"))
        for sl, rk in zip(dims.tx_slices(), dims.r_k)
    ]


def _frob(w, h_eq, q) -> float:
    a = np.conj(w).T @ h_eq @ q
    return float(np.sum(a.real**2 + a.imag**2))


def run_ao_single(ch: ChannelSet, dims: SystemDims, s_init, p: AoParams = AoParams(), counter=None):
    """Alternating optimization of ``W``, ``Q_k`` and ``s`` from one RIS start.

    Each cycle solves the ``W`` and ``Q_k`` subproblems exactly and runs
    ``p.i_ris_inner`` monotone phase iterations on the RIS quadratic form, so
    ``f_trace`` never decreases.
    """
    s = np.asarray(s_init, dtype=np.complex128).ravel()
    if s.size != dims.n:
        raise ValueError(f"s_init has length {s.size}, expected N={dims.n}")
    h_eq = _effective(ch, s, counter)
    q = _initial_precoders(h_eq, dims, counter)
    f_trace = []
    f_init = float("nan")
    for i in range(p.i_outer):
        w = _combiner_step(h_eq, blkdiag(q), dims.r, counter)
        if i == 0:
            f_init = _frob(w, h_eq, blkdiag(q))
        q = _precoder_step(h_eq, w, dims, counter)
        m = ris_quadratic_separated(ch, w, q, counter)
        s, inner = unit_modulus_ascent(m, s, p.i_ris_inner, counter, "ris")
        h_eq = _effective(ch, s, counter)
        f_trace.append(inner[-1])
    return BeamformerSolution(
        w=w,
        q_blocks=q,
        s=s,
        f_trace=f_trace,
        iterations=p.i_outer,
        converged=False,
        f_init=f_init,
    )


def random_phases(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(n))


def run_multistart_ao(ch: ChannelSet, dims: SystemDims, p: AoParams = AoParams(), seed=0, counter=None):
    """Best-of-``p.n_starts`` AO runs from seeded uniform random RIS phases."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    best = None
    finals = []
    for _ in range(p.n_starts):
        sol = run_ao_single(ch, dims, random_phases(rng, dims.n), p, counter)
        finals.append(sol.objective)
        if best is None or sol.objective > best.objective:
            best = sol
    best.details["start_objectives"] = finals
    best.iterations = p.n_starts * p.i_outer
    return best


def codebook_matrix(n: int, n_codewords: int | None = None) -> np.ndarray:
    """First ``n_codewords`` columns of the ``N``-point DFT matrix."""
    n_c = n if n_codewords is None else n_codewords
    if n_c > n:
        raise ValueError(f"at most N={n} DFT codewords available, requested {n_c}")
    return dft_training(n, n)[:, :n_c]


def run_codebook(
    ch: ChannelSet,
    dims: SystemDims,
    p: CodebookParams = CodebookParams(),
    counter=None,
    snr=None,
):
    """Pick the DFT codeword whose refined ``(W, Q)`` gives the largest surrogate.

    For each codeword the RIS vector stays fixed while combiner and precoders
    alternate ``p.i_refine`` times. ``details["codeword_surrogate"]`` lists the
    per-codeword surrogate; when ``snr`` (an ``SnrConfig``) is given,
    ``details["codeword_se"]`` lists the per-codeword spectral efficiency too.
    """
    from risbeam.evaluation import sum_rate_jd

    book = codebook_matrix(dims.n, p.n_codewords)
    best = None
    surr, ses = [], []
    for c in range(book.shape[1]):
        s = book[:, c]
        h_eq = _effective(ch, s, counter)
        q = _initial_precoders(h_eq, dims, counter)
        trace = []
        for _ in range(p.i_refine):
            w = _combiner_step(h_eq, blkdiag(q), dims.r, counter)
            q = _precoder_step(h_eq, w, dims, counter)
            trace.append(_frob(w, h_eq, blkdiag(q)))
        surr.append(trace[-1])
        if snr is not None:
            ses.append(sum_rate_jd(np.conj(w).T @ h_eq @ blkdiag(q), snr))
        if best is None or trace[-1] > best.objective:
            best = BeamformerSolution(
                w=w,
                q_blocks=q,
                s=s.copy(),
                f_trace=trace,
                iterations=p.i_refine,
                converged=False,
                f_init=trace[0],
                details={"codeword": c},
            )
    best.details["codeword_surrogate"] = surr
    if snr is not None:
        best.details["codeword_se"] = ses
    return best


__all__ = [
    "AoParams",
    "CodebookParams",
    "build_ris_quadratic",
    "codebook_matrix",
    "random_phases",
    "ris_quadratic_separated",
    "run_ao_single",
    "run_codebook",
    "run_multistart_ao",
]

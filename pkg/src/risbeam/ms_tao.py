"""Multi-stream tensor alternating optimization (MS-TAO).

Cyclic updates of the receive combiner ``W``, the per-user precoders ``Q_k``
and the RIS phase vector ``s`` on low-dimensional projections of the
composite channel tensor ``T`` (``M_R x M_T x N``), maximizing
``||T x_1 W^H x_2 Q^T x_3 s^T||_F^2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from risbeam.channel_model import SystemDims
from risbeam.decompositions import DecompositionError, leading_left, phase_project
from risbeam.tensor_core import as_tensor3, frob_norm_sq, mode_product, unfold

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MsTaoParams:
    i_max: int = 30
    eps: float = 1e-6

    def __post_init__(self):
        if self.i_max < 1:
            raise ValueError("i_max must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass
class BeamformerSolution:
    """Combiner, per-user precoders and RIS vector returned by every solver.

    ``f_trace`` holds the surrogate after each full update cycle; ``f_init`` is
    the surrogate at the first point where all three variables are defined.
    """

    w: np.ndarray
    q_blocks: list
    s: np.ndarray
    f_trace: list
    iterations: int
    converged: bool
    f_init: float = float("nan")
    details: dict = field(default_factory=dict)

    @property
    def q(self) -> np.ndarray:
        return blkdiag(self.q_blocks)

    @property
    def objective(self) -> float:
        return self.f_trace[-1] if self.f_trace else float("nan")


def blkdiag(blocks) -> np.ndarray:
    return np.asarray(block_diag(*blocks), dtype=np.complex128)


def split_users(t, dims: SystemDims) -> list:
    """Per-user subtensors ``T_k`` (``M_R x M_{T,k} x N``)."""
    return [np.asfortranarray(t[:, sl, :]) for sl in dims.tx_slices()]


def init_precoders(t_blocks, r_k, counter=None) -> list:
    """``Q_k = conj`` of the leading ``R_k`` mode-2 left singular vectors of ``T_k``."""
    if len(t_blocks) != len(r_k):
        raise ValueError(f"{len(t_blocks)} user tensors but {len(r_k)} stream counts")
    out = []
    for k, (tk, rk) in enumerate(zip(t_blocks, r_k)):
        if rk > tk.shape[1]:
            raise ValueError(f"R_k exceeds M_{{T,k}} for user {k + 1}: {rk} > {tk.shape[1]}")
        out.append(np.conj(leading_left(unfold(tk, 2), rk, counter, "precoder")))
    return out


def init_ris(t, counter=None) -> np.ndarray:
    """Phase projection of the leading mode-3 left singular vector of ``T``."""
    return phase_project(leading_left(unfold(t, 3), 1, counter, "ris")[:, 0])


def update_combiner(t, q_blocks, s, r: int | None = None, counter=None) -> np.ndarray:
    q = blkdiag(q_blocks)
    r = q.shape[1] if r is None else r
    if r > t.shape[0]:
        raise ValueError(f"R={r} exceeds M_R={t.shape[0]}")
    if q.shape[0] != t.shape[1]:
        raise ValueError(f"precoder rows {q.shape[0]} do not match M_T={t.shape[1]}")
    t_w = mode_product(t, q.T, 2, counter, "combiner")
    t_w = mode_product(t_w, s, 3, counter, "combiner")
    return leading_left(unfold(t_w, 1), r, counter, "combiner")


def update_precoders(t_blocks, w, s, r_k, counter=None) -> list:
    wh = np.conj(w).T
    out = []
    for tk, rk in zip(t_blocks, r_k, strict=True):
        if tk.shape[0] != w.shape[0] or tk.shape[2] != len(s):
            raise ValueError(f"user tensor of shape {tk.shape} does not match W/s")
        t_q = mode_product(tk, wh, 1, counter, "precoder")
        t_q = mode_product(t_q, s, 3, counter, "precoder")
        out.append(np.conj(leading_left(unfold(t_q, 2), rk, counter, "precoder")))
    return out


def update_ris(t, w, q_blocks, counter=None) -> np.ndarray:
    q = blkdiag(q_blocks)
    if w.shape[0] != t.shape[0] or q.shape[0] != t.shape[1]:
        raise ValueError("W or Q does not match the channel tensor")
    t_s = mode_product(t, np.conj(w).T, 1, counter, "ris")
    t_s = mode_product(t_s, q.T, 2, counter, "ris")
    return init_ris(t_s, counter)


def surrogate_value(t, w, q_blocks, s, counter=None) -> float:
    """``||T x_1 W^H x_2 Q^T x_3 s^T||_F^2``."""
    q = blkdiag(q_blocks)
    out = mode_product(t, np.conj(w).T, 1, counter, "objective")
    out = mode_product(out, q.T, 2, counter, "objective")
    out = mode_product(out, s, 3, counter, "objective")
    return frob_norm_sq(out)


def run_ms_tao(t, dims: SystemDims, params: MsTaoParams = MsTaoParams(), counter=None):
    """Run MS-TAO on the composite channel tensor ``t``.

    Stops when the relative change of the surrogate between consecutive cycles
    drops below ``params.eps`` (from the second cycle on), when the surrogate
    is exactly zero, or after ``params.i_max`` cycles.
    """
    t = as_tensor3(t, "channel tensor")
    if t.shape != (dims.m_r, dims.m_t, dims.n):
        raise ValueError(f"tensor shape {t.shape} does not match dims {dims}")
    t_blocks = split_users(t, dims)
    q = init_precoders(t_blocks, dims.r_k, counter)
    s = init_ris(t, counter)
    f_trace = []
    f_init = float("nan")
    converged = False
    i = 0
    for i in range(1, params.i_max + 1):
        try:
            w = update_combiner(t, q, s, dims.r, counter)
            if i == 1:
                f_init = surrogate_value(t, w, q, s)
            q = update_precoders(t_blocks, w, s, dims.r_k, counter)
            s = update_ris(t, w, q, counter)
        except DecompositionError as exc:
            raise DecompositionError(exc.shape, f"MS-TAO iteration {i}: {exc}") from exc
        f = surrogate_value(t, w, q, s, counter)
        f_trace.append(f)
        if f == 0.0:
            converged = True
            break
        if i > 1 and abs(f - f_trace[-2]) / abs(f_trace[-2]) < params.eps:
            converged = True
            break
    log.debug("MS-TAO stopped after %d iterations (converged=%s)", i, converged)
    return BeamformerSolution(
        w=w, q_blocks=q, s=s, f_trace=f_trace, iterations=i, converged=converged, f_init=f_init
    )

"""Rayleigh channels, composite RIS channel forms and the pilot-phase model."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from risbeam.tensor_core import (
    dump_tensor,
    khatri_rao,
    load_tensor,
    tensorize_composite,
)


@dataclass(frozen=True)
class SystemDims:
    """Antenna, stream and RIS extents.

    ``m_tk`` and ``r_k`` hold per-user transmit antennas and stream counts.
    """

    m_r: int
    m_tk: tuple
    r_k: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "m_tk", tuple(int(x) for x in self.m_tk))
        object.__setattr__(self, "r_k", tuple(int(x) for x in self.r_k))
        if len(self.m_tk) == 0 or len(self.m_tk) != len(self.r_k):
            raise ValueError("m_tk and r_k must be non-empty and of equal length")
        if self.m_r < 1 or self.n < 1 or min(self.m_tk) < 1 or min(self.r_k) < 1:
            raise ValueError(f"all extents must be >= 1: {self}")
        for k, (mt, rk) in enumerate(zip(self.m_tk, self.r_k)):
            if rk > mt:
                raise ValueError(f"R_k exceeds M_{{T,k}} for user {k + 1}: {rk} > {mt}")
        if self.r > self.m_r:
            raise ValueError(f"total streams R={self.r} exceeds M_R={self.m_r}")

    @classmethod
    def uniform(cls, m_r: int, k: int, m_tk: int, r_ue: int, n: int) -> "SystemDims":
        return cls(m_r=m_r, m_tk=(m_tk,) * k, r_k=(r_ue,) * k, n=n)

    @property
    def k(self) -> int:
        return len(self.m_tk)

    @property
    def m_t(self) -> int:
        return sum(self.m_tk)

    @property
    def r(self) -> int:
        return sum(self.r_k)

    def tx_slices(self) -> list:
        """Column slices of the aggregate transmit dimension, one per user."""
        edges = np.concatenate([[0], np.cumsum(self.m_tk)])
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


@dataclass(frozen=True)
class ChannelSet:
    g: np.ndarray
    h_blocks: tuple

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.complex128)
        blocks = tuple(np.asarray(b, dtype=np.complex128) for b in self.h_blocks)
        if g.ndim != 2 or not blocks:
            raise ValueError("g must be a matrix and h_blocks non-empty")
        for b in blocks:
            if b.ndim != 2 or b.shape[0] != g.shape[1]:
                raise ValueError(f"H_k block of shape {b.shape} does not match N={g.shape[1]}")
        if not (np.all(np.isfinite(g)) and all(np.all(np.isfinite(b)) for b in blocks)):
            raise ValueError("channels must be finite")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h_blocks", blocks)

    @property
    def h(self) -> np.ndarray:
        return np.concatenate(self.h_blocks, axis=1)

    @property
    def dims_shape(self) -> tuple:
        return self.g.shape[0], tuple(b.shape[1] for b in self.h_blocks), self.g.shape[1]

    def scaled(self, c: float) -> "ChannelSet":
        return ChannelSet(self.g * c, self.h_blocks)

    def digest(self) -> str:
        """Short hash of the serialized channels."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.g).tobytes())
        for b in self.h_blocks:
            h.update(np.ascontiguousarray(b).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class PilotConfig:
    x: np.ndarray
    s_train: np.ndarray
    t_len: int = field(init=False)
    i_blocks: int = field(init=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.complex128)
        s = np.asarray(self.s_train, dtype=np.complex128)
        if x.ndim != 2 or s.ndim != 2:
            raise ValueError("pilot matrix and training pattern must be matrices")
        if x.shape[1] < x.shape[0]:
            raise ValueError(f"pilot length T={x.shape[1]} is shorter than M_T={x.shape[0]}")
        if np.max(np.abs(x @ x.conj().T - np.eye(x.shape[0]))) > 1e-10:
            raise ValueError("pilot rows are not orthonormal")
        if np.max(np.abs(np.abs(s) - 1.0)) > 1e-12:
            raise ValueError("training pattern entries must have unit modulus")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "s_train", s)
        object.__setattr__(self, "t_len", x.shape[1])
        object.__setattr__(self, "i_blocks", s.shape[0])

    @classmethod
    def default(cls, m_t: int, n: int, i_blocks: int | None = None) -> "PilotConfig":
        """Normalized DFT pilots with ``T = M_T`` and DFT training rows."""
        x = dft_training(m_t, m_t) / np.sqrt(m_t)
        return cls(x=x, s_train=dft_training(n if i_blocks is None else i_blocks, n))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples of unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def gen_rayleigh(dims: SystemDims, seed) -> ChannelSet:
    """i.i.d. CN(0, 1) channels ``G`` (M_R x N) and ``H_k`` (N x M_{T,k})."""
    rng = _rng(seed)
    g = crandn(rng, (dims.m_r, dims.n))
    blocks = tuple(crandn(rng, (dims.n, mt)) for mt in dims.m_tk)
    return ChannelSet(g, blocks)


def composite_matrix(ch: ChannelSet) -> np.ndarray:
    """``(M_R*M_T) x N`` composite channel ``khatri_rao(H^T, G)``."""
    return khatri_rao(ch.h.T, ch.g)


def composite_tensor(ch: ChannelSet) -> np.ndarray:
    """``M_R x M_T x N`` tensor with entries ``g[i, n] * h[n, j]``."""
    m_r, m_tk, n = ch.dims_shape
    return tensorize_composite(composite_matrix(ch), m_r, sum(m_tk), n)


def effective_channel(ch: ChannelSet, s) -> np.ndarray:
    """``G diag(s) H``."""
    s = np.asarray(s, dtype=np.complex128).ravel()
    if s.size != ch.g.shape[1]:
        raise ValueError(f"RIS vector has length {s.size}, expected N={ch.g.shape[1]}")
    return (ch.g * s) @ ch.h


def dft_training(i_blocks: int, n: int) -> np.ndarray:
    """``I x N`` unit-modulus matrix ``exp(-2j*pi*i*k / max(I, N))`` (0-based)."""
    if i_blocks < 1 or n < 1:
        raise ValueError("i_blocks and n must be >= 1")
    size = max(i_blocks, n)
    i = np.arange(i_blocks)[:, None]
    k = np.arange(n)[None, :]
    return np.exp(-2j * np.pi * ((i * k) % size) / size)


def pilot_forward(ch: ChannelSet, pc: PilotConfig, noise_std: float, seed=None) -> list:
    """Received pilot blocks ``Y_i = G diag(s_i) H X + B_i``."""
    m_r, m_tk, n = ch.dims_shape
    if pc.x.shape[0] != sum(m_tk) or pc.s_train.shape[1] != n:
        raise ValueError(
            f"pilot config ({pc.x.shape[0]} streams, {pc.s_train.shape[1]} RIS elements) "
            f"does not match channels (M_T={sum(m_tk)}, N={n})"
        )
    rng = _rng(seed)
    out = []
    for s_i in pc.s_train:
        y = effective_channel(ch, s_i) @ pc.x
        if noise_std > 0:
            y = y + noise_std * crandn(rng, y.shape)
        out.append(y)
    return out


def matched_filter(y_i, x) -> np.ndarray:
    """Remove orthonormal pilots: ``Y_i X^H``."""
    x = np.asarray(x, dtype=np.complex128)
    if np.max(np.abs(x @ x.conj().T - np.eye(x.shape[0]))) > 1e-8:
        raise ValueError("pilot rows are not orthonormal")
    return np.asarray(y_i, dtype=np.complex128) @ x.conj().T


def save_channels(ch: ChannelSet, prefix) -> None:
    """Write ``<prefix>.txt`` (dims header) and ``<prefix>.bin`` (G then H tensors)."""
    prefix = Path(prefix)
    m_r, m_tk, n = ch.dims_shape
    header = f"M_R = {m_r}\nM_Tk = {','.join(map(str, m_tk))}\nN = {n}\n"
    prefix.with_suffix(".txt").write_text(header)
    g = dump_tensor(ch.g[:, :, None])
    h = dump_tensor(ch.h[:, :, None])
    prefix.with_suffix(".bin").write_bytes(g + h)


def load_channels(prefix) -> ChannelSet:
    prefix = Path(prefix)
    fields = {}
    for line in prefix.with_suffix(".txt").read_text().splitlines():
        if line.strip():
            key, _, val = line.partition("=")
            fields[key.strip()] = val.strip()
    m_r, n = int(fields["M_R"]), int(fields["N"])
    m_tk = [int(v) for v in fields["M_Tk"].split(",")]
    buf = prefix.with_suffix(".bin").read_bytes()
    g_len = 24 + 16 * m_r * n
    g = load_tensor(buf[:g_len])[:, :, 0]
    h = load_tensor(buf[g_len:])[:, :, 0]
    edges = np.concatenate([[0], np.cumsum(m_tk)])
    return ChannelSet(g, tuple(h[:, a:b] for a, b in zip(edges[:-1], edges[1:])))

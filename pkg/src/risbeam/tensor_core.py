"""Dense complex order-3 tensors: unfoldings, mode-n products, Khatri-Rao.

Tensors are plain ``complex128`` numpy arrays of shape ``(d1, d2, d3)`` stored
in Fortran order, so element ``(i, j, n)`` sits at linear offset
``i + j*d1 + n*d1*d2`` (0-based) and the mode-1 unfolding is a free reshape.
Matrices are 2-D ``complex128`` arrays. Modes are numbered 1, 2, 3.
"""

from __future__ import annotations

import struct

import numpy as np

_HEADER = struct.Struct("<3q")


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_tensor3(t, name: str = "tensor") -> np.ndarray:
    """Validate and convert ``t`` to a finite, Fortran-ordered order-3 complex array."""
    a = np.asarray(t, dtype=np.complex128)
    if a.ndim != 3 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty order-3 array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return np.asfortranarray(a)


def from_layout(values, dims) -> np.ndarray:
    """Build a tensor from entries listed in linear layout order."""
    d1, d2, d3 = (int(d) for d in dims)
    v = np.asarray(values, dtype=np.complex128).ravel()
    if v.size != d1 * d2 * d3:
        raise ValueError(f"expected {d1 * d2 * d3} entries for dims {dims}, got {v.size}")
    return as_tensor3(v.reshape((d1, d2, d3), order="F"))


def to_layout(t) -> np.ndarray:
    """Entries of ``t`` as a flat vector in linear layout order."""
    return np.asarray(t).ravel(order="F")


def unfold(t, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding (Kolda-Bader column ordering).

    Columns are the mode-``mode`` fibers; among the two remaining indices the
    lower-numbered mode varies fastest. Result is ``d_mode x (prod of others)``.
    """
    ax = _check_mode(mode)
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected an order-3 tensor, got shape {t.shape}")
    return np.moveaxis(t, ax, 0).reshape((t.shape[ax], -1), order="F")


def fold(m, mode: int, dims) -> np.ndarray:
    """Inverse of :func:`unfold` for a target tensor of shape ``dims``."""
    ax = _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    rest = [d for i, d in enumerate(dims) if i != ax]
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (dims[ax], rest[0] * rest[1]):
        raise ValueError(f"cannot fold shape {m.shape} into {dims} along mode {mode}")
    moved = m.reshape((dims[ax], rest[0], rest[1]), order="F")
    return np.asfortranarray(np.moveaxis(moved, 0, ax))


def mode_product(t, m, mode: int, counter=None, kind: str = "other") -> np.ndarray:
    """Mode-n product ``t x_mode m``.

    ``m`` must have ``t.shape[mode-1]`` columns. A 1-D ``m`` is read as a row
    vector and yields a singleton extent in that mode.
    """
    ax = _check_mode(mode)
    t = np.asarray(t, dtype=np.complex128)
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2 or m.shape[1] != t.shape[ax]:
        raise ValueError(
            f"mode-{mode} product needs a matrix with {t.shape[ax]} columns, got shape {m.shape}"
        )
    unf = unfold(t, mode)
    if counter is not None:
        counter.matmul(m.shape[0], m.shape[1], unf.shape[1], kind)
    dims = list(t.shape)
    dims[ax] = m.shape[0]
    return fold(m @ unf, mode, dims)


def khatri_rao(a, b) -> np.ndarray:
    """Column-wise Kronecker product; column n is ``kron(a[:, n], b[:, n])``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(f"khatri_rao needs equal column counts, got {a.shape} and {b.shape}")
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def tensorize_composite(tmat, m_r: int, m_t: int, n: int) -> np.ndarray:
    """Map the ``(m_r*m_t) x n`` composite matrix to an ``m_r x m_t x n`` tensor.

    ``out[i, j, k] = tmat[i + j*m_r, k]``.
    """
    tmat = np.asarray(tmat, dtype=np.complex128)
    if tmat.shape != (m_r * m_t, n):
        raise ValueError(f"expected composite matrix of shape {(m_r * m_t, n)}, got {tmat.shape}")
    return np.asfortranarray(tmat.reshape((m_r, m_t, n), order="F"))


def flatten_composite(t) -> np.ndarray:
    """Inverse of :func:`tensorize_composite`."""
    t = np.asarray(t)
    m_r, m_t, n = t.shape
    return t.reshape((m_r * m_t, n), order="F")


def superdiag_reconstruct(g, ht, s) -> np.ndarray:
    """CP model ``I_{3,N} x_1 g x_2 ht x_3 s``.

    Frontal slice ``i`` equals ``g @ diag(s[i]) @ ht.T``.
    """
    g = np.asarray(g, dtype=np.complex128)
    ht = np.asarray(ht, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if not (g.ndim == ht.ndim == s.ndim == 2):
        raise ValueError("factors must be matrices")
    if not g.shape[1] == ht.shape[1] == s.shape[1]:
        raise ValueError(
            f"factors disagree on component count: {g.shape[1]}, {ht.shape[1]}, {s.shape[1]}"
        )
    return np.asfortranarray(np.einsum("an,bn,in->abi", g, ht, s))


def frob_norm_sq(t) -> float:
    """Sum of squared magnitudes of all entries."""
    t = np.asarray(t)
    return float(np.sum(t.real**2 + t.imag**2))


def dump_tensor(t) -> bytes:
    """Serialize: three little-endian int64 extents, then (re, im) float64 pairs in layout order."""
    t = as_tensor3(t)
    body = to_layout(t).astype("<c16").tobytes()
    return _HEADER.pack(*t.shape) + body


def load_tensor(buf: bytes) -> np.ndarray:
    """Inverse of :func:`dump_tensor`."""
    if len(buf) < _HEADER.size:
        raise ValueError("buffer too short for tensor header")
    dims = _HEADER.unpack_from(buf)
    if min(dims) < 1:
        raise ValueError(f"invalid extents {dims}")
    count = dims[0] * dims[1] * dims[2]
    body = buf[_HEADER.size:]
    if len(body) != 16 * count:
        raise ValueError(f"expected {16 * count} payload bytes, got {len(body)}")
    return from_layout(np.frombuffer(body, dtype="<c16"), dims)

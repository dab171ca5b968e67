"""Deterministic SVD subspaces and unit-modulus phase operations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from risbeam.tensor_core import as_matrix

_TIE_TOL = 1e-12


class DecompositionError(RuntimeError):
    """The SVD backend failed to converge."""

    def __init__(self, shape, cause=None):
        super().__init__(f"SVD did not converge for a {shape[0]}x{shape[1]} matrix: {cause}")
        self.shape = tuple(shape)


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.conj().T


def _anchor_phases(u: np.ndarray) -> np.ndarray:
    """Unit phases that make each column's dominant entry real nonnegative."""
    mag = np.abs(u)
    # first index within _TIE_TOL of the column maximum
    idx = np.argmax(mag >= mag.max(axis=0) - _TIE_TOL, axis=0)
    anchor = u[idx, np.arange(u.shape[1])]
    phase = np.ones(u.shape[1], dtype=np.complex128)
    nz = anchor != 0
    phase[nz] = anchor[nz] / np.abs(anchor[nz])
    return phase


def svd_econ(m, counter=None, kind: str = "other") -> SvdResult:
    """Economy SVD with deterministic singular-vector phases.

    The input is first scaled by a power of two so that its largest magnitude
    lies in [0.5, 1); the scaling is exact, so ``svd_econ(2**k * m)`` returns
    bit-identical singular vectors.
    """
    m = as_matrix(m)
    peak = float(np.max(np.abs(m)))
    exp = np.frexp(peak)[1] if peak > 0 else 0
    scaled = np.ldexp(m.real, -exp) + 1j * np.ldexp(m.imag, -exp)
    if counter is not None:
        counter.svd(m.shape[0], m.shape[1], kind)
    try:
        u, sigma, vh = np.linalg.svd(scaled, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(m.shape, exc) from exc
    phase = _anchor_phases(u)
    u = u * phase.conj()
    v = vh.conj().T * phase.conj()
    return SvdResult(u=u, sigma=np.ldexp(sigma, exp), v=v)


def _complete_basis(basis: np.ndarray, rows: int, r: int) -> np.ndarray:
    """Extend orthonormal columns to ``r`` columns using identity directions."""
    cols = [basis[:, i] for i in range(basis.shape[1])]
    eye = np.eye(rows, dtype=np.complex128)
    while len(cols) < r:
        q = np.stack(cols, axis=1) if cols else np.zeros((rows, 0), dtype=np.complex128)
        resid = eye - q @ (q.conj().T @ eye)
        resid = resid - q @ (q.conj().T @ resid)
        k = int(np.argmax(np.linalg.norm(resid, axis=0)))
        c = resid[:, k]
        cols.append(c / np.linalg.norm(c))
    return np.stack(cols, axis=1)


def leading_left(m, r: int, counter=None, kind: str = "other") -> np.ndarray:
    """Orthonormal ``rows x r`` basis of the dominant left singular subspace.

    Directions beyond the numerical rank are filled in deterministically from
    identity columns, so the result always has ``r`` columns.
    """
    m = as_matrix(m)
    rows = m.shape[0]
    if not 1 <= r <= rows:
        raise ValueError(f"requested {r} left singular vectors from a matrix with {rows} rows")
    res = svd_econ(m, counter, kind)
    if res.sigma.size and res.sigma[0] > 0:
        tol = res.sigma[0] * max(m.shape) * np.finfo(float).eps
        rank = int(np.sum(res.sigma > tol))
    else:
        rank = 0
    keep = min(r, rank)
    basis = res.u[:, :keep]
    if keep < r:
        basis = _complete_basis(basis, rows, r)
    return basis


def phase_project(v) -> np.ndarray:
    """Unit-modulus vector ``exp(-1j * angle(v))``; zero entries map to 1."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    out = np.ones_like(v)
    nz = v != 0
    out[nz] = np.conj(v[nz]) / np.abs(v[nz])
    return out


def quad_form(m, s) -> float:
    return float(np.real(np.vdot(s, m @ s)))


def unit_modulus_ascent(m, s0, iters: int, counter=None, kind: str = "ris"):
    """Maximize ``s^H m s`` over unit-modulus ``s`` by loaded phase iterations.

    Each step sets ``s[k] = exp(1j * angle(((m + lam*I) s)[k]))`` with
    ``lam = trace(m) / N``. For PSD ``m`` the objective never decreases.

    Returns
    -------
    s : ndarray
        Final phase vector.
    trace : list of float
        ``s^H m s`` at the start and after each of the ``iters`` steps.
    """
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError(f"quadratic matrix must be square, got {m.shape}")
    if iters < 0:
        raise ValueError("iters must be nonnegative")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > 1e-9 * scale:
        raise ValueError("quadratic matrix is not Hermitian")
    s = np.asarray(s0, dtype=np.complex128).ravel()
    if s.size != n:
        raise ValueError(f"initial phase vector has length {s.size}, expected {n}")
    lam = float(np.real(np.trace(m))) / n
    loaded = m + lam * np.eye(n)
    trace = [quad_form(m, s)]
    for _ in range(iters):
        if counter is not None:
            counter.matmul(n, n, 1, kind)
        s = np.conj(phase_project(loaded @ s))
        trace.append(quad_form(m, s))
    return s, trace

"""Dense complex linear algebra used throughout the package.

Operators are plain ``numpy`` complex arrays. Multipartite operators carry
their subsystem dimensions as an explicit ``dims`` sequence passed alongside
the array; ``prod(dims)`` must equal the matrix size.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg

HERMITIAN_RTOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class DimensionError(ValueError):
    """Matrix shape and declared subsystem dimensions disagree."""


class NotHermitianError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {m.shape}")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
        raise DimensionError(f"dims {dims} inconsistent with matrix shape {m.shape}")
    return dims


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (as_matrix(o) for o in ops))


def kron_power(a, n: int) -> np.ndarray:
    """``a`` tensored with itself ``n`` times (``n = 0`` gives the 1x1 identity)."""
    a = as_matrix(a)
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, a)
    return out


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def is_hermitian(h, rtol: float = HERMITIAN_RTOL) -> bool:
    h = _square(h)
    scale = max(float(np.max(np.abs(h), initial=0.0)), 1.0)
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= rtol * scale)


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns) of a Hermitian matrix."""
    h = _square(h)
    if not is_hermitian(h):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    # symmetrize so round-off asymmetry cannot leak into eigh's triangle choice
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return w, v


def matexp(h, t: float = 1.0) -> np.ndarray:
    """Return ``exp(-i h t)``.

    Hermitian generators go through the eigendecomposition; anything else
    (e.g. Hamiltonians with a decay term) uses Padé scaling-and-squaring.
    """
    h = _square(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("generator has non-finite entries")
    if is_hermitian(h):
        w, v = eig_hermitian(h)
        return (v * np.exp(-1j * w * t)) @ v.conj().T
    return scipy.linalg.expm(-1j * t * h)


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original order.
    """
    rho = _square(rho)
    dims = _check_dims(rho, dims)
    keep = sorted({int(k) for k in np.atleast_1d(keep)})
    nsys = len(dims)
    if any(k < 0 or k >= nsys for k in keep):
        raise DimensionError(f"keep={keep} out of range for {nsys} subsystems")
    t = rho.reshape(dims + dims)
    # trace from the highest index down so axis numbering of the rest is stable
    for ax in reversed(range(nsys)):
        if ax in keep:
            continue
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def partial_transpose(rho, dims: Sequence[int], subsystem: int) -> np.ndarray:
    rho = _square(rho)
    dims = _check_dims(rho, dims)
    nsys = len(dims)
    if not 0 <= subsystem < nsys:
        raise DimensionError(f"subsystem {subsystem} out of range for {nsys} subsystems")
    t = rho.reshape(dims + dims)
    t = np.swapaxes(t, subsystem, nsys + subsystem)
    return t.reshape(rho.shape)


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))


def operator_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a), 2))


def rx(theta: float) -> np.ndarray:
    """Single-qubit rotation ``exp(-i theta sigma_x / 2)``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)

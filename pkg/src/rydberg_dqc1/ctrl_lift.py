"""Adding control to an uncontrolled register unitary with X_a gates.

Each ensemble atom is a 4-level system ``(|0>, |1>, |2>, |3>)``; ``|2>``, ``|3>``
are auxiliary states the target unitary never touches. A controlled X_a swaps
the qubit pair into the auxiliary pair, so sandwiching ``U`` between two of
them applies ``U`` only on the branch where the swap did not fire.

This module also covers the interacting-ensemble example: with pairwise
Rydberg-dressed shifts ``V_ij`` the register evolves under the diagonal
``H = sum_{i<j} V_ij n_i n_j`` with ``n_i = |1><1|_i``. In the ``Z`` basis
``n_i = (1 - Z_i)/2``, hence ``H = sum V_ij (1 - Z_i - Z_j + Z_i Z_j)/4`` and the
normalized trace of ``H`` is ``sum_{i<j} V_ij / 4``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .qmath import DimensionError, as_matrix, kron_power

QUDIT_DIM = 4


def xa_single(infidelity: float = 0.0) -> np.ndarray:
    """The 4x4 X_a gate (0<->2, 1<->3).

    ``infidelity`` is a fractional pulse-area error of the transfer; the gate is
    ``sin(a) X_a + i cos(a) I`` with ``a = pi/2 * (1 - infidelity)``, exactly
    the permutation at zero.
    """
    xa = np.zeros((4, 4), dtype=complex)
    xa[2, 0] = xa[0, 2] = xa[3, 1] = xa[1, 3] = 1.0
    if infidelity == 0.0:
        return xa
    a = 0.5 * np.pi * (1.0 - infidelity)
    return np.sin(a) * xa + 1j * np.cos(a) * np.eye(4)


@dataclass(frozen=True)
class QuditRegister:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("atom number must be non-negative")

    @property
    def dim(self) -> int:
        return QUDIT_DIM**self.n

    def qubit_indices(self) -> np.ndarray:
        """Qudit-register indices of the basis states with every atom in ``{|0>, |1>}``."""
        idx = np.zeros(1, dtype=int)
        for _ in range(self.n):
            idx = (QUDIT_DIM * idx[:, None] + np.array([0, 1])[None, :]).ravel()
        return idx

    def embedding(self) -> np.ndarray:
        """Isometry from the ``2^n`` qubit register into the ``4^n`` qudit register."""
        e = np.zeros((self.dim, 2**self.n), dtype=complex)
        e[self.qubit_indices(), np.arange(2**self.n)] = 1.0
        return e


def embed_unitary(u_qubit, n: int) -> np.ndarray:
    """``U~``: ``u_qubit`` on the qubit subspace, identity on everything touching an auxiliary state."""
    u = as_matrix(u_qubit)
    if u.shape != (2**n, 2**n):
        raise DimensionError(f"expected a {2**n}x{2**n} unitary for n={n}, got {u.shape}")
    reg = QuditRegister(n)
    full = np.eye(reg.dim, dtype=complex)
    idx = reg.qubit_indices()
    full[np.ix_(idx, idx)] = u
    return full


def controlled_xa(n: int, fire_on: int = 1, infidelity: float = 0.0) -> np.ndarray:
    """Control qubit (first factor) times ``n`` qudits; X_a on every atom when control is ``fire_on``."""
    xa_n = kron_power(xa_single(infidelity), n)
    eye = np.eye(QUDIT_DIM**n, dtype=complex)
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    if fire_on == 1:
        return np.kron(p0, eye) + np.kron(p1, xa_n)
    if fire_on == 0:
        return np.kron(p0, xa_n) + np.kron(p1, eye)
    raise ValueError("fire_on must be 0 or 1")


def controlled_reference(u_qubit, active_on: int) -> np.ndarray:
    """Directly built controlled-U on control times qubit register, active on ``active_on``."""
    u = as_matrix(u_qubit)
    d = u.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    blocks = [np.eye(d), np.eye(d)]
    blocks[active_on] = u
    out[:d, :d], out[d:, d:] = blocks
    return out


class LiftResult(NamedTuple):
    composite: np.ndarray  # CX_a (I (x) U~) CX_a on 2 * 4^n
    restricted: np.ndarray  # composite on control (x) qubit subspace, 2 * 2^n
    reference: np.ndarray  # controlled-U built directly, same space as ``restricted``
    leakage: float  # norm of the composite's output outside the qubit subspace
    active_on: int


def lift_control(u_qubit, n: int, fire_on: int = 1, infidelity: float = 0.0) -> LiftResult:
    """Build the X_a sandwich for ``u_qubit`` and the controlled-U it should equal.

    With X_a firing on control ``|1>`` the composite is a controlled-on-zero U;
    ``fire_on=0`` flips it to the usual controlled-on-one U.
    """
    u = as_matrix(u_qubit)
    if u.shape != (2**n, 2**n):
        raise DimensionError(f"expected a {2**n}x{2**n} unitary for n={n}, got {u.shape}")
    cxa = controlled_xa(n, fire_on, infidelity)
    u_tilde = embed_unitary(u, n)
    composite = cxa @ np.kron(np.eye(2), u_tilde) @ cxa
    iso = np.kron(np.eye(2), QuditRegister(n).embedding())
    image = composite @ iso
    restricted = iso.conj().T @ image
    leakage = float(np.linalg.norm(image - iso @ restricted))
    active_on = 1 - fire_on
    return LiftResult(composite, restricted, controlled_reference(u, active_on), leakage, active_on)


@dataclass(frozen=True)
class IsingSpec:
    n: int
    couplings: np.ndarray
    t_grid: tuple[float, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.couplings, dtype=float)
        if v.shape != (self.n, self.n):
            raise DimensionError(f"couplings must be {self.n}x{self.n}, got {v.shape}")
        if not np.allclose(v, v.T, atol=1e-12):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(v) != 0):
            raise ValueError("couplings must have zero diagonal")
        if np.any(v < 0):
            raise ValueError("couplings must be non-negative")
        object.__setattr__(self, "couplings", v)
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, scale: float = 1.0, t_grid: Sequence[float] = ()) -> "IsingSpec":
        upper = np.triu(rng.uniform(0.0, scale, size=(n, n)), k=1)
        return cls(n=n, couplings=upper + upper.T, t_grid=tuple(t_grid))

    @property
    def mean_interaction(self) -> float:
        """Exact ``Tr H / 2^n = sum_{i<j} V_ij / 4``."""
        return float(np.triu(self.couplings, k=1).sum() / 4.0)


def ising_energies(spec: IsingSpec) -> np.ndarray:
    """Diagonal of ``H`` in the computational basis (atom 0 is the most significant bit)."""
    n = spec.n
    if n > 20:
        raise ValueError("explicit diagonal limited to n <= 20")
    idx = np.arange(2**n)
    occ = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    v = np.triu(spec.couplings, k=1)
    return np.einsum("ki,ij,kj->k", occ, v, occ).astype(float)


def ising_unitary(spec: IsingSpec, t: float) -> np.ndarray:
    """``exp(-i t H)`` as a dense diagonal matrix (``n <= 10``)."""
    if spec.n > 10:
        raise ValueError("dense Ising unitary limited to n <= 10")
    return np.diag(np.exp(-1j * t * ising_energies(spec)))


class MeanInteraction(NamedTuple):
    value: float
    residual: float


class CoarseGridError(ValueError):
    pass


FIT_RESIDUAL_MAX = 1e-3


def mean_interaction_estimate(spec: IsingSpec) -> MeanInteraction:
    """Average interaction from the short-time slope of ``Im Tr U(t) / 2^n``.

    ``Im s(t) = -<sin(E t)>`` is odd in ``t``; fitting ``a t + b t^3`` over the
    grid gives ``-a = <E> = Tr H / 2^n``. The residual is the RMS misfit relative
    to the RMS signal.
    """
    t = np.asarray(spec.t_grid, dtype=float)
    if t.size < 3:
        raise CoarseGridError("need at least three time points")
    energies = ising_energies(spec)
    s = np.array([np.mean(np.exp(-1j * ti * energies)) for ti in t])
    y = s.imag
    design = np.stack([t, t**3], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    scale = float(np.sqrt(np.mean(y**2)))
    if scale == 0.0:
        return MeanInteraction(0.0, 0.0)
    residual = float(np.sqrt(np.mean((design @ coef - y) ** 2)) / scale)
    if residual > FIT_RESIDUAL_MAX:
        raise CoarseGridError(f"short-time fit residual {residual:.2e} exceeds {FIT_RESIDUAL_MAX}; shorten the grid")
    return MeanInteraction(float(-coef[0]), residual)

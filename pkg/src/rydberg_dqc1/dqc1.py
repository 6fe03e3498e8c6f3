"""DQC1 circuit semantics and normalized-trace evaluation.

Convention: the controlled unitary fires on control ``|1>``, so after the
Hadamard and ``C-U`` on a maximally mixed register the joint state is::

    rho = [I (x) I + alpha (|0><1| (x) U^dag + |1><0| (x) U)] / 2^(n+1)

and the control coherence ``<0|rho_c|1>`` is ``alpha Tr(U^dag) / 2^(n+1)``.
The X quadrature is ``Tr(rho_c sigma_x) = alpha Re t`` and the Y quadrature is
read with the opposite rotation sense, ``-Tr(rho_c sigma_y) = -alpha Im t``,
where ``t = Tr(U) / 2^n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import atomsim
from .qmath import SIGMA_X, SIGMA_Y, DimensionError, as_matrix, partial_trace, rx

DENSE_MAX_N = 10


@dataclass(frozen=True)
class DQC1Report:
    n: int
    alpha: float
    trace_norm: complex
    exp_x: float
    exp_y: float
    rho_control: np.ndarray


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"purity alpha must lie in [0, 1], got {alpha}")
    return alpha


def _qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def control_input_state(alpha: float) -> np.ndarray:
    """Control qubit after the Hadamard, with coherences scaled by ``alpha``."""
    alpha = _check_alpha(alpha)
    return 0.5 * np.array([[1.0, alpha], [alpha, 1.0]], dtype=complex)


def output_state(u, alpha: float = 1.0) -> np.ndarray:
    """Joint control-register state after the DQC1 circuit (dense, ``n <= 10``)."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionError("unitary must be square")
    n = _qubit_count(u.shape[0])
    if n > DENSE_MAX_N:
        raise ValueError(f"dense output state limited to n <= {DENSE_MAX_N}, got n = {n}")
    alpha = _check_alpha(alpha)
    d = u.shape[0]
    rho = np.zeros((2 * d, 2 * d), dtype=complex)
    rho[:d, :d] = np.eye(d)
    rho[d:, d:] = np.eye(d)
    rho[:d, d:] = alpha * u.conj().T
    rho[d:, :d] = alpha * u
    return rho / (2 * d)


def circuit_output_state(controlled_op, alpha: float = 1.0) -> np.ndarray:
    """Propagate ``rho_c(alpha) (x) I/d`` through an explicit controlled operator.

    ``controlled_op`` acts on control (first factor) times register.
    """
    c = as_matrix(controlled_op)
    d = c.shape[0] // 2
    rho_in = np.kron(control_input_state(alpha), np.eye(d) / d)
    return c @ rho_in @ c.conj().T


def control_state(rho) -> np.ndarray:
    rho = as_matrix(rho)
    d = rho.shape[0] // 2
    return partial_trace(rho, [2, d], keep=[0])


def trace_exact(u) -> complex:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionError("trace of a non-square matrix")
    return complex(np.trace(u) / u.shape[0])


def trace_product(u1, n: int) -> complex:
    """Normalized trace of ``u1`` tensored ``n`` times, without building it.

    Evaluated as ``|z|^n exp(i n arg z)`` with ``z = Tr(u1)/2`` so that ``n = 100``
    and beyond stays finite and accurate.
    """
    if n < 0:
        raise ValueError("atom number must be non-negative")
    z = complex(np.trace(as_matrix(u1)) / 2)
    return power_polar(z, n)


def power_polar(z: complex, n: int) -> complex:
    if n == 0:
        return 1.0 + 0.0j
    r = abs(z)
    if r == 0.0:
        return 0.0j
    return complex(r**n * np.exp(1j * n * np.angle(z)))


def readout(trace_norm: complex, alpha: float = 1.0) -> tuple[float, float]:
    """Pauli expectations ``(<X>, <Y>) = (alpha Re t, -alpha Im t)``."""
    if abs(trace_norm) > 1 + 1e-9:
        raise ValueError(f"|normalized trace| = {abs(trace_norm)} exceeds 1")
    alpha = _check_alpha(alpha)
    return alpha * trace_norm.real, -alpha * trace_norm.imag


def quadratures(rho_c) -> tuple[float, float]:
    """Read ``(<X>, <Y>)`` off a control density matrix in this module's convention."""
    rho_c = as_matrix(rho_c)
    return float(np.trace(rho_c @ SIGMA_X).real), float(-np.trace(rho_c @ SIGMA_Y).real)


def control_from_trace(trace_norm: complex, alpha: float = 1.0) -> np.ndarray:
    alpha = _check_alpha(alpha)
    c = alpha * complex(trace_norm)
    return 0.5 * np.array([[1.0, c.conjugate()], [c, 1.0]], dtype=complex)


def report_from_trace(trace_norm: complex, n: int, alpha: float = 1.0) -> DQC1Report:
    ex, ey = readout(complex(trace_norm), alpha)
    return DQC1Report(
        n=int(n),
        alpha=float(alpha),
        trace_norm=complex(trace_norm),
        exp_x=ex,
        exp_y=ey,
        rho_control=control_from_trace(trace_norm, alpha),
    )


def run(u, alpha: float = 1.0) -> DQC1Report:
    """Dense DQC1 run: build the output state and read the control qubit."""
    rho = output_state(u, alpha)
    rho_c = control_state(rho)
    ex, ey = quadratures(rho_c)
    return DQC1Report(
        n=_qubit_count(as_matrix(u).shape[0]),
        alpha=float(alpha),
        trace_norm=trace_exact(u),
        exp_x=ex,
        exp_y=ey,
        rho_control=rho_c,
    )


@dataclass(frozen=True)
class TraceSeries:
    t: np.ndarray
    n: tuple[int, ...]
    traces: np.ndarray  # shape (len(t), len(n))
    per_atom: np.ndarray  # single-atom factor at each t

    def rows(self):
        for i, t in enumerate(self.t):
            for j, n in enumerate(self.n):
                yield float(t), n, complex(self.traces[i, j])

    def column(self, n: int) -> np.ndarray:
        return self.traces[:, self.n.index(n)]


def trace_series(
    p: atomsim.PhysParams,
    n_list: Sequence[int],
    t_grid: Sequence[float],
    model: str = "atomic",
    t_ramp: float = atomsim.DEFAULT_RAMP,
    dt_max: float = atomsim.DEFAULT_DT,
    ryd_pi_fidelity: float = 1.0,
) -> TraceSeries:
    """Normalized trace of the conditional ensemble operator versus pulse length.

    ``model="atomic"`` simulates both gate branches; the per-atom factor is
    ``Tr(u_blocked^dag u_open)/2``, the overlap entering the control coherence
    when the register is maximally mixed. ``model="ideal"`` uses a lossless
    rotation ``Rx(effective_rabi * t)`` and a perfectly blocked branch.

    ``ryd_pi_fidelity`` is the population fidelity of each control Rydberg
    pi-pulse; each pulse keeps amplitude ``sqrt(F)`` of the excited branch, so
    the pair scales the coherence by ``F``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly ascending")
    if np.any(t < 0):
        raise ValueError("pulse lengths must be non-negative")
    ns = tuple(int(n) for n in n_list)
    if not ns or min(ns) < 0:
        raise ValueError("n_list must be non-empty with non-negative entries")
    if not 0.0 <= ryd_pi_fidelity <= 1.0:
        raise ValueError("ryd_pi_fidelity must lie in [0, 1]")

    if model == "atomic":
        z = np.array([atomsim.conditional_gate(p, ti, t_ramp, dt_max).per_atom_trace for ti in t])
    elif model == "ideal":
        om = atomsim.effective_rabi(p)
        z = np.array([complex(np.trace(rx(om * ti)) / 2) for ti in t])
    else:
        raise ValueError(f"unknown gate model {model!r}")

    scale = float(ryd_pi_fidelity)
    traces = np.array([[scale * power_polar(zi, n) for n in ns] for zi in z], dtype=complex)
    return TraceSeries(t=t, n=ns, traces=traces, per_atom=z)

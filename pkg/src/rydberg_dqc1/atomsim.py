"""Single ensemble-atom dynamics under the Rydberg-EIT Raman scheme.

Basis order is ``(|A>, |B>, |P>, |R>)``: the two qubit ground states, the
intermediate state and the ensemble Rydberg level. All frequencies are
angular, in rad/us (``2*pi * MHz``); times are in us.

Without the control atom in its Rydberg state the coupling laser holds
``|R>`` on two-photon resonance and the Raman pair sees an EIT dark state,
so ``|A> <-> |B>`` transfer is blocked. With the control excited, ``|R>`` is
shifted by ``v_block`` and the pair drives an ordinary off-resonant Raman
rotation at roughly ``omega_p * omega_q / (2 * delta)``.

The Raman beams switch on and off with ``sin^2`` ramps of length ``t_ramp``
while the coupling laser is held on. A square switch-on projects ``|A>``
partly onto the bright state and caps blocking fidelity near 0.97 for the
preset parameters; ramps of a few tens of ns let the ground states follow the
dark states adiabatically. ``t_ramp=0`` gives square pulses.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .qmath import matexp, operator_norm

TWO_PI = 2.0 * np.pi

A, B, P, R = range(4)

DEFAULT_RAMP = 0.02  # us
DEFAULT_DT = 1e-5  # us; the 15 GHz blockade shift must be resolved by each Magnus step

# static check thresholds for the three operating conditions
CONDITION_I_MIN_RATIO = 10.0
CONDITION_II_MIN_RATIO = 10.0
CONDITION_III_MAX_RATIO = 0.2


class EITConditionWarning(UserWarning):
    """Raman Rabi frequencies are not small compared with the coupling laser."""


@dataclass(frozen=True)
class PhysParams:
    """Optical and atomic parameters of the conditional Raman gate (rad/us)."""

    omega_p: float
    omega_q: float
    omega_c: float
    delta: float
    gamma: float = 0.0
    v_block: float = 0.0

    def __post_init__(self):
        for name in ("omega_p", "omega_q", "omega_c", "delta", "gamma", "v_block"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.omega_p < 0 or self.omega_q < 0:
            raise ValueError("Raman Rabi frequencies must be non-negative")
        if self.omega_c < 0 or self.gamma < 0 or self.v_block < 0:
            raise ValueError("omega_c, gamma and v_block must be non-negative")
        ratio = self.eit_ratio
        if ratio > CONDITION_III_MAX_RATIO:
            warnings.warn(
                f"max(omega_p, omega_q)/omega_c = {ratio:.3g} exceeds {CONDITION_III_MAX_RATIO}; "
                "EIT blocking will be degraded",
                EITConditionWarning,
                stacklevel=3,
            )

    @classmethod
    def from_mhz(cls, **freqs_mhz: float) -> "PhysParams":
        """Build from ordinary frequencies in MHz (each multiplied by 2*pi)."""
        return cls(**{k: TWO_PI * v for k, v in freqs_mhz.items()})

    @property
    def eit_ratio(self) -> float:
        if self.omega_c == 0:
            return np.inf
        return max(self.omega_p, self.omega_q) / self.omega_c

    def replace(self, **changes) -> "PhysParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


PAPER_SEC3 = PhysParams(
    omega_p=TWO_PI * 70.0,
    omega_q=TWO_PI * 70.0,
    omega_c=TWO_PI * 700.0,
    delta=TWO_PI * 1200.0,
    gamma=TWO_PI * 6.0,
    v_block=TWO_PI * 15000.0,
)

# control-atom Rydberg pi-pulse fidelity quoted for state preparation
RYDBERG_PI_FIDELITY_PRESET = 0.999


@dataclass(frozen=True)
class ConditionalGate:
    """Effective maps on ``span{|A>, |B>}`` for both control-atom states.

    ``u_open`` applies when the control is in its Rydberg state, ``u_blocked``
    when EIT blocks the transfer. Both are sub-unitary; ``leak_*`` is the worst
    basis-state population lost to ``|P>``, ``|R>`` or decay.
    """

    u_open: np.ndarray
    u_blocked: np.ndarray
    leak_open: float
    leak_blocked: float
    t_pulse: float
    t_ramp: float

    @property
    def per_atom_trace(self) -> complex:
        """``Tr(u_blocked^dag u_open) / 2``, the single-atom DQC1 coherence factor."""
        return complex(np.trace(self.u_blocked.conj().T @ self.u_open) / 2)


def build_hamiltonian(p: PhysParams, control_in_rydberg: bool, raman_scale: float = 1.0) -> np.ndarray:
    """Rotating-frame 4x4 Hamiltonian, non-Hermitian when ``gamma > 0``.

    ``raman_scale`` multiplies both Raman Rabi frequencies (pulse envelope).
    """
    h = np.zeros((4, 4), dtype=complex)
    h[A, P] = h[P, A] = 0.5 * p.omega_p * raman_scale
    h[B, P] = h[P, B] = 0.5 * p.omega_q * raman_scale
    h[P, R] = h[R, P] = 0.5 * p.omega_c
    h[P, P] = p.delta - 0.5j * p.gamma
    h[R, R] = p.v_block if control_in_rydberg else 0.0
    return h


def raman_envelope(t: float, t_pulse: float, t_ramp: float) -> float:
    """``sin^2`` rise and fall of length ``t_ramp`` with a flat top in between."""
    if t_ramp <= 0:
        return 1.0
    edge = min(t, t_pulse - t)
    if edge <= 0:
        return 0.0
    if edge >= t_ramp:
        return 1.0
    return float(np.sin(0.5 * np.pi * edge / t_ramp) ** 2)


_GL_C1 = 0.5 - np.sqrt(3.0) / 6.0
_GL_C2 = 0.5 + np.sqrt(3.0) / 6.0
_GL_COMM = np.sqrt(3.0) / 12.0


def _magnus4_propagator(h_of_t: Callable[[float], np.ndarray], t0: float, t1: float, dt_max: float) -> np.ndarray:
    nsteps = max(1, int(np.ceil((t1 - t0) / dt_max - 1e-12)))
    step = (t1 - t0) / nsteps
    dim = np.asarray(h_of_t(t0)).shape[0]
    u = np.eye(dim, dtype=complex)
    for k in range(nsteps):
        ta = t0 + k * step
        h1 = np.asarray(h_of_t(ta + _GL_C1 * step), dtype=complex)
        h2 = np.asarray(h_of_t(ta + _GL_C2 * step), dtype=complex)
        # exponent of -i*H: Omega = -i step/2 (H1+H2) - (sqrt3/12) step^2 [H2, H1]
        gen = 0.5 * (h1 + h2) - 1j * _GL_COMM * step * (h2 @ h1 - h1 @ h2)
        u = matexp(gen, step) @ u
    return u


def propagator(h, t: float, dt_max: float | None = None, t0: float = 0.0) -> np.ndarray:
    """Propagator from ``t0`` to ``t0 + t`` for a constant or time-dependent ``h``."""
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    if callable(h):
        if t == 0:
            return np.eye(np.asarray(h(t0)).shape[0], dtype=complex)
        return _magnus4_propagator(h, t0, t0 + t, dt_max or DEFAULT_DT)
    h = np.asarray(h, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise ValueError("Hamiltonian has non-finite entries")
    return matexp(h, t)


def integrate(h, psi0, t: float, dt_max: float | None = None) -> np.ndarray:
    """Evolve ``psi0`` (a vector, or states as columns) for time ``t``.

    A constant ``h`` is exponentiated once. A callable ``h(t)`` is stepped with
    a fourth-order Magnus integrator using steps no longer than ``dt_max``.
    Norm decreases when ``h`` carries decay.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if not np.all(np.isfinite(psi0)):
        raise ValueError("initial state has non-finite entries")
    if dt_max is not None and dt_max <= 0:
        raise ValueError("dt_max must be positive")
    return propagator(h, t, dt_max) @ psi0


@lru_cache(maxsize=256)
def _ramp_propagators(p: PhysParams, control_in_rydberg: bool, t_ramp: float, dt_max: float):
    def h_up(t):
        return build_hamiltonian(p, control_in_rydberg, raman_scale=np.sin(0.5 * np.pi * t / t_ramp) ** 2)

    def h_down(t):
        return build_hamiltonian(p, control_in_rydberg, raman_scale=np.cos(0.5 * np.pi * t / t_ramp) ** 2)

    return _magnus4_propagator(h_up, 0.0, t_ramp, dt_max), _magnus4_propagator(h_down, 0.0, t_ramp, dt_max)


def pulse_propagator(
    p: PhysParams,
    control_in_rydberg: bool,
    t_pulse: float,
    t_ramp: float = DEFAULT_RAMP,
    dt_max: float = DEFAULT_DT,
) -> np.ndarray:
    """Full 4x4 propagator of one Raman pulse of total length ``t_pulse``.

    Pulses shorter than ``2 * t_ramp`` are ramp-only with proportionally shortened edges.
    """
    if t_pulse < 0:
        raise ValueError("t_pulse must be non-negative")
    if t_pulse == 0:
        return np.eye(4, dtype=complex)
    if t_ramp <= 0:
        return matexp(build_hamiltonian(p, control_in_rydberg), t_pulse)
    if t_pulse >= 2 * t_ramp:
        up, down = _ramp_propagators(p, bool(control_in_rydberg), float(t_ramp), float(dt_max))
        flat = matexp(build_hamiltonian(p, control_in_rydberg), t_pulse - 2 * t_ramp)
        return down @ flat @ up
    edge = 0.5 * t_pulse

    def h_short(t):
        return build_hamiltonian(p, control_in_rydberg, raman_scale=raman_envelope(t, t_pulse, edge))

    return _magnus4_propagator(h_short, 0.0, t_pulse, dt_max)


def _leak(u: np.ndarray) -> float:
    retained = np.sum(np.abs(u) ** 2, axis=0)
    return float(min(max(1.0 - retained.min(), 0.0), 1.0))


def conditional_gate(
    p: PhysParams,
    t_pulse: float,
    t_ramp: float = DEFAULT_RAMP,
    dt_max: float = DEFAULT_DT,
) -> ConditionalGate:
    """Evolve ``|A>`` and ``|B>`` under both branches and project back onto the qubit."""
    u_open = pulse_propagator(p, True, t_pulse, t_ramp, dt_max)[:2, :2].copy()
    u_blocked = pulse_propagator(p, False, t_pulse, t_ramp, dt_max)[:2, :2].copy()
    return ConditionalGate(
        u_open=u_open,
        u_blocked=u_blocked,
        leak_open=_leak(u_open),
        leak_blocked=_leak(u_blocked),
        t_pulse=float(t_pulse),
        t_ramp=float(t_ramp),
    )


def effective_rabi(p: PhysParams) -> float:
    """Adiabatic-elimination Raman Rabi frequency ``omega_p * omega_q / (2 delta)``."""
    if p.delta == 0:
        raise ValueError("effective Raman coupling undefined at zero detuning")
    return p.omega_p * p.omega_q / (2.0 * p.delta)


def rotation_area_time(t_pulse: float, t_ramp: float) -> float:
    """Square-pulse-equivalent duration of the envelope for a two-photon (``env^2``) process.

    Each ``sin^2`` edge contributes ``3/8`` of its length since ``<sin^4> = 3/8``.
    """
    edge = min(t_ramp, 0.5 * t_pulse) if t_ramp > 0 else 0.0
    return t_pulse - 2 * edge + 2 * edge * 3.0 / 8.0


def open_pi_time(p: PhysParams, t_ramp: float = DEFAULT_RAMP, dt_max: float = DEFAULT_DT) -> float:
    """Pulse length maximizing ``|A> -> |B>`` transfer in the open branch, found numerically."""
    t_ramp = max(t_ramp, 0.0)
    guess = np.pi / effective_rabi(p) + 1.25 * t_ramp
    lo, hi = max(2 * t_ramp, 0.6 * guess), 1.4 * guess

    def neg_transfer(t):
        return -abs(pulse_propagator(p, True, t, t_ramp, dt_max)[B, A]) ** 2

    res = minimize_scalar(neg_transfer, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    return float(res.x)


def blocking_fidelity(p: PhysParams, t_pulse: float, t_ramp: float = DEFAULT_RAMP, dt_max: float = DEFAULT_DT) -> float:
    """Population left in ``|A>`` when EIT blocks the Raman pulse."""
    u = pulse_propagator(p, False, t_pulse, t_ramp, dt_max)
    return float(min(abs(u[A, A]) ** 2, 1.0))


def dynamical_phase(gate: ConditionalGate) -> float:
    """Common-mode phase ``arg det(u_blocked^dag u_open) / 2`` picked up by the open branch.

    This is the AC-Stark phase that shifts the complex trace off the real axis
    between revivals.
    """
    return float(np.angle(np.linalg.det(gate.u_blocked.conj().T @ gate.u_open)) / 2)


@dataclass(frozen=True)
class ConditionReport:
    detuning_over_decay: float
    rydberg_lifetime_over_gate: float | None
    raman_over_coupling: float
    condition_i: bool
    condition_ii: bool | None
    condition_iii: bool

    @property
    def ok(self) -> bool:
        return self.condition_i and self.condition_iii and self.condition_ii is not False


def operating_conditions(p: PhysParams, t_gate: float, rydberg_lifetime: float | None = None) -> ConditionReport:
    """Check the three high-fidelity operating conditions.

    (i) ``delta >> gamma``, (ii) Rydberg lifetime (us) much longer than the
    gate, only evaluated when a lifetime is supplied, (iii) Raman Rabi
    frequencies small compared with ``omega_c``.
    """
    di = p.delta / p.gamma if p.gamma > 0 else np.inf
    dii = None if rydberg_lifetime is None else rydberg_lifetime / t_gate
    diii = p.eit_ratio
    return ConditionReport(
        detuning_over_decay=di,
        rydberg_lifetime_over_gate=dii,
        raman_over_coupling=diii,
        condition_i=bool(di >= CONDITION_I_MIN_RATIO),
        condition_ii=None if dii is None else bool(dii >= CONDITION_II_MIN_RATIO),
        condition_iii=bool(diii <= CONDITION_III_MAX_RATIO),
    )


def gate_norm_ok(gate: ConditionalGate, tol: float = 1e-9) -> bool:
    return operator_norm(gate.u_open) <= 1 + tol and operator_norm(gate.u_blocked) <= 1 + tol

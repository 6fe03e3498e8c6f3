"""Atom-number statistics of the ensemble register.

Two operating modes: post-selection keeps only runs with exactly ``n`` atoms,
average-lock fixes the mean ``nbar`` of a Poisson-loaded trap and averages the
trace over the atom-number distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .dqc1 import power_polar
from .qmath import as_matrix, rx

TAIL_MASS = 1e-13


@dataclass(frozen=True)
class PoissonModel:
    nbar: float
    single_load_p: float = 0.8
    lower: int = field(init=False)
    cutoff: int = field(init=False)

    def __post_init__(self):
        if not self.nbar > 0:
            raise ValueError("mean atom number must be positive")
        if not 0.0 < self.single_load_p <= 1.0:
            raise ValueError("single-atom load probability must lie in (0, 1]")
        spread = 8.0 * math.sqrt(self.nbar)
        dist = stats.poisson(self.nbar)
        lo = min(self.nbar - spread, dist.ppf(TAIL_MASS))
        hi = max(self.nbar + spread, dist.isf(TAIL_MASS))
        object.__setattr__(self, "lower", max(0, int(math.floor(lo))))
        object.__setattr__(self, "cutoff", int(math.ceil(hi)))

    @property
    def load_overhead(self) -> float:
        """Wall-clock cost factor of waiting for a control atom before each run."""
        return 1.0 / self.single_load_p


def poisson_weights(m: PoissonModel) -> tuple[np.ndarray, np.ndarray]:
    """Truncated Poisson pmf renormalized over ``m.lower .. m.cutoff``."""
    ns = np.arange(m.lower, m.cutoff + 1)
    w = np.exp(stats.poisson.logpmf(ns, m.nbar))
    return ns, w / w.sum()


def pgf_trace(z: complex, nbar: float) -> complex:
    """Untruncated Poisson average of ``z^n``: ``exp(nbar (z - 1))``."""
    return complex(np.exp(nbar * (complex(z) - 1.0)))


def averaged_trace(u1, m: PoissonModel) -> complex:
    """Poisson-weighted normalized trace of ``u1^(x)n`` (average-lock mode)."""
    z = complex(np.trace(as_matrix(u1)) / 2)
    ns, w = poisson_weights(m)
    return complex(sum(wi * power_polar(z, int(n)) for n, wi in zip(ns, w)))


def ensemble_trace(u1, mode: str, n: int | None = None, model: PoissonModel | None = None) -> complex:
    """Trace seen in ``"postselect"`` (exact ``n``) or ``"average"`` (Poisson) mode."""
    if mode == "postselect":
        if n is None:
            raise ValueError("post-selection needs an atom number")
        return power_polar(complex(np.trace(as_matrix(u1)) / 2), int(n))
    if mode == "average":
        if model is None:
            raise ValueError("average-lock mode needs a PoissonModel")
        return averaged_trace(u1, model)
    raise ValueError(f"unknown mode {mode!r}")


def peak_width(n: int, xtol: float = 1e-12) -> float:
    """FWHM (in rotation angle) of ``cos(theta/2)^n`` around ``theta = 0``, by bisection."""
    if n < 1:
        raise ValueError("peak width needs at least one atom")

    def excess(theta):
        return math.cos(0.5 * theta) ** n - 0.5

    half = optimize.bisect(excess, 0.0, math.pi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return 2.0 * half


def weighted_peak_width(m: PoissonModel) -> float:
    """Poisson-weighted mean of ``peak_width(n)`` over ``n >= 1``."""
    ns, w = poisson_weights(m)
    keep = ns >= 1
    widths = np.array([peak_width(int(n)) for n in ns[keep]])
    return float(np.sum(w[keep] * widths) / np.sum(w[keep]))


@dataclass(frozen=True)
class UncertaintyReport:
    theta: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    relative: np.ndarray
    dynamic_range: float

    @property
    def max_relative(self) -> float:
        return float(self.relative.max())

    @property
    def theta_at_max(self) -> float:
        return float(self.theta[int(np.argmax(self.relative))])

    @property
    def at_peak(self) -> float:
        """Relative uncertainty where the averaged trace is largest."""
        return float(self.relative[int(np.argmax(self.mean))])

    @property
    def slope_at_max(self) -> float:
        """``|d mean / d theta|`` at the worst grid point (large on a flank, ~0 on a peak)."""
        grad = np.gradient(self.mean, self.theta)
        return float(abs(grad[int(np.argmax(self.relative))]))


def trace_uncertainty(
    m: PoissonModel,
    theta_grid: Sequence[float],
    u1: Callable[[float], np.ndarray] | None = None,
) -> UncertaintyReport:
    """Run-to-run spread of the real trace caused by atom-number fluctuations.

    At each angle the Poisson-weighted standard deviation of
    ``Re[(Tr u1(theta)/2)^n]`` over ``n`` is divided by the peak-to-trough range
    of the weighted mean across the grid. ``u1`` defaults to ``Rx(theta)``.
    """
    theta = np.asarray(theta_grid, dtype=float)
    if theta.ndim != 1 or theta.size < 2:
        raise ValueError("theta_grid needs at least two points")
    gate = u1 or rx
    ns, w = poisson_weights(m)
    z = np.array([complex(np.trace(as_matrix(gate(th))) / 2) for th in theta])
    # polar powers: values[i, k] = Re z_i^n_k
    mag = np.abs(z)[:, None] ** ns[None, :]
    values = (mag * np.exp(1j * ns[None, :] * np.angle(z)[:, None])).real
    mean = values @ w
    var = ((values - mean[:, None]) ** 2) @ w
    std = np.sqrt(np.maximum(var, 0.0))
    rng_ = float(mean.max() - mean.min())
    if rng_ <= 0:
        raise ValueError("averaged trace is flat over the grid; relative uncertainty undefined")
    return UncertaintyReport(theta=theta, mean=mean, std=std, relative=std / rng_, dynamic_range=rng_)

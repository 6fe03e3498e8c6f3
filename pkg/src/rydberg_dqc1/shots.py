"""Finite-run sampling of the X/Y control readout.

Every run ends in a fluorescence measurement giving a binary outcome; a run
measuring a quadrature with expectation ``e`` records ``+1`` with probability
``(1 + e) / 2``. Detection errors flip each recorded outcome with probability
``detect_eps`` and the estimator divides by ``1 - 2 detect_eps`` to undo the
known contraction.

By default ``nr`` runs are spent on *each* quadrature. ``per_quadrature=False``
splits ``nr`` between X and Y instead, with an odd run going to X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dqc1 import readout


@dataclass(frozen=True)
class ShotEstimate:
    nr: int
    est_x: float
    est_y: float
    se_x: float
    se_y: float
    seed: int | None
    detect_eps: float
    nr_x: int
    nr_y: int

    @property
    def trace_estimate(self) -> tuple[float, float]:
        """``(Re t, Im t)`` scaled by alpha, i.e. ``(est_x, -est_y)``."""
        return self.est_x, -self.est_y


def required_runs(eps: float) -> int:
    """Runs per quadrature for standard error ``eps``: ``ceil(1/eps^2)``.

    Independent of the register size; only the control qubit is measured.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"accuracy must lie in (0, 1], got {eps}")
    # guard against 1/0.05**2 = 400.00000000000006
    return int(math.ceil(round(1.0 / eps**2, 9)))


def _quadrature(rng: np.random.Generator, expectation: float, runs: int, detect_eps: float) -> tuple[float, float]:
    if runs == 0:
        return 0.0, float("inf")
    p_plus = min(max(0.5 * (1.0 + expectation), 0.0), 1.0)
    outcomes = np.where(rng.random(runs) < p_plus, 1.0, -1.0)
    if detect_eps > 0:
        outcomes = np.where(rng.random(runs) < detect_eps, -outcomes, outcomes)
    gain = 1.0 - 2.0 * detect_eps
    est = outcomes.mean() / gain
    se = outcomes.std(ddof=1) / math.sqrt(runs) / gain if runs > 1 else 0.0
    return float(min(max(est, -1.0), 1.0)), float(se)


def sample_readout(
    trace_norm: complex,
    alpha: float = 1.0,
    nr: int = 400,
    seed: int | None = None,
    detect_eps: float = 0.0,
    per_quadrature: bool = True,
) -> ShotEstimate:
    """Simulate ``nr`` measurement runs and estimate ``<X>`` and ``<Y>``."""
    if nr < 1:
        raise ValueError("need at least one run")
    if not 0.0 <= detect_eps < 0.5:
        raise ValueError("detect_eps must lie in [0, 0.5)")
    ex, ey = readout(complex(trace_norm), alpha)
    if per_quadrature:
        nx = ny = int(nr)
    else:
        nx, ny = (nr + 1) // 2, nr // 2
    rng = np.random.default_rng(seed)
    est_x, se_x = _quadrature(rng, ex, nx, detect_eps)
    est_y, se_y = _quadrature(rng, ey, ny, detect_eps)
    return ShotEstimate(
        nr=int(nr),
        est_x=est_x,
        est_y=est_y,
        se_x=se_x,
        se_y=se_y,
        seed=seed,
        detect_eps=float(detect_eps),
        nr_x=nx,
        nr_y=ny,
    )


def rms_error(
    trace_norm: complex,
    alpha: float,
    nr: int,
    repetitions: int,
    seed: int = 0,
    detect_eps: float = 0.0,
) -> float:
    """RMS readout error over seeded repetitions, averaged over both quadratures.

    Repetition ``k`` uses the seed stream ``(seed, k)``.
    """
    ex, ey = readout(complex(trace_norm), alpha)
    sq = 0.0
    for k in range(repetitions):
        s = sample_readout(trace_norm, alpha, nr, seed=stream_seed(seed, k), detect_eps=detect_eps)
        sq += (s.est_x - ex) ** 2 + (s.est_y - ey) ** 2
    return math.sqrt(sq / (2 * repetitions))


def stream_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1, dtype=np.uint64)[0])

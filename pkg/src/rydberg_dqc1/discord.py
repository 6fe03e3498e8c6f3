"""Geometric discord of qubit-by-register states, measured on the qubit.

The discord here is the squared Hilbert-Schmidt distance from ``rho`` to the
closest state left unchanged by a projective measurement of the qubit,
without normalization. Writing ``rho = (I (x) R_0 + sum_i sigma_i (x) R_i)/2``
the minimum over axes is ``(Tr M - lambda_max(M)) / 2`` with
``M_ij = Tr(R_i R_j)``.

For the DQC1 output state this reduces to
``alpha^2 / (4 * 2^n) * (1 - |Tr(U^2)| / 2^n)``, so a DQC1 run with the
controlled unitary applied twice gives the discord from its trace alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .dqc1 import output_state, trace_exact
from .qmath import PAULIS, DimensionError, as_matrix, eig_hermitian, is_hermitian, partial_transpose

DENSITY_TOL = 1e-9
_CHUNK_ELEMENTS = 1_000_000


@dataclass(frozen=True)
class DiscordReport:
    d_geo_closed: float
    d_geo_minsearch: float
    d_geo_estimator: float
    min_pt_eigenvalue: float


def _check_density(rho, dims) -> tuple[np.ndarray, int]:
    rho = as_matrix(rho)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2 or dims[0] != 2 or rho.shape != (2 * dims[1], 2 * dims[1]):
        raise DimensionError(f"expected a qubit x d state with dims (2, d), got dims {dims} and shape {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("not a density matrix: non-Hermitian")
    if abs(np.trace(rho) - 1) > DENSITY_TOL:
        raise ValueError("not a density matrix: trace differs from 1")
    if eig_hermitian(rho)[0][0] < -DENSITY_TOL:
        raise ValueError("not a density matrix: negative eigenvalue")
    return rho, dims[1]


def _blocks(rho: np.ndarray, d: int) -> np.ndarray:
    """``rho`` as a (2, 2, d, d) array of register blocks ``<a|rho|b>``."""
    return rho.reshape(2, d, 2, d).transpose(0, 2, 1, 3)


def correlation_operators(rho, d: int) -> list[np.ndarray]:
    """``R_i = Tr_qubit[(sigma_i (x) I) rho]`` for ``i = x, y, z``."""
    blk = _blocks(as_matrix(rho), d)
    return [np.einsum("ab,bajk->jk", s, blk) for s in PAULIS]


def geometric_discord_closed(rho, dims) -> float:
    rho, d = _check_density(rho, dims)
    ops = correlation_operators(rho, d)
    m = np.array([[np.trace(a @ b).real for b in ops] for a in ops])
    lam = np.linalg.eigvalsh(m)
    return float(max(0.5 * (np.trace(m) - lam[-1]), 0.0))


def fibonacci_sphere(npoints: int) -> np.ndarray:
    k = np.arange(npoints) + 0.5
    z = 1.0 - 2.0 * k / npoints
    phi = np.pi * (3.0 - math.sqrt(5.0)) * k
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def _measurement_distance(blk: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """``||rho - sum_pm (P_pm (x) I) rho (P_pm (x) I)||_F^2`` for each row of ``axes``."""
    x, y, z = axes.T
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    # eigenvectors of n.sigma with eigenvalues +1 / -1
    up = np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=1)
    dn = np.stack([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)], axis=1)
    post = np.zeros((len(axes),) + blk.shape, dtype=complex)
    for v in (up, dn):
        # conditional register operator <v|rho|v>, then |v><v| (x) that
        cond = np.einsum("pa,abjk,pb->pjk", v.conj(), blk, v)
        post += np.einsum("pa,pb,pjk->pabjk", v, v.conj(), cond)
    return np.sum(np.abs(blk[None] - post) ** 2, axis=(1, 2, 3, 4))


def geometric_discord_minsearch(rho, dims, grid_resolution: int = 10_000) -> float:
    """Variational discord: brute-force the measurement axis, then refine locally."""
    rho, d = _check_density(rho, dims)
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be positive")
    blk = _blocks(rho, d)
    axes = fibonacci_sphere(grid_resolution)
    per_chunk = max(1, _CHUNK_ELEMENTS // (4 * d * d))
    vals = np.concatenate(
        [_measurement_distance(blk, axes[i : i + per_chunk]) for i in range(0, len(axes), per_chunk)]
    )
    best = float(vals.min())
    start = axes[int(np.argmin(vals))]

    def objective(angles):
        th, ph = angles
        ax = np.array([[math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]])
        return float(_measurement_distance(blk, ax)[0])

    th0 = math.acos(max(-1.0, min(1.0, start[2])))
    ph0 = math.atan2(start[1], start[0])
    res = minimize(objective, [th0, ph0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
    return float(max(min(best, res.fun), 0.0))


def dqc1_discord_from_traces(trace_u2_norm: complex, alpha: float, n: int) -> float:
    """Discord of the DQC1 output from the normalized trace of ``U^2``."""
    t = abs(complex(trace_u2_norm))
    if t > 1 + 1e-9:
        raise ValueError(f"|Tr(U^2)|/2^n = {t} exceeds 1")
    return float(max(alpha**2 / (4.0 * 2.0**n) * (1.0 - min(t, 1.0)), 0.0))


def discord_from_shots(est_x: float, est_y: float, se_x: float, se_y: float, alpha: float, n: int) -> tuple[float, float]:
    """Discord and its delta-method standard error from a sampled double-unitary run.

    The sampled quadratures ``(est_x, est_y)`` estimate ``alpha * (Re t, -Im t)`` of
    ``t = Tr(U^2)/2^n``.
    """
    if alpha <= 0:
        raise ValueError("discord estimator needs a coherent control (alpha > 0)")
    mag = math.hypot(est_x, est_y) / alpha
    coef = alpha**2 / (4.0 * 2.0**n)
    value = coef * (1.0 - min(mag, 1.0))
    if mag == 0:
        se_mag = math.hypot(se_x, se_y) / alpha / math.sqrt(2)
    else:
        se_mag = math.hypot(est_x * se_x, est_y * se_y) / (alpha * math.hypot(est_x, est_y))
    return float(value), float(coef * se_mag)


def ppt_min_eigenvalue(rho, dims, cut: int = 0) -> float:
    """Smallest eigenvalue of the partial transpose on subsystem ``cut``."""
    pt = partial_transpose(rho, dims, cut)
    return float(eig_hermitian(pt)[0][0])


def discord_report(u, alpha: float = 1.0, grid_resolution: int = 10_000) -> DiscordReport:
    """All discord routes for the DQC1 output of ``u``."""
    u = as_matrix(u)
    d = u.shape[0]
    n = d.bit_length() - 1
    rho = output_state(u, alpha)
    dims = (2, d)
    return DiscordReport(
        d_geo_closed=geometric_discord_closed(rho, dims),
        d_geo_minsearch=geometric_discord_minsearch(rho, dims, grid_resolution),
        d_geo_estimator=dqc1_discord_from_traces(trace_exact(u @ u), alpha, n),
        min_pt_eigenvalue=ppt_min_eigenvalue(rho, dims, 0),
    )

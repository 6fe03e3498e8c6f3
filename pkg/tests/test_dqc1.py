import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_subunitary, random_unitary
from rydberg_dqc1 import PAPER_SEC3, atomsim, dqc1
from rydberg_dqc1.qmath import SIGMA_X, SIGMA_Z, DimensionError, kron_power, rx

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def circuit_oracle(u, alpha):
    """Hadamard on |0>, dephase to purity alpha, controlled-U on a mixed register."""
    d = u.shape[0]
    plus = HADAMARD @ np.diag([1.0, 0.0]) @ HADAMARD
    z = np.diag([1.0, -1.0])
    ctrl = 0.5 * (1 + alpha) * plus + 0.5 * (1 - alpha) * z @ plus @ z
    rho = np.kron(ctrl, np.eye(d) / d)
    cu = np.zeros((2 * d, 2 * d), dtype=complex)
    cu[:d, :d] = np.eye(d)
    cu[d:, d:] = u
    return cu @ rho @ cu.conj().T


def reduce_control(rho):
    d = rho.shape[0] // 2
    out = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            out[a, b] = sum(rho[a * d + k, b * d + k] for k in range(d))
    return out


class TestOutputState:
    def test_identity_gives_plus_times_mixed(self):
        for n in (1, 3):
            d = 2**n
            plus = np.full((2, 2), 0.5)
            assert np.allclose(dqc1.output_state(np.eye(d)), np.kron(plus, np.eye(d) / d), atol=1e-14)

    def test_fully_dephased_control(self, rng):
        u = random_unitary(4, rng)
        assert np.allclose(dqc1.output_state(u, 0.0), np.eye(8) / 8, atol=1e-15)

    def test_sigma_z_leaves_control_mixed(self):
        rho = circuit_oracle(SIGMA_Z, 1.0)
        assert np.allclose(reduce_control(rho), np.eye(2) / 2, atol=1e-14)
        assert np.allclose(dqc1.control_state(dqc1.output_state(SIGMA_Z)), np.eye(2) / 2, atol=1e-14)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_matches_circuit_oracle(self, rng, n):
        u = random_unitary(2**n, rng)
        alpha = rng.uniform(0, 1)
        assert np.allclose(dqc1.output_state(u, alpha), circuit_oracle(u, alpha), atol=1e-10)

    def test_control_coherence(self, rng):
        u = random_unitary(8, rng)
        alpha = 0.7
        rho_c = dqc1.control_state(dqc1.output_state(u, alpha))
        c = alpha * np.trace(u) / 8
        expected = 0.5 * np.array([[1, np.conj(c)], [c, 1]])
        assert np.allclose(rho_c, expected, atol=1e-12)
        assert np.allclose(dqc1.control_from_trace(np.trace(u) / 8, alpha), expected, atol=1e-12)

    def test_circuit_output_state_wraps_controlled_op(self, rng):
        u = random_unitary(4, rng)
        cu = np.block([[np.eye(4), np.zeros((4, 4))], [np.zeros((4, 4)), u]])
        assert np.allclose(dqc1.circuit_output_state(cu, 0.4), dqc1.output_state(u, 0.4), atol=1e-14)

    def test_errors(self):
        with pytest.raises(DimensionError):
            dqc1.output_state(np.eye(3))
        with pytest.raises(ValueError):
            dqc1.output_state(np.eye(2), alpha=1.5)
        with pytest.raises(ValueError):
            dqc1.output_state(np.eye(2**11))


class TestTraces:
    def test_trace_exact_basics(self, rng):
        assert dqc1.trace_exact(np.eye(5)) == 1
        assert dqc1.trace_exact(SIGMA_X) == 0
        u = random_unitary(8, rng)
        total = 0j
        for k in range(8):
            total += u[k, k]
        assert abs(dqc1.trace_exact(u) - total / 8) < 1e-14

    def test_trace_product_trivial(self):
        assert dqc1.trace_product(np.eye(2), 100) == 1
        assert abs(dqc1.trace_product(rx(np.pi), 3)) < 1e-15
        assert dqc1.trace_product(rx(0.3), 0) == 1

    @pytest.mark.parametrize("n", range(1, 9))
    def test_trace_product_matches_kron_power(self, rng, n):
        for _ in range(5):
            u1 = random_subunitary(2, rng)
            assert abs(dqc1.trace_product(u1, n) - dqc1.trace_exact(kron_power(u1, n))) < 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 60), st.integers(0, 60), st.floats(0, 2 * np.pi), st.floats(0.1, 1.0))
    def test_semigroup(self, n, m, theta, scale):
        u1 = scale * rx(theta)
        lhs = dqc1.trace_product(u1, n) * dqc1.trace_product(u1, m)
        assert abs(lhs - dqc1.trace_product(u1, n + m)) < 1e-12

    def test_large_n_stays_finite(self):
        t = dqc1.trace_product(rx(1e-3), 10_000)
        assert np.isfinite(t) and abs(t - np.cos(5e-4) ** 10_000) < 1e-12

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError):
            dqc1.trace_product(np.eye(2), -1)


class TestReadout:
    def test_conventions(self):
        assert dqc1.readout(1.0 + 0j) == (1.0, 0.0)
        x, y = dqc1.readout(1j)
        assert x == 0 and y == -1
        assert dqc1.readout(0.4 + 0.2j, 0.5) == pytest.approx((0.2, -0.1))

    def test_rejects_overlong_trace(self):
        with pytest.raises(ValueError):
            dqc1.readout(1.1 + 0j)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_quadratures_match_readout(self, rng, n):
        u = random_unitary(2**n, rng)
        for alpha in (0.0, 0.3, 1.0):
            rep = dqc1.run(u, alpha)
            ex, ey = dqc1.readout(dqc1.trace_exact(u), alpha)
            assert rep.exp_x == pytest.approx(ex, abs=1e-12)
            assert rep.exp_y == pytest.approx(ey, abs=1e-12)
            assert rep.exp_x**2 + rep.exp_y**2 <= alpha**2 + 1e-9

    def test_report_from_trace(self):
        rep = dqc1.report_from_trace(0.5j, n=100, alpha=1.0)
        assert rep.exp_y == -0.5 and rep.n == 100
        assert dqc1.quadratures(rep.rho_control) == pytest.approx((0.0, -0.5))


class TestTraceSeries:
    def test_zero_time_is_one(self):
        ts = dqc1.trace_series(PAPER_SEC3, [1, 2, 10, 100], [0.0, 0.05])
        assert np.allclose(ts.traces[0], 1.0, atol=1e-12)

    def test_ideal_model_is_cosine_power(self):
        t = np.linspace(0, 2.0, 41)
        ts = dqc1.trace_series(PAPER_SEC3, [1, 10, 100], t, model="ideal")
        theta = atomsim.effective_rabi(PAPER_SEC3) * t
        for n in (1, 10, 100):
            assert np.allclose(ts.column(n).real, np.cos(theta / 2) ** n, atol=1e-12)

    def test_rydberg_fidelity_scales_coherence(self):
        t = [0.1, 0.2]
        a = dqc1.trace_series(PAPER_SEC3, [2], t, model="ideal")
        b = dqc1.trace_series(PAPER_SEC3, [2], t, model="ideal", ryd_pi_fidelity=0.9)
        assert np.allclose(b.traces, 0.9 * a.traces, atol=1e-15)

    def test_atomic_per_atom_factor(self):
        t = 0.3
        gate = atomsim.conditional_gate(PAPER_SEC3, t)
        ts = dqc1.trace_series(PAPER_SEC3, [1, 3], [t])
        z = np.trace(gate.u_blocked.conj().T @ gate.u_open) / 2
        assert abs(ts.per_atom[0] - z) < 1e-12
        assert abs(ts.column(3)[0] - z**3) < 1e-12

    def test_rows_iterate_grid(self):
        ts = dqc1.trace_series(PAPER_SEC3, [1, 2], [0.0, 0.1, 0.2], model="ideal")
        rows = list(ts.rows())
        assert len(rows) == 6 and rows[1][:2] == (0.0, 2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(t_grid=[0.2, 0.1]),
            dict(t_grid=[]),
            dict(t_grid=[-0.1, 0.1]),
            dict(n_list=[]),
            dict(model="exact"),
            dict(ryd_pi_fidelity=1.2),
        ],
    )
    def test_invalid_inputs(self, kwargs):
        args = dict(p=PAPER_SEC3, n_list=[1], t_grid=[0.0, 0.1], model="ideal")
        args.update(kwargs)
        with pytest.raises(ValueError):
            dqc1.trace_series(**args)

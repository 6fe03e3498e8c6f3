"""Desk-scale simulator for DQC1 with a Rydberg-blockaded cold-atom ensemble."""

from .atomsim import PAPER_SEC3, ConditionalGate, PhysParams, blocking_fidelity, conditional_gate, effective_rabi
from .dqc1 import DQC1Report, output_state, readout, trace_exact, trace_product, trace_series
from .shots import ShotEstimate, required_runs, sample_readout

__all__ = [
    "PAPER_SEC3",
    "ConditionalGate",
    "DQC1Report",
    "PhysParams",
    "ShotEstimate",
    "blocking_fidelity",
    "conditional_gate",
    "effective_rabi",
    "output_state",
    "readout",
    "required_runs",
    "sample_readout",
    "trace_exact",
    "trace_product",
    "trace_series",
]

__version__ = "0.1.0"

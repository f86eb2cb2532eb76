"""Quantum and classical Fisher information for joint phase and loss estimation
with fixed-photon-number two-mode probes."""

__version__ = "0.1.0"

from .fisher import (
    FisherMatrix,
    PrecisionSummary,
    classical_fisher_p,
    combined_uncertainty,
    commutator_expectation,
    measured_fisher_loss_sld,
    measured_fisher_phase_sld,
    qfi_matrix,
)
from .fock_core import ChannelParams, ProbeState, evolve, loss_coefficient, make_probe, moments
from .optimizer import OptimizerSettings, optimize, tradeoff_scan
from .probes import fock_probe, holland_burnett, noon, uniform

__all__ = [
    "ChannelParams",
    "FisherMatrix",
    "OptimizerSettings",
    "PrecisionSummary",
    "ProbeState",
    "classical_fisher_p",
    "combined_uncertainty",
    "commutator_expectation",
    "evolve",
    "fock_probe",
    "holland_burnett",
    "loss_coefficient",
    "make_probe",
    "measured_fisher_loss_sld",
    "measured_fisher_phase_sld",
    "moments",
    "noon",
    "optimize",
    "qfi_matrix",
    "tradeoff_scan",
    "uniform",
]

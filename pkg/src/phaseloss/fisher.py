"""Closed-form Fisher information for joint phase and loss estimation.

Parameter order is always (phi, eta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fock_core import (
    ChannelParams,
    MomentTable,
    ProbeState,
    block_derivatives,
    check_open_eta,
    evolve,
    moments,
    prob_derivatives,
)

PARAMS = ("phi", "eta")


@dataclass(frozen=True)
class FisherMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def diagonal(cls, phiphi, etaeta):
        return cls(np.array([[phiphi, 0.0], [0.0, etaeta]]))

    @property
    def phiphi(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def etaeta(self) -> float:
        return float(self.matrix[1, 1])

    @property
    def phieta(self) -> float:
        return float(self.matrix[0, 1])


@dataclass(frozen=True)
class PrecisionSummary:
    delta_phi: float
    delta_eta: float
    delta_total: float

    @property
    def no_information(self) -> bool:
        """True when some parameter carries zero Fisher information."""
        return math.isinf(self.delta_total)


def _require_photons(probe: ProbeState):
    if probe.n < 1:
        raise DomainError("a probe with n = 0 photons carries no information")


def _check(probe: ProbeState, eta: float):
    _require_photons(probe)
    check_open_eta(eta)


def phase_information(table: MomentTable) -> float:
    """4 (Xi2 - sum_l xi1^2/xi0), evaluated as four times the summed block variances."""
    return 4.0 * float(np.sum(table.centered))


def loss_information(table: MomentTable) -> float:
    eta = table.eta
    return float(table.Xi[1] / (eta * (1 - eta)))


def loss_distribution_information(table: MomentTable) -> float:
    """Classical Fisher information about eta of the loss distribution {p_l}."""
    _, dp = prob_derivatives(table)
    p = table.xi[:, 0]
    occ = table.occupied
    return float(np.sum(dp[occ] ** 2 / p[occ]))


def loss_distribution_information_closed_form(table: MomentTable) -> float:
    eta = table.eta
    return float(
        table.Xi[1] / (eta * (1 - eta)) - (table.Xi[2] - table.mean_sq_over_weight()) / eta**2
    )


def qfi_matrix(probe: ProbeState, eta: float) -> FisherMatrix:
    _check(probe, eta)
    table = moments(probe, eta)
    return FisherMatrix.diagonal(phase_information(table), loss_information(table))


def classical_fisher_p(probe: ProbeState, eta: float) -> FisherMatrix:
    _check(probe, eta)
    table = moments(probe, eta)
    return FisherMatrix.diagonal(0.0, loss_distribution_information(table))


def measured_fisher_phase_sld(probe: ProbeState, eta: float) -> FisherMatrix:
    """Information available when measuring in the eigenbasis of the phase SLD.

    The phase entry is the full quantum value; the loss entry drops to the
    classical information of the loss distribution, which equals
    ``I_etaeta - I_phiphi / (4 eta^2)``.
    """
    _check(probe, eta)
    table = moments(probe, eta)
    return FisherMatrix.diagonal(phase_information(table), loss_distribution_information(table))


def measured_fisher_loss_sld(probe: ProbeState, eta: float) -> FisherMatrix:
    _check(probe, eta)
    table = moments(probe, eta)
    return FisherMatrix.diagonal(0.0, loss_information(table))


def commutator_expectation(probe: ProbeState, eta: float) -> complex:
    """tr(rho [L_eta, L_phi]) for the SLDs of loss and phase.

    Equals ``8 i sum_l p_l Im P_l(eta, phi) = i I_phiphi / eta`` with the phase
    imprinted as ``exp(+i k phi)``. It vanishes only when the probe carries no
    phase information.
    """
    _check(probe, eta)
    return 1j * phase_information(moments(probe, eta)) / eta


def precision_from_information(i_phi: float, i_eta: float) -> PrecisionSummary:
    d_phi = math.inf if i_phi <= 0 else i_phi**-0.5
    d_eta = math.inf if i_eta <= 0 else i_eta**-0.5
    total = math.inf if math.isinf(d_phi) or math.isinf(d_eta) else math.hypot(d_phi, d_eta)
    return PrecisionSummary(d_phi, d_eta, total)


def combined_uncertainty(probe: ProbeState, eta: float) -> PrecisionSummary:
    m = measured_fisher_phase_sld(probe, eta)
    return precision_from_information(m.phiphi, m.etaeta)


def block_decomposition(probe: ProbeState, eta: float, phi: float = 0.0):
    """Split the QFI into its classical and per-block quantum parts.

    Returns ``(classical, quantum)`` as 2x2 arrays, with the quantum part
    assembled as ``sum_l p_l 4 Re P_l`` from the block inner products.
    """
    _check(probe, eta)
    ens = evolve(probe, ChannelParams(eta, phi))
    table = moments(probe, eta)
    classical = classical_fisher_p(probe, eta).matrix
    quantum = np.zeros((2, 2))
    for blk in ens.blocks:
        if not blk.occupied:
            continue
        rec = block_derivatives(ens, blk.l, table)
        for i, mu in enumerate(PARAMS):
            for j, nu in enumerate(PARAMS):
                quantum[i, j] += blk.p * 4 * np.real(rec.P(mu, nu))
    return classical, quantum


# -- vectorised forms on raw weight vectors, used by the optimizer ------------


def information_and_gradient(x: np.ndarray, B: np.ndarray, eta: float):
    """Phase QFI and loss-distribution information with gradients in x.

    Returns ``(i_phi, grad_phi, i_p, grad_p)``. ``B`` is the loss matrix
    ``B[k, l] = b_l^k`` for this eta.
    """
    n1 = x.size
    k = np.arange(n1, dtype=float)
    l = np.arange(n1, dtype=float)
    xi0 = x @ B
    occ = xi0 > np.finfo(float).tiny
    B_occ = B[:, occ]
    w = x[:, None] * B_occ
    ref = k[np.argmax(w, axis=0)]
    m = ref + ((k[:, None] - ref[None, :]) * w).sum(axis=0) / xi0[occ]  # block mean photon number
    i_phi = 4.0 * float(np.einsum("k,kl,kl->", x, B_occ, (k[:, None] - m[None, :]) ** 2))
    # d(xi1^2/xi0)/dx_k = sum_l b_l^k (2 k m_l - m_l^2)
    grad_phi = 4.0 * (k * k - B_occ @ (2.0 * m) * k + B_occ @ (m * m))

    # dp_l/deta = sum_k x_k b_l^k (k/eta - l/(eta(1-eta)))
    D = B * (k[:, None] / eta - l[None, :] / (eta * (1 - eta)))
    dp = x @ D
    r = dp[occ] / xi0[occ]
    i_p = float(np.sum(dp[occ] * r))
    grad_p = D[:, occ] @ (2.0 * r) - B_occ @ (r * r)
    return i_phi, grad_phi, i_p, grad_p

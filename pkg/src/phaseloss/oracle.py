"""Brute-force density-matrix path used to validate every closed form.

The probe is dilated with an environment mode that collects the lost photons,
phase and loss are applied to the joint pure state, and the environment is
traced out. Nothing here calls into the block decomposition of ``fock_core``;
the only shared convention is the ordering of the global basis: kets
``|A, B>`` with ``A + B <= n`` are ordered by photons lost ``l = n - A - B``
and then by ``A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DenseBudgetError, DomainError, NumericalQualityError
from .fisher import FisherMatrix
from .fock_core import ChannelParams, ProbeState


@dataclass(frozen=True)
class DenseState:
    rho: np.ndarray
    labels: tuple[tuple[int, int], ...]  # global index -> (A, B) Fock occupation

    @property
    def dimension(self) -> int:
        return self.rho.shape[0]

    def index(self, a: int, b: int) -> int:
        return self.labels.index((a, b))

    def validate(self, atol=1e-10):
        rho = self.rho
        if np.max(np.abs(rho - rho.conj().T)) > TOL.hermitian:
            raise NumericalQualityError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > atol:
            raise NumericalQualityError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise NumericalQualityError("density matrix has a negative eigenvalue")


def fock_labels(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((a, n - l - a) for l in range(n + 1) for a in range(n - l + 1))


def _budget(n):
    if n > TOL.dense_budget:
        raise DenseBudgetError(f"dense oracle limited to n <= {TOL.dense_budget}, got n={n}")


def _binomial_weight(k, l, eta):
    return math.comb(k, l) * eta ** (k - l) * (1 - eta) ** l


def dilated_state(probe: ProbeState, params: ChannelParams, phase_first=True, derivative=None):
    """Joint system+environment amplitudes Psi[system index, lost photons].

    ``derivative`` may be ``"phi"`` or ``"eta"`` to return the analytic
    parameter derivative of the same array instead.
    """
    n = probe.n
    _budget(n)
    eta, phi = params.eta, params.phi
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta={eta!r} outside [0, 1]")
    if derivative == "eta" and not (0.0 < eta < 1.0):
        raise DomainError("eta derivative needs eta strictly inside (0, 1)")
    labels = fock_labels(n)
    where = {lab: i for i, lab in enumerate(labels)}
    psi = np.zeros((len(labels), n + 1), dtype=complex)
    for k, alpha in enumerate(probe.amplitudes):
        for l in range(k + 1):
            a, b = k - l, n - k
            # with phase applied after loss it rides on the surviving photons
            photons = k if phase_first else a
            amp = alpha * np.exp(1j * photons * phi) * math.sqrt(_binomial_weight(k, l, eta))
            if derivative == "phi":
                amp *= 1j * photons
            elif derivative == "eta":
                amp *= 0.5 * ((k - l) / eta - l / (1 - eta))
            psi[where[(a, b)], l] += amp
    return psi, labels


def density_matrix(probe: ProbeState, params: ChannelParams, phase_first=True) -> DenseState:
    psi, labels = dilated_state(probe, params, phase_first)
    rho = psi @ psi.conj().T  # partial trace over the environment
    return DenseState(rho=rho, labels=labels)


def analytic_drho(probe: ProbeState, params: ChannelParams, which: str) -> np.ndarray:
    psi, _ = dilated_state(probe, params)
    dpsi, _ = dilated_state(probe, params, derivative=which)
    d = dpsi @ psi.conj().T
    return d + d.conj().T


def finite_difference_drho(probe: ProbeState, params: ChannelParams, which: str, steps=(1e-4, 1e-5)) -> np.ndarray:
    """Central differences at two steps combined by one Richardson level."""

    def central(h):
        if which == "phi":
            lo, hi = ChannelParams(params.eta, params.phi - h), ChannelParams(params.eta, params.phi + h)
        else:
            lo, hi = ChannelParams(params.eta - h, params.phi), ChannelParams(params.eta + h, params.phi)
        return (density_matrix(probe, hi).rho - density_matrix(probe, lo).rho) / (2 * h)

    h1, h2 = steps
    d1, d2 = central(h1), central(h2)
    return (h1**2 * d2 - h2**2 * d1) / (h1**2 - h2**2)


def numerical_sld(rho, drho, cutoff=None, tol=None, return_residual=False):
    """Solve L rho + rho L = 2 drho in the eigenbasis of rho.

    Matrix elements with ``lambda_i + lambda_j`` below ``cutoff`` are set to
    zero; they do not affect any Fisher quantity.
    """
    cutoff = TOL.sld_cutoff if cutoff is None else cutoff
    tol = TOL.sld_residual if tol is None else tol
    rho = getattr(rho, "rho", rho)
    lam, V = np.linalg.eigh(rho)
    d = V.conj().T @ drho @ V
    s = lam[:, None] + lam[None, :]
    keep = s > cutoff
    L_eig = np.zeros_like(d)
    L_eig[keep] = 2 * d[keep] / s[keep]
    L = V @ L_eig @ V.conj().T
    L = 0.5 * (L + L.conj().T)
    residual = float(np.linalg.norm(L @ rho + rho @ L - 2 * drho))
    scale = max(1.0, float(np.linalg.norm(drho)))
    if residual > tol * scale:
        raise NumericalQualityError(
            f"SLD residual {residual:.3e} above tolerance", {"residual": residual, "scale": scale}
        )
    return (L, residual) if return_residual else L


def numerical_slds(probe: ProbeState, params: ChannelParams, source="analytic"):
    """(rho, L_phi, L_eta) from the dense path."""
    if source not in ("analytic", "finite_difference"):
        raise ValueError(f"unknown derivative source {source!r}")
    if not (0.0 < params.eta < 1.0):
        raise DomainError("SLDs need eta strictly inside (0, 1)")
    rho = density_matrix(probe, params).rho
    deriv = analytic_drho if source == "analytic" else finite_difference_drho
    tol = TOL.sld_residual if source == "analytic" else 1e-5
    L_phi = numerical_sld(rho, deriv(probe, params, "phi"), tol=tol)
    L_eta = numerical_sld(rho, deriv(probe, params, "eta"), tol=tol)
    return rho, L_phi, L_eta


def numerical_qfi(probe: ProbeState, params: ChannelParams, source="analytic") -> FisherMatrix:
    rho, L_phi, L_eta = numerical_slds(probe, params, source)
    Ls = (L_phi, L_eta)
    m = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            sym = 0.5 * (Ls[i] @ Ls[j] + Ls[j] @ Ls[i])
            m[i, j] = np.trace(rho @ sym).real
    return FisherMatrix(m)


def numerical_commutator(probe: ProbeState, params: ChannelParams, source="analytic") -> complex:
    """tr(rho [L_eta, L_phi]) from numerically solved SLDs."""
    rho, L_phi, L_eta = numerical_slds(probe, params, source)
    return complex(np.trace(rho @ (L_eta @ L_phi - L_phi @ L_eta)))

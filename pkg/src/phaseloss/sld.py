"""Block SLDs, their two-level spectra, and measurements built from them.

Vectors on the whole evolved space use the global basis ordering of
``fock_core.global_offsets``: block ``l`` occupies indices
``offset[l] .. offset[l] + n - l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DegenerateBlockError, NumericalQualityError
from .fisher import FisherMatrix
from .fock_core import (
    ChannelParams,
    EvolvedEnsemble,
    MomentTable,
    ProbeState,
    block_derivatives,
    block_state_derivatives,
    check_open_eta,
    evolve,
    loss_matrix,
    moment_table,
    prob_derivatives,
)

KAPPAS = ("phi", "eta")


def global_offsets(n: int) -> np.ndarray:
    sizes = np.arange(n + 1, 0, -1)  # block l has n - l + 1 kets
    return np.concatenate([[0], np.cumsum(sizes)])


def global_dimension(n: int) -> int:
    return (n + 1) * (n + 2) // 2


def embed(n: int, l: int, local: np.ndarray) -> np.ndarray:
    off = global_offsets(n)
    v = np.zeros(global_dimension(n), dtype=complex)
    v[off[l] : off[l + 1]] = local
    return v


def _table(ensemble: EvolvedEnsemble) -> MomentTable:
    return moment_table(np.abs(ensemble.amplitudes) ** 2, loss_matrix(ensemble.n, ensemble.eta), ensemble.eta)


def _check_kappa(kappa):
    if kappa not in KAPPAS:
        raise ValueError(f"parameter tag must be one of {KAPPAS}, got {kappa!r}")


def _dlogp(table: MomentTable, kappa: str, l: int) -> float:
    dphi, deta = prob_derivatives(table)
    dp = dphi if kappa == "phi" else deta
    return float(dp[l] / table.xi[l, 0])


@dataclass(frozen=True)
class SldBlock:
    l: int
    kappa: str
    matrix: np.ndarray


@dataclass(frozen=True)
class SldEigenpair:
    l: int
    values: tuple[float, ...]  # (lambda_plus, lambda_minus), or one value when degenerate
    vectors: np.ndarray  # rows are unit vectors in the block's local basis
    degenerate: bool = False


def sld_block(ensemble: EvolvedEnsemble, kappa: str, l: int) -> SldBlock:
    _check_kappa(kappa)
    check_open_eta(ensemble.eta)
    blk = ensemble.blocks[l]
    if not blk.occupied:
        raise DegenerateBlockError(f"block l={l} has zero probability")
    d_phi, d_eta = block_state_derivatives(ensemble, l)
    dpsi = d_phi if kappa == "phi" else d_eta
    psi = blk.psi
    g = _dlogp(_table(ensemble), kappa, l)
    L = g * np.outer(psi, psi.conj()) + 2 * np.outer(dpsi, psi.conj()) + 2 * np.outer(psi, dpsi.conj())
    return SldBlock(l=l, kappa=kappa, matrix=L)


def sld_eigenpairs(ensemble: EvolvedEnsemble, kappa: str) -> list[SldEigenpair]:
    """Closed-form non-zero spectrum of every occupied block.

    lambda_pm = (g +- sqrt(g^2 + 16 P)) / 2 with g = d log p_l and P the
    projected derivative norm; eigenvectors are
    (lambda psi + 2 Pi d psi) / sqrt(lambda^2 + 4 P).
    """
    _check_kappa(kappa)
    check_open_eta(ensemble.eta)
    table = _table(ensemble)
    out = []
    for blk in ensemble.blocks:
        if not blk.occupied:
            continue
        l, psi = blk.l, blk.psi
        g = _dlogp(table, kappa, l)
        P = float(np.real(block_derivatives(ensemble, l, table).P(kappa, kappa)))
        d_phi, d_eta = block_state_derivatives(ensemble, l)
        dpsi = d_phi if kappa == "phi" else d_eta
        perp = dpsi - psi * np.vdot(psi, dpsi)
        mean_sq = float(np.sum(np.arange(l, ensemble.n + 1) ** 2 * np.abs(psi) ** 2))
        scale = mean_sq if kappa == "phi" else mean_sq / (4 * ensemble.eta**2)
        if P <= 1e-13 * max(scale, 1.0):
            # rank one (or zero) block: only psi carries weight
            out.append(SldEigenpair(l, (g,), psi[None, :].copy(), degenerate=True))
            continue
        root = math.sqrt(g * g + 16 * P)
        values = (0.5 * (g + root), 0.5 * (g - root))
        vecs = np.array([(lam * psi + 2 * perp) / math.sqrt(lam * lam + 4 * P) for lam in values])
        out.append(SldEigenpair(l, values, vecs))
    return out


def sld_projectors(ensemble: EvolvedEnsemble, kappa: str):
    """Global-basis eigenvectors of the kappa SLD with outcome labels."""
    labels, vectors = [], []
    for pair in sld_eigenpairs(ensemble, kappa):
        signs = ("+", "-") if not pair.degenerate else ("0",)
        for s, v in zip(signs, pair.vectors):
            labels.append(f"l={pair.l}{s}")
            vectors.append(embed(ensemble.n, pair.l, v))
    return labels, np.array(vectors)


@dataclass(frozen=True)
class MeasurementDistribution:
    labels: tuple[str, ...]
    probabilities: np.ndarray

    def as_pairs(self):
        return list(zip(self.labels, self.probabilities))


RESIDUAL = "residual"


def _check_orthonormal(vectors):
    gram = vectors.conj() @ vectors.T
    err = np.max(np.abs(gram - np.eye(len(vectors)))) if len(vectors) else 0.0
    if err > TOL.orthonormal:
        raise ValueError(f"projectors are not orthonormal (max Gram error {err:.2e})")


def _block_states(ensemble: EvolvedEnsemble):
    return [(b.p, embed(ensemble.n, b.l, b.psi)) for b in ensemble.blocks if b.occupied]


def measurement_distribution(ensemble: EvolvedEnsemble, projectors, labels=None) -> MeasurementDistribution:
    vecs = np.atleast_2d(np.asarray(projectors, dtype=complex))
    if vecs.shape[1] != global_dimension(ensemble.n):
        raise ValueError("projector length does not match the evolved space")
    _check_orthonormal(vecs)
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(vecs)))
    q = np.zeros(len(vecs))
    for p, psi in _block_states(ensemble):
        q += p * np.abs(vecs.conj() @ psi) ** 2
    residual = max(0.0, 1.0 - q.sum())
    return MeasurementDistribution(labels + (RESIDUAL,), np.append(q, residual))


def classical_fisher_of_measurement(
    probe: ProbeState, params0: ChannelParams, projectors, step=1e-4, refine_tol=1e-3
) -> FisherMatrix:
    """Classical Fisher matrix of a fixed projective measurement.

    Derivatives of the outcome distribution come from central differences at
    ``step`` and ``step/2`` with one Richardson level, so this path never
    touches the analytic derivative code.
    """
    check_open_eta(params0.eta)
    if params0.eta - step <= 0 or params0.eta + step >= 1:
        raise NumericalQualityError("finite-difference stencil leaves (0, 1)", {"eta": params0.eta, "step": step})
    vecs = np.atleast_2d(np.asarray(projectors, dtype=complex))

    def q_at(phi, eta):
        return measurement_distribution(evolve(probe, ChannelParams(eta, phi)), vecs).probabilities

    q0 = q_at(params0.phi, params0.eta)

    def central(which, h):
        if which == 0:
            return (q_at(params0.phi + h, params0.eta) - q_at(params0.phi - h, params0.eta)) / (2 * h)
        return (q_at(params0.phi, params0.eta + h) - q_at(params0.phi, params0.eta - h)) / (2 * h)

    grads = []
    for which in range(2):
        coarse, fine = central(which, step), central(which, step / 2)
        rich = (4 * fine - coarse) / 3
        spread = np.max(np.abs(rich - fine))
        if not np.all(np.isfinite(rich)) or spread > refine_tol * max(1.0, np.max(np.abs(rich))):
            raise NumericalQualityError(
                "Richardson refinement did not settle", {"parameter": KAPPAS[which], "spread": float(spread)}
            )
        grads.append(rich)
    keep = q0 >= TOL.min_outcome_probability
    G = np.array(grads)[:, keep]
    return FisherMatrix(G @ (G / q0[keep]).T)


def random_projectors(n: int, rng, count=None) -> np.ndarray:
    """Rows of a Haar-ish random unitary on the evolved space."""
    d = global_dimension(n)
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    rows = q.T
    return rows if count is None else rows[:count]


def assembled_operators(ensemble: EvolvedEnsemble):
    """Global rho, L_phi, L_eta and analytic d rho from the block forms."""
    n = ensemble.n
    d = global_dimension(n)
    off = global_offsets(n)
    rho = np.zeros((d, d), dtype=complex)
    L = {k: np.zeros((d, d), dtype=complex) for k in KAPPAS}
    drho = {k: np.zeros((d, d), dtype=complex) for k in KAPPAS}
    table = _table(ensemble)
    dp = dict(zip(KAPPAS, prob_derivatives(table)))
    for blk in ensemble.blocks:
        if not blk.occupied:
            continue
        sl = slice(off[blk.l], off[blk.l + 1])
        psi = blk.psi
        rho[sl, sl] = blk.p * np.outer(psi, psi.conj())
        derivs = dict(zip(KAPPAS, block_state_derivatives(ensemble, blk.l)))
        for k in KAPPAS:
            L[k][sl, sl] = sld_block(ensemble, k, blk.l).matrix
            dv = derivs[k]
            drho[k][sl, sl] = dp[k][blk.l] * np.outer(psi, psi.conj()) + blk.p * (
                np.outer(dv, psi.conj()) + np.outer(psi, dv.conj())
            )
    return rho, L, drho

"""Fixed-photon-number two-mode probes and the single-arm loss + phase channel.

A probe ``sum_k alpha_k |k, n-k>`` puts ``k`` photons in the sensing arm. After
the arm loses photons to the environment and picks up a phase, the state
splits into orthogonal pure blocks labelled by the number ``l`` of photons
lost. Block ``l`` lives on the kets ``|k-l, n-k>`` with ``k = l..n``; we index
its local basis by ``a = k - l``.

All Fisher quantities downstream reduce to the moments

    xi[l, r] = sum_{k>=l} x_k b_l^k k^r,     Xi[r] = sum_k x_k k^r

with ``x_k = |alpha_k|^2`` and the binomial loss weight
``b_l^k = C(k, l) eta^(k-l) (1-eta)^l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import binom

from .config import TOL
from .errors import DegenerateBlockError, DomainError

# blocks whose probability is at or below this are treated as empty
_EMPTY = np.finfo(float).tiny


@dataclass(frozen=True)
class ProbeState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.n < 0 or amps.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} amplitudes, got shape {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > TOL.normalization:
            raise ValueError(f"amplitudes not normalized: sum |alpha|^2 = {norm!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.amplitudes)


@dataclass(frozen=True)
class ChannelParams:
    eta: float
    phi: float = 0.0


@dataclass(frozen=True)
class Block:
    l: int
    p: float
    psi: np.ndarray | None  # None for empty blocks

    @property
    def occupied(self) -> bool:
        return self.psi is not None


@dataclass(frozen=True)
class EvolvedEnsemble:
    n: int
    eta: float
    phi: float
    amplitudes: np.ndarray
    blocks: tuple[Block, ...]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([b.p for b in self.blocks])

    def block(self, l: int) -> Block:
        return self.blocks[l]


@dataclass(frozen=True)
class MomentTable:
    xi: np.ndarray  # shape (n+1, 3): xi[l, r]
    Xi: np.ndarray  # shape (3,)
    eta: float = field(default=float("nan"))
    # sum_k x_k b_l^k (k - m_l)^2 with m_l = xi1/xi0; equals xi2 - xi1^2/xi0
    centered: np.ndarray | None = None

    @property
    def occupied(self) -> np.ndarray:
        return self.xi[:, 0] > _EMPTY

    def block_variance(self) -> np.ndarray:
        """Photon-number variance of each block, zero on empty blocks."""
        xi0 = self.xi[:, 0]
        occ = self.occupied
        out = np.zeros_like(xi0)
        out[occ] = self.centered[occ] / xi0[occ]
        return out

    def mean_sq_over_weight(self) -> float:
        """sum_l xi1^2 / xi0 with the empty-block limit 0."""
        xi0, xi1 = self.xi[:, 0], self.xi[:, 1]
        occ = self.occupied
        return float(np.sum(xi1[occ] ** 2 / xi0[occ]))


def check_open_eta(eta, what="eta"):
    if not (0.0 < eta < 1.0):
        raise DomainError(
            f"{what}={eta!r} must lie strictly inside (0, 1); "
            "the loss information I_eta_eta diverges at the endpoints"
        )


def make_probe(weights, phases=None) -> ProbeState:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d array")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    neg = np.flatnonzero(w < 0)
    if neg.size:
        raise ValueError(f"negative weight {w[neg[0]]!r} at index {neg[0]}")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have a positive sum")
    x = w / total
    ph = np.zeros_like(x) if phases is None else np.asarray(phases, dtype=float)
    if ph.shape != x.shape:
        raise ValueError("phases must match weights in length")
    amps = np.sqrt(x) * np.exp(1j * ph)
    # absorb the last rounding error so the norm check is exact
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return ProbeState(n=x.size - 1, amplitudes=amps)


def loss_coefficient(k: int, l: int, eta: float) -> float:
    if l < 0 or l > k:
        raise DomainError(f"need 0 <= l <= k, got k={k}, l={l}")
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta={eta!r} outside [0, 1]")
    return float(binom.pmf(l, k, 1.0 - eta))


@lru_cache(maxsize=256)
def _loss_matrix_cached(n: int, eta: float) -> np.ndarray:
    k = np.arange(n + 1)[:, None]
    l = np.arange(n + 1)[None, :]
    B = binom.pmf(l, k, 1.0 - eta)
    B = np.where(l <= k, B, 0.0)
    B.setflags(write=False)
    return B


def loss_matrix(n: int, eta: float) -> np.ndarray:
    """B[k, l] = b_l^k for 0 <= l <= k <= n (zero above the diagonal)."""
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta={eta!r} outside [0, 1]")
    return _loss_matrix_cached(int(n), float(eta))


def evolve(probe: ProbeState, params: ChannelParams) -> EvolvedEnsemble:
    eta, phi = params.eta, params.phi
    check_open_eta(eta)
    n = probe.n
    B = loss_matrix(n, eta)
    alpha = probe.amplitudes
    k = np.arange(n + 1)
    rotated = alpha * np.exp(1j * k * phi)
    p = probe.weights @ B
    blocks = []
    for l in range(n + 1):
        if p[l] <= _EMPTY:
            blocks.append(Block(l=l, p=0.0, psi=None))
            continue
        psi = rotated[l:] * np.sqrt(B[l:, l]) / np.sqrt(p[l])
        psi /= np.linalg.norm(psi)
        psi.setflags(write=False)
        blocks.append(Block(l=l, p=float(p[l]), psi=psi))
    return EvolvedEnsemble(n=n, eta=eta, phi=phi, amplitudes=alpha, blocks=tuple(blocks))


def moment_table(x: np.ndarray, B: np.ndarray, eta: float) -> MomentTable:
    k = np.arange(x.size, dtype=float)
    powers = np.stack([x, x * k, x * k * k], axis=1)  # (n+1, 3)
    xi = B.T @ powers
    occ = xi[:, 0] > _EMPTY
    w = x[:, None] * B
    # shift by the heaviest ket of each block so single-ket blocks get an exact
    # mean and an exactly zero variance, unlike xi2 - xi1^2/xi0
    ref = k[np.argmax(w, axis=0)]
    mean = ref.copy()
    mean[occ] += ((k[:, None] - ref[None, :]) * w).sum(axis=0)[occ] / xi[occ, 0]
    centered = np.einsum("k,kl,kl->l", x, B, (k[:, None] - mean[None, :]) ** 2)
    centered[~occ] = 0.0
    return MomentTable(xi=xi, Xi=powers.sum(axis=0), eta=eta, centered=centered)


def moments(probe: ProbeState, eta: float) -> MomentTable:
    check_open_eta(eta)
    return moment_table(probe.weights, loss_matrix(probe.n, eta), eta)


@dataclass(frozen=True)
class BlockDerivatives:
    """Closed-form inner products of a block state and its derivatives."""

    l: int
    overlap_phi: complex  # <psi|d_phi psi>
    overlap_eta: complex  # <psi|d_eta psi>
    P_phiphi: float
    P_etaeta: float
    P_phieta: complex

    @property
    def P_etaphi(self) -> complex:
        return complex(np.conj(self.P_phieta))

    def P(self, mu: str, nu: str) -> complex:
        table = {
            ("phi", "phi"): self.P_phiphi,
            ("eta", "eta"): self.P_etaeta,
            ("phi", "eta"): self.P_phieta,
            ("eta", "phi"): self.P_etaphi,
        }
        return table[(mu, nu)]


def block_derivatives(ensemble: EvolvedEnsemble, l: int, table: MomentTable | None = None) -> BlockDerivatives:
    block = ensemble.blocks[l]
    if not block.occupied:
        raise DegenerateBlockError(f"block l={l} has zero probability")
    if table is None:
        table = moment_table(np.abs(ensemble.amplitudes) ** 2, loss_matrix(ensemble.n, ensemble.eta), ensemble.eta)
    xi0, xi1, _ = table.xi[l]
    var = table.block_variance()[l]
    eta = ensemble.eta
    return BlockDerivatives(
        l=l,
        overlap_phi=1j * xi1 / xi0,
        overlap_eta=0j,
        P_phiphi=var,
        P_etaeta=var / (4 * eta**2),
        P_phieta=-1j * var / (2 * eta),
    )


def block_state_derivatives(ensemble: EvolvedEnsemble, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (d_phi psi_l, d_eta psi_l) in the block's local basis.

    With m_l = xi1/xi0 the mean photon number of the block,
    d_phi psi = i K psi and d_eta psi = (K - m_l) psi / (2 eta).
    """
    block = ensemble.blocks[l]
    if not block.occupied:
        raise DegenerateBlockError(f"block l={l} has zero probability")
    k = np.arange(l, ensemble.n + 1, dtype=float)
    psi = block.psi
    mean = float(np.sum(k * np.abs(psi) ** 2))
    return 1j * k * psi, (k - mean) * psi / (2 * ensemble.eta)


def prob_derivatives(table: MomentTable) -> tuple[np.ndarray, np.ndarray]:
    """(d_phi p_l, d_eta p_l) for every block."""
    eta = table.eta
    l = np.arange(table.xi.shape[0], dtype=float)
    xi0, xi1 = table.xi[:, 0], table.xi[:, 1]
    dp_eta = xi1 / eta - l * xi0 / (eta * (1 - eta))
    return np.zeros_like(xi0), dp_eta

"""A one-parameter-pair family of logarithmic derivatives and its Fisher matrices.

For block-pure states the family is fixed by the boundary masses ``M0`` and
``M1`` of the defining measure; ``M0 = M1 = 1/2`` is the SLD. The resulting
information matrix is complex Hermitian and reduces to the QFI at the SLD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalQualityError
from .fisher import PARAMS, classical_fisher_p, phase_information
from .fock_core import ChannelParams, ProbeState, block_derivatives, check_open_eta, evolve, moments

_SINGULAR = 1e-14


@dataclass(frozen=True)
class GldWeights:
    M0: float
    M1: float

    def __post_init__(self):
        if not (self.M0 > 0 and self.M1 > 0):
            raise DomainError("M0 and M1 must both be positive; the bound degenerates at zero")
        if self.M0 > 1 or self.M1 > 1 or self.M0 + self.M1 > 1 + 1e-12:
            raise DomainError(f"need M0, M1 in (0, 1] with M0 + M1 <= 1, got ({self.M0}, {self.M1})")

    @property
    def M2(self) -> float:
        return 1.0 - self.M0 - self.M1


SLD_WEIGHTS = GldWeights(0.5, 0.5)


def gld_fisher(probe: ProbeState, eta: float, w: GldWeights) -> np.ndarray:
    """I[p] + sum_l p_l (P_l(mu, nu) / M0 + P_l(nu, mu) / M1), a 2x2 complex matrix."""
    check_open_eta(eta)
    ens = evolve(probe, ChannelParams(eta))
    table = moments(probe, eta)
    out = classical_fisher_p(probe, eta).matrix.astype(complex)
    for blk in ens.blocks:
        if not blk.occupied:
            continue
        rec = block_derivatives(ens, blk.l, table)
        for i, mu in enumerate(PARAMS):
            for j, nu in enumerate(PARAMS):
                out[i, j] += blk.p * (rec.P(mu, nu) / w.M0 + rec.P(nu, mu) / w.M1)
    return out


def gld_fisher_closed_form(probe: ProbeState, eta: float, w: GldWeights) -> np.ndarray:
    check_open_eta(eta)
    table = moments(probe, eta)
    i_phi = phase_information(table)
    i_p = classical_fisher_p(probe, eta).etaeta
    M0, M1 = w.M0, w.M1
    c = i_phi / (16 * eta**2 * M0 * M1)
    off = c * 2j * eta * (M0 - M1)
    return np.array(
        [
            [c * 4 * eta**2 * (M0 + M1), off],
            [np.conj(off), i_p + c * (M0 + M1)],
        ]
    )


def scalarized_bound(probe: ProbeState, eta: float, w: GldWeights, u) -> float:
    """u^T I^-1 u, the variance bound on the estimate of u . (phi, eta).

    A singular matrix gives ``inf`` unless ``u`` lies in its range, in which
    case the pseudo-inverse value is returned.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (2,) or not np.any(u):
        raise ValueError("u must be a non-zero real 2-vector")
    I = gld_fisher(probe, eta, w)
    return _quadratic_inverse(I, u)


def _quadratic_inverse(I, u):
    scale = max(1.0, float(np.max(np.abs(I))))
    if abs(np.linalg.det(I)) > _SINGULAR * scale**2:
        val = u @ np.linalg.solve(I, u.astype(complex))
    else:
        evals, evecs = np.linalg.eigh(I)
        null = np.abs(evals) <= 1e-12 * scale
        if np.any(np.abs(evecs[:, null].conj().T @ u) > 1e-12):
            return math.inf
        val = u @ (np.linalg.pinv(I, hermitian=True) @ u)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise NumericalQualityError("quadratic form came out complex; matrix is not Hermitian", {"value": val})
    return float(val.real)


@dataclass
class DirectionReport:
    u: tuple[float, float]
    argmax: tuple[float, float]
    max_value: float
    sld_value: float
    margin: float  # sld_value - best value elsewhere on the grid
    degenerate: bool
    passed: bool


@dataclass
class OptimalityReport:
    resolution: int
    directions: list[DirectionReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.directions)


def verify_sld_optimal(probe: ProbeState, eta: float, resolution=21, u_samples=5, seed=0, tie_tol=1e-12):
    """Grid-search the (M0, M1) simplex and check the SLD point maximizes the bound.

    ``u_samples`` is either a count of random directions or an explicit list.
    Ties within ``tie_tol`` (relative) are flagged as degenerate and broken in
    favour of the point nearest (1/2, 1/2).
    """
    if resolution < 5:
        raise ValueError("grid resolution must be at least 5 per axis")
    if isinstance(u_samples, int):
        if u_samples < 3:
            raise ValueError("need at least 3 u samples")
        rng = np.random.default_rng(seed)
        us = rng.normal(size=(u_samples, 2))
    else:
        us = np.asarray(u_samples, dtype=float)
    grid = np.linspace(0.0, 1.0, resolution)
    cell = grid[1] - grid[0]
    points = [(a, b) for a in grid for b in grid if a > 0 and b > 0 and a + b <= 1 + 1e-12]

    # the matrix does not depend on u, so build each once
    mats = [gld_fisher(probe, eta, GldWeights(a, min(b, 1 - a))) for a, b in points]
    sld_mat = gld_fisher(probe, eta, SLD_WEIGHTS)
    report = OptimalityReport(resolution=resolution)
    for u in us:
        vals = np.array([_quadratic_inverse(m, u) for m in mats])
        sld_val = _quadratic_inverse(sld_mat, u)
        best = float(np.max(vals))
        floor = best if math.isinf(best) else best - tie_tol * max(1.0, abs(best))
        ties = [i for i, v in enumerate(vals) if v >= floor]
        pick = min(ties, key=lambda i: (abs(points[i][0] - 0.5) + abs(points[i][1] - 0.5), points[i]))
        arg = points[pick]
        far = [v for (a, b), v in zip(points, vals) if max(abs(a - 0.5), abs(b - 0.5)) > 1e-9]
        other = max(far) if far else -math.inf
        margin = 0.0 if sld_val == other else sld_val - other
        ok = max(abs(arg[0] - 0.5), abs(arg[1] - 0.5)) <= cell + 1e-12
        report.directions.append(
            DirectionReport(tuple(map(float, u)), tuple(map(float, arg)), best, sld_val, margin, len(ties) > 1, ok)
        )
    return report

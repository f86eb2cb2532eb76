"""Probe design on the probability simplex.

Two objectives over the weights ``x_k = |alpha_k|^2``:

``joint_delta``
    minimize ``Delta = sqrt(1/I_phiphi + 1/I_etaeta)`` where ``I_etaeta`` is
    the loss information left after measuring in the phase-SLD eigenbasis
    (or the full QFI with ``loss_information="quantum"``).
``phase_only``
    maximize ``I_phiphi``.

Each start runs L-BFGS on the squared parameterization ``x = y^2 / |y|^2``
and is then polished by a spectral projected-gradient phase directly on the
simplex, which can drive weights to exact zeros.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .config import TOL
from .errors import DomainError
from .fisher import information_and_gradient, precision_from_information
from .fock_core import check_open_eta, loss_matrix, make_probe
from .probes import fock_probe, holland_burnett, noon, uniform

log = logging.getLogger(__name__)

OBJECTIVES = ("joint_delta", "phase_only")
SENTINEL = 1e12


@dataclass(frozen=True)
class OptimizerSettings:
    objective: str = "joint_delta"
    multistart: int = 16
    max_iter: int = 3000
    ftol: float = 1e-13
    xtol: float = 1e-11
    seed: int = 0
    parameterization: str = "squared"
    # "measured" is the default pairing; "quantum" uses the full loss QFI
    loss_information: str = "measured"
    phase_warm_start: bool = True

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.multistart < 1 or self.max_iter < 1:
            raise ValueError("multistart and max_iter must be at least 1")
        if self.ftol <= 0 or self.xtol <= 0:
            raise ValueError("tolerances must be positive")
        if self.parameterization != "squared":
            raise ValueError("only the squared parameterization is implemented")
        if self.loss_information not in ("measured", "quantum"):
            raise ValueError("loss_information must be 'measured' or 'quantum'")


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    gradient: np.ndarray
    sentinel: bool = False


@dataclass
class StartRecord:
    label: str
    initial: float
    final: float
    iterations: int
    converged: bool
    max_infeasibility: float


@dataclass
class OptimizationResult:
    n: int
    eta: float
    objective_name: str
    x: np.ndarray
    objective: float  # Delta for joint_delta, I_phiphi for phase_only
    loss_value: float  # the minimized quantity
    gradient_norm: float
    active_set: tuple[int, ...]
    converged: bool
    best_start: str
    starts: list[StartRecord] = field(default_factory=list)


def objective_and_gradient(x, n, eta, objective="joint_delta", B=None, loss_information="measured") -> ObjectiveValue:
    """Minimization objective and its analytic gradient in the weights x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (n + 1,):
        raise ValueError(f"expected {n + 1} weights")
    check_open_eta(eta)
    if B is None:
        B = loss_matrix(n, eta)
    i_phi, g_phi, i_p, g_p = information_and_gradient(x, B, eta)
    if objective == "phase_only":
        return ObjectiveValue(-i_phi, -g_phi)
    if objective != "joint_delta":
        raise ValueError(f"unknown objective {objective!r}")
    if loss_information == "quantum":
        k = np.arange(n + 1, dtype=float)
        i_eta = float(x @ k) / (eta * (1 - eta))
        g_eta = k / (eta * (1 - eta))
    else:
        i_eta, g_eta = i_p, g_p
    if i_phi <= 1e-300 or i_eta <= 1e-300:
        return ObjectiveValue(SENTINEL, np.zeros(n + 1), sentinel=True)
    delta = math.sqrt(1 / i_phi + 1 / i_eta)
    if delta >= SENTINEL:
        return ObjectiveValue(SENTINEL, np.zeros(n + 1), sentinel=True)
    grad = -(g_phi / i_phi**2 + g_eta / i_eta**2) / (2 * delta)
    return ObjectiveValue(delta, grad)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _infeasibility(x):
    return max(abs(float(x.sum()) - 1.0), float(max(0.0, -x.min())))


class _Problem:
    def __init__(self, n, eta, settings):
        self.n, self.eta, self.s = n, eta, settings
        self.B = loss_matrix(n, eta)
        self.evals = 0

    def f(self, x) -> ObjectiveValue:
        self.evals += 1
        return objective_and_gradient(x, self.n, self.eta, self.s.objective, self.B, self.s.loss_information)

    def squared(self, y):
        S = float(y @ y)
        x = y * y / S
        ov = self.f(x)
        g = ov.gradient
        gy = 2 * y / S * (g - g @ x)
        return ov.value, gy

    def run_lbfgs(self, x0):
        worst = 0.0

        def cb(y):
            nonlocal worst
            worst = max(worst, _infeasibility(y * y / (y @ y)))

        res = minimize(
            self.squared,
            np.sqrt(x0),
            jac=True,
            method="L-BFGS-B",
            callback=cb,
            options={"maxiter": self.s.max_iter, "ftol": self.s.ftol, "gtol": 1e-12},
        )
        y = res.x
        return y * y / (y @ y), res.nit, worst

    def run_spg(self, x, memory=10):
        """Nonmonotone spectral projected gradient on the simplex."""
        x = project_simplex(x)
        ov = self.f(x)
        f, g = ov.value, ov.gradient
        history = [f]
        alpha = 1.0 / max(np.max(np.abs(project_simplex(x - g) - x)), 1e-12)
        worst = _infeasibility(x)
        converged = False
        it = 0
        for it in range(1, self.s.max_iter + 1):
            d = project_simplex(x - alpha * g) - x
            if np.max(np.abs(d)) < self.s.xtol:
                converged = True
                break
            gd = float(g @ d)
            f_ref = max(history[-memory:])
            lam = 1.0
            while True:
                x_new = x + lam * d
                ov_new = self.f(x_new)
                if not ov_new.sentinel and ov_new.value <= f_ref + 1e-4 * lam * gd:
                    break
                lam *= 0.5
                if lam < 1e-20:
                    return x, it, True, worst
            s = x_new - x
            y = ov_new.gradient - g
            sy = float(s @ y)
            alpha = float(s @ s) / sy if sy > 0 else 1e10
            alpha = min(max(alpha, 1e-12), 1e10)
            done = abs(ov_new.value - f) <= self.s.ftol * max(1.0, abs(f)) and np.max(np.abs(s)) < math.sqrt(self.s.xtol)
            x, f, g = project_simplex(x_new), ov_new.value, ov_new.gradient
            worst = max(worst, _infeasibility(x))
            history.append(f)
            if done:
                converged = True
                break
        return x, it, converged, worst


def _truncate(x):
    x = np.where(x < TOL.simplex_truncation, 0.0, x)
    return x / x.sum()


def projected_gradient_norm(x, g):
    return float(np.linalg.norm(project_simplex(x - g) - x))


def warm_starts(n: int, phase_optimum=None):
    starts = [("noon", noon(n).weights)]
    if n % 2 == 0 and n >= 2:
        starts.append(("holland_burnett", holland_burnett(n).weights))
    starts.append(("uniform", uniform(n).weights))
    fock = fock_probe(n).weights
    starts.append(("noon+fock", 0.5 * noon(n).weights + 0.5 * fock))
    starts.append(("uniform+fock", 0.7 * uniform(n).weights + 0.3 * fock))
    if phase_optimum is not None:
        starts.append(("phase_optimum", np.asarray(phase_optimum, dtype=float)))
    return starts


def optimize(n: int, eta: float, settings: OptimizerSettings | None = None, extra_starts=()) -> OptimizationResult:
    settings = settings or OptimizerSettings()
    check_open_eta(eta)
    if settings.objective == "joint_delta" and n < 2:
        raise DomainError("joint estimation needs n >= 2")
    if n < 1:
        raise DomainError("need at least one photon")
    prob = _Problem(n, eta, settings)

    phase_opt = None
    if settings.objective == "joint_delta" and settings.phase_warm_start:
        phase_opt = optimize(n, eta, replace(settings, objective="phase_only", multistart=max(2, settings.multistart // 4))).x
    starts = warm_starts(n, phase_opt) + list(extra_starts)
    rng = np.random.default_rng(settings.seed)
    for i in range(settings.multistart):
        starts.append((f"random{i}", rng.dirichlet(np.ones(n + 1))))

    candidates = []
    records = []
    for label, x0 in starts:
        # strictly interior so every coordinate can move in the squared form
        x0 = 0.999 * np.asarray(x0, dtype=float) / np.sum(x0) + 0.001 / (n + 1)
        f0 = prob.f(x0).value
        x1, it1, worst1 = prob.run_lbfgs(x0)
        x2, it2, conv, worst2 = prob.run_spg(x1)
        x3 = _truncate(x2)
        ov = prob.f(x3)
        if ov.sentinel or not np.isfinite(ov.value):
            conv = False
        records.append(StartRecord(label, f0, ov.value, it1 + it2, conv, max(worst1, worst2, _infeasibility(x3))))
        candidates.append((ov.value, label, x3, ov, conv))

    finite = [c for c in candidates if np.isfinite(c[0]) and not c[3].sentinel]
    if not finite:
        log.warning("all %d starts failed for n=%d eta=%g", len(candidates), n, eta)
        best = min(candidates, key=lambda c: c[0])
    else:
        best_val = min(c[0] for c in finite)
        ties = [c for c in finite if c[0] <= best_val + 1e-12 * max(1.0, abs(best_val))]
        best = min(ties, key=lambda c: tuple(c[2]))
    value, label, x, ov, conv = best
    objective = value if settings.objective == "joint_delta" else -value
    return OptimizationResult(
        n=n,
        eta=eta,
        objective_name=settings.objective,
        x=x,
        objective=objective,
        loss_value=value,
        gradient_norm=projected_gradient_norm(x, ov.gradient),
        active_set=tuple(int(i) for i in np.flatnonzero(x == 0)),
        converged=bool(conv and bool(finite)),
        best_start=label,
        starts=records,
    )


@dataclass
class TradeoffRow:
    eta: float
    x: np.ndarray
    i_phi: float
    i_eta_measured: float
    i_eta_quantum: float
    delta_phi: float
    delta_eta: float
    delta: float
    converged: bool


def evaluate_weights(x, eta) -> TradeoffRow:
    """Recompute every Fisher column for a weight vector from scratch."""
    from .fisher import measured_fisher_phase_sld, qfi_matrix

    probe = make_probe(x)
    m = measured_fisher_phase_sld(probe, eta)
    q = qfi_matrix(probe, eta)
    prec = precision_from_information(m.phiphi, m.etaeta)
    return TradeoffRow(
        eta, probe.weights, m.phiphi, m.etaeta, q.etaeta, prec.delta_phi, prec.delta_eta, prec.delta_total, True
    )


def tradeoff_scan(n: int, etas, settings: OptimizerSettings | None = None) -> list[TradeoffRow]:
    settings = settings or OptimizerSettings()
    etas = sorted(float(e) for e in etas)
    for e in etas:
        check_open_eta(e)
    rows = []
    for eta in etas:
        res = optimize(n, eta, settings)
        row = evaluate_weights(res.x, eta)
        row.converged = res.converged
        rows.append(row)
    return rows

"""Cross-checks between the closed forms and the dense oracle, as a runnable suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fisher import (
    classical_fisher_p,
    commutator_expectation,
    loss_distribution_information_closed_form,
    measured_fisher_phase_sld,
    qfi_matrix,
)
from .fock_core import ChannelParams, evolve, make_probe, moments
from .gld import SLD_WEIGHTS, gld_fisher, verify_sld_optimal
from .oracle import numerical_commutator, numerical_qfi
from .probes import LIBRARY, holland_burnett, noon
from .sld import classical_fisher_of_measurement, sld_block, sld_eigenpairs, sld_projectors

ETAS = (0.2, 0.5, 0.8)


@dataclass
class CheckResult:
    name: str
    error: float
    tolerance: float
    passed: bool


def random_probes(rng, count, n_max, n_min=1, random_phases=True):
    out = []
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        x = rng.dirichlet(np.ones(n + 1))
        ph = rng.uniform(0, 2 * np.pi, n + 1) if random_phases else None
        out.append(make_probe(x, ph))
    return out


def library_probes(n_values):
    out = []
    for n in n_values:
        for name, ctor in LIBRARY.items():
            if name == "hb" and (n % 2 or n < 2):
                continue
            out.append(ctor(n))
    return out


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def relative_error(a, b, floor=1e-6):
    """|a - b| / |b|, with |b| floored so exact zeros compare absolutely."""
    return abs(a - b) / max(abs(b), floor)


def check_identity(rng, n_max=20):
    probes = library_probes(range(1, n_max + 1)) + random_probes(rng, 100, n_max)
    err_trade = err_cancel = 0.0
    for probe in probes:
        for eta in np.round(np.arange(0.1, 1.0, 0.1), 1):
            q = qfi_matrix(probe, eta)
            m = measured_fisher_phase_sld(probe, eta)
            err_trade = max(err_trade, _rel(m.etaeta + q.phiphi / (4 * eta**2), q.etaeta))
            closed = loss_distribution_information_closed_form(moments(probe, eta))
            err_cancel = max(err_cancel, _rel(classical_fisher_p(probe, eta).etaeta, closed))
    return [
        CheckResult("tradeoff_identity", err_trade, 1e-10, err_trade <= 1e-10),
        CheckResult("loss_distribution_two_routes", err_cancel, 1e-10, err_cancel <= 1e-10),
    ]


def check_oracle(rng, n_budget):
    probes = library_probes(range(1, n_budget + 1)) + random_probes(rng, 20, n_budget)
    err = off = 0.0
    for probe in probes:
        for eta in ETAS:
            num = numerical_qfi(probe, ChannelParams(eta, 0.3))
            ref = qfi_matrix(probe, eta)
            for i in range(2):
                err = max(err, relative_error(num.matrix[i, i], ref.matrix[i, i]))
            off = max(off, abs(num.phieta))
    return [
        CheckResult("oracle_qfi_relative", err, 1e-8, err <= 1e-8),
        CheckResult("oracle_offdiagonal", off, 1e-8, off <= 1e-8),
    ]


def check_commutator(rng, n_budget):
    err = 0.0
    for probe in random_probes(rng, 10, min(n_budget, 8)) + [noon(min(n_budget, 6))]:
        for eta in ETAS:
            c = numerical_commutator(probe, ChannelParams(eta, 0.1))
            err = max(err, abs(c - commutator_expectation(probe, eta)))
    return [CheckResult("commutator_witness", err, 1e-7, err <= 1e-7)]


def check_sld(rng, n_budget):
    err = 0.0
    for probe in random_probes(rng, 10, min(n_budget, 8)):
        ens = evolve(probe, ChannelParams(0.6, 0.2))
        for kappa in ("phi", "eta"):
            for pair in sld_eigenpairs(ens, kappa):
                L = sld_block(ens, kappa, pair.l).matrix
                for lam, v in zip(pair.values, pair.vectors):
                    err = max(err, float(np.max(np.abs(L @ v - lam * v))))
    return [CheckResult("sld_eigenpairs", err, 1e-9, err <= 1e-9)]


def check_measurement(rng):
    err = 0.0
    for probe in random_probes(rng, 3, 5, n_min=2) + [holland_burnett(4)]:
        params = ChannelParams(0.5, 0.4)
        ens = evolve(probe, params)
        _, vecs = sld_projectors(ens, "phi")
        cf = classical_fisher_of_measurement(probe, params, vecs)
        ref = measured_fisher_phase_sld(probe, 0.5)
        err = max(err, abs(cf.phiphi / ref.phiphi - 1), abs(cf.etaeta / ref.etaeta - 1))
    return [CheckResult("phase_sld_measurement", err, 1e-5, err <= 1e-5)]


def check_gld(rng):
    results = []
    reduction = 0.0
    worst_ok = True
    for probe in (noon(4), holland_burnett(6)):
        for eta in (0.3, 0.5):
            reduction = max(reduction, float(np.max(np.abs(gld_fisher(probe, eta, SLD_WEIGHTS) - qfi_matrix(probe, eta).matrix))))
            rep = verify_sld_optimal(probe, eta, resolution=21, u_samples=5, seed=int(rng.integers(1 << 31)))
            worst_ok &= rep.passed
    results.append(CheckResult("gld_reduces_to_qfi", reduction, 1e-12, reduction <= 1e-12))
    results.append(CheckResult("gld_sld_argmax", 0.0 if worst_ok else 1.0, 0.5, worst_ok))
    return results


ALL = ("identity", "oracle", "commutator", "sld", "measurement", "gld")


def run_checks(checks=("all",), n_budget=8, seed=0):
    rng = np.random.default_rng(seed)
    wanted = ALL if "all" in checks else tuple(checks)
    unknown = set(wanted) - set(ALL)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; choose from {ALL}")
    results = []
    for name in wanted:
        if name == "identity":
            results += check_identity(rng)
        elif name == "oracle":
            results += check_oracle(rng, n_budget)
        elif name == "commutator":
            results += check_commutator(rng, n_budget)
        elif name == "sld":
            results += check_sld(rng, n_budget)
        elif name == "measurement":
            results += check_measurement(rng)
        elif name == "gld":
            results += check_gld(rng)
    return results

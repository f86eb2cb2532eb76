"""Acceptance criteria, each at its stated tolerance and runtime budget.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from conftest import brute_force_delta
from phaseloss.cli import main
from phaseloss.fisher import (
    combined_uncertainty,
    commutator_expectation,
    measured_fisher_loss_sld,
    measured_fisher_phase_sld,
    qfi_matrix,
)
from phaseloss.fock_core import ChannelParams, evolve, make_probe
from phaseloss.gld import SLD_WEIGHTS, gld_fisher, verify_sld_optimal
from phaseloss.optimizer import OptimizerSettings, optimize
from phaseloss.oracle import numerical_commutator, numerical_qfi
from phaseloss.probes import fock_probe, holland_burnett, noon
from phaseloss.sld import classical_fisher_of_measurement, sld_block, sld_eigenpairs, sld_projectors
from phaseloss.validation import library_probes, random_probes, relative_error

ETAS3 = (0.2, 0.5, 0.8)
GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


@pytest.fixture(scope="module")
def sweep_probes():
    return random_probes(np.random.default_rng(2024), 200, 10)


@pytest.fixture(scope="module")
def n6_grid():
    """Joint and phase-only optima at n = 6 over the eta grid, with wall time."""
    t0 = time.perf_counter()
    joint = {eta: optimize(6, eta, OptimizerSettings()) for eta in GRID}
    phase = {eta: optimize(6, eta, OptimizerSettings(objective="phase_only")) for eta in GRID}
    return joint, phase, time.perf_counter() - t0


def test_01_diagonal_qfi(sweep_probes, criterion):
    t0 = time.perf_counter()
    worst = 0.0
    closed_zero = True
    for probe in sweep_probes:
        for eta in ETAS3:
            worst = max(worst, abs(numerical_qfi(probe, ChannelParams(eta, 0.3)).phieta))
            closed_zero &= qfi_matrix(probe, eta).phieta == 0.0
    wall = time.perf_counter() - t0
    criterion(
        1,
        "diagonal QFI",
        worst <= 1e-8 and closed_zero and wall < 30,
        f"max oracle |I_phieta| = {worst:.2e} (tol 1e-8), closed form exactly 0: {closed_zero}, {wall:.1f} s (< 30 s)",
    )


def test_02_closed_form_vs_oracle(sweep_probes, criterion):
    t0 = time.perf_counter()
    err_a = err_f = 0.0
    for probe in sweep_probes:
        for eta in ETAS3:
            ref = qfi_matrix(probe, eta).matrix
            a = numerical_qfi(probe, ChannelParams(eta, 0.3), source="analytic").matrix
            f = numerical_qfi(probe, ChannelParams(eta, 0.3), source="finite_difference").matrix
            for i in range(2):
                err_a = max(err_a, relative_error(a[i, i], ref[i, i]))
                err_f = max(err_f, relative_error(f[i, i], ref[i, i]))
    wall = time.perf_counter() - t0
    criterion(
        2,
        "closed form vs oracle QFI",
        err_a <= 1e-8 and err_f <= 1e-5 and wall < 120,
        f"analytic {err_a:.2e} (tol 1e-8), finite difference {err_f:.2e} (tol 1e-5), {wall:.1f} s (< 120 s)",
    )


def test_03_tradeoff_identity(criterion):
    t0 = time.perf_counter()
    probes = library_probes(range(1, 21)) + random_probes(np.random.default_rng(3), 100, 20)
    worst = 0.0
    for probe in probes:
        for eta in GRID:
            q = qfi_matrix(probe, eta)
            m = measured_fisher_phase_sld(probe, eta)
            worst = max(worst, abs(m.etaeta + q.phiphi / (4 * eta**2) - q.etaeta) / q.etaeta)
    wall = time.perf_counter() - t0
    criterion(
        3,
        "trade-off identity",
        worst <= 1e-10 and wall < 10,
        f"max relative residual {worst:.2e} over {len(probes)} probes (tol 1e-10), {wall:.2f} s (< 10 s)",
    )


def test_04_commutator_witness(criterion):
    # Stated target: -i I_phiphi / (2 eta). The library returns the value the
    # dense oracle produces; both residuals are reported.
    probes = random_probes(np.random.default_rng(4), 20, 8, n_min=2) + [noon(6), holland_burnett(8)]
    stated = library = 0.0
    for probe in probes:
        for eta in ETAS3:
            c = numerical_commutator(probe, ChannelParams(eta, 0.1))
            i_phi = qfi_matrix(probe, eta).phiphi
            stated = max(stated, abs(c - (-1j * i_phi / (2 * eta))))
            library = max(library, abs(c - commutator_expectation(probe, eta)))
    criterion(
        4,
        "commutator witness",
        stated <= 1e-7,
        f"|oracle - (-i I_phiphi/(2 eta))| max {stated:.2e} (tol 1e-7); "
        f"|oracle - i I_phiphi/eta| max {library:.2e}",
    )


def test_05_measurement_level(criterion):
    probes = random_probes(np.random.default_rng(5), 4, 5, n_min=2) + [noon(4), holland_burnett(4)]
    phase_err = loss_phi = loss_err = 0.0
    for probe in probes:
        for eta in (0.3, 0.6):
            params = ChannelParams(eta, 0.4)
            ens = evolve(probe, params)
            _, v = sld_projectors(ens, "phi")
            cf = classical_fisher_of_measurement(probe, params, v)
            ref = measured_fisher_phase_sld(probe, eta)
            phase_err = max(phase_err, abs(cf.phiphi / ref.phiphi - 1), abs(cf.etaeta / ref.etaeta - 1))
            _, v = sld_projectors(ens, "eta")
            cf = classical_fisher_of_measurement(probe, params, v)
            loss_phi = max(loss_phi, abs(cf.phiphi))
            loss_err = max(loss_err, abs(cf.etaeta / measured_fisher_loss_sld(probe, eta).etaeta - 1))
    criterion(
        5,
        "measurement-level confirmation",
        phase_err <= 1e-5 and loss_phi <= 1e-6 and loss_err <= 1e-5,
        f"phi-SLD basis rel err {phase_err:.2e} (tol 1e-5); eta-SLD basis phiphi {loss_phi:.2e} (tol 1e-6), "
        f"etaeta rel err {loss_err:.2e} (tol 1e-5)",
    )


def test_06_sld_spectra(criterion):
    worst = 0.0
    for probe in random_probes(np.random.default_rng(6), 30, 8):
        for eta in ETAS3:
            ens = evolve(probe, ChannelParams(eta, 0.7))
            for kappa in ("phi", "eta"):
                for pair in sld_eigenpairs(ens, kappa):
                    vals, vecs = np.linalg.eigh(sld_block(ens, kappa, pair.l).matrix)
                    for lam, v in zip(pair.values, pair.vectors):
                        j = int(np.argmin(np.abs(vals - lam)))
                        worst = max(worst, abs(vals[j] - lam))
                        if not pair.degenerate:
                            worst = max(worst, abs(1 - abs(np.vdot(vecs[:, j], v))))
    criterion(6, "SLD spectra", worst <= 1e-9, f"max eigenvalue/eigenvector deviation {worst:.2e} (tol 1e-9)")


def test_07_gld_optimality(criterion):
    rng = np.random.default_rng(7)
    probes = [noon(4), noon(6)] + random_probes(rng, 2, 4, n_min=4) + random_probes(rng, 2, 6, n_min=6)
    argmax_ok = True
    reduction = 0.0
    for probe in probes:
        for eta in (0.3, 0.5):
            rep = verify_sld_optimal(probe, eta, resolution=21, u_samples=5, seed=int(rng.integers(1 << 31)))
            argmax_ok &= rep.passed
            diff = gld_fisher(probe, eta, SLD_WEIGHTS) - qfi_matrix(probe, eta).matrix
            reduction = max(reduction, float(np.max(np.abs(diff))))
    criterion(
        7,
        "GLD optimality",
        argmax_ok and reduction <= 1e-12,
        f"argmax within one cell of (1/2, 1/2) for all: {argmax_ok}; |GLD(1/2,1/2) - QFI| {reduction:.2e} (tol 1e-12)",
    )


def test_08_known_endpoints(criterion):
    noon_err = max(abs(qfi_matrix(noon(n), 1 - 1e-9).phiphi / n**2 - 1) for n in range(1, 13))
    fock_ok = True
    for n in range(1, 13):
        for eta in GRID:
            q = qfi_matrix(fock_probe(n), eta)
            fock_ok &= q.phiphi == 0.0 and q.etaeta == n / (eta * (1 - eta))
    criterion(
        8,
        "known endpoints",
        noon_err <= 1e-4 and fock_ok,
        f"noon I_phiphi/n^2 - 1 at eta = 1-1e-9: {noon_err:.2e} (tol 1e-4); Fock exact: {fock_ok}",
    )


def test_09_optimizer_dominance(n6_grid, criterion):
    joint, phase, wall = n6_grid
    dominance = True
    hb_gap = 0.0
    for eta in GRID:
        d = joint[eta].objective
        others = [combined_uncertainty(p, eta).delta_total for p in (noon(6), holland_burnett(6))]
        others.append(combined_uncertainty(make_probe(phase[eta].x), eta).delta_total)
        dominance &= all(d <= o + 1e-12 for o in others)
        hb_gap = max(hb_gap, others[1] / d - 1)
    criterion(
        9,
        "optimizer dominance",
        dominance and hb_gap <= 0.15 and wall < 300,
        f"joint optimum lowest at every eta: {dominance}; max Holland-Burnett excess {hb_gap:.3f} (tol 0.15); "
        f"{wall:.1f} s (< 300 s)",
    )


def test_10_lossy_arm_weight_shift(n6_grid, criterion):
    joint, phase, _ = n6_grid
    margins = [joint[eta].x[6] - phase[eta].x[6] for eta in GRID]
    criterion(
        10,
        "lossy-arm weight shift",
        min(margins) >= 0,
        "x_6 joint - phase: " + ", ".join(f"{m:.3f}" for m in margins),
    )


def test_11_phase_penalty(criterion):
    t0 = time.perf_counter()
    eta = 0.9
    penalties = {}
    for n in (5, 10, 50):
        joint = optimize(n, eta, OptimizerSettings())
        phase = optimize(n, eta, OptimizerSettings(objective="phase_only"))
        penalties[n] = (phase.objective / qfi_matrix(make_probe(joint.x), eta).phiphi) ** 0.5 - 1
    wall = time.perf_counter() - t0
    criterion(
        11,
        "phase-penalty bound",
        max(penalties.values()) < 0.20 and wall < 600,
        ", ".join(f"n={n}: {p:.4f}" for n, p in penalties.items()) + f" (tol 0.20), {wall:.1f} s (< 600 s)",
    )


def test_12_brute_force(criterion):
    worst = 0.0
    for eta in GRID:
        res = optimize(2, eta, OptimizerSettings())
        brute, _ = brute_force_delta(eta, step=1e-3)
        worst = max(worst, abs(res.objective - brute))
    criterion(12, "brute-force optimizer check", worst <= 1e-3, f"max |Delta_opt - Delta_grid| {worst:.2e} (tol 1e-3)")


@pytest.mark.slow
def test_13_scale(criterion):
    t0 = time.perf_counter()
    res = optimize(200, 0.5, OptimizerSettings())
    wall = time.perf_counter() - t0
    probe = make_probe(res.x)
    qfi_matrix(probe, 0.3)  # first call pays for imports and allocation
    reps = 20
    t1 = time.perf_counter()
    for i in range(reps):
        eta = 0.31 + 0.01 * i  # fresh eta each time, so no cached loss matrix
        measured_fisher_phase_sld(probe, eta)
        qfi_matrix(probe, eta)
    per_eval = (time.perf_counter() - t1) / reps
    criterion(
        13,
        "scale",
        wall < 600 and per_eval < 0.010 and res.converged,
        f"n=200 joint optimization {wall:.1f} s (< 600 s), Delta = {res.objective:.10f}, converged {res.converged}; "
        f"closed-form Fisher {per_eval * 1e3:.2f} ms per (probe, eta) (< 10 ms)",
    )


def test_14_determinism(tmp_path, criterion):
    argv = ["tradeoff", "--n", "6", "--eta-grid", "0.1", "0.9", "9", "--seed", "11"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").glob("tradeoff_*.csv"))
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    criterion(14, "determinism", same and len(files) == 4, f"{len(files)} CSVs byte-identical: {same}")

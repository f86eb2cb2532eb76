import math

import numpy as np
import pytest
from hypothesis import given

from conftest import etas, probes
from phaseloss.errors import DomainError
from phaseloss.fisher import (
    block_decomposition,
    classical_fisher_p,
    combined_uncertainty,
    commutator_expectation,
    information_and_gradient,
    loss_distribution_information_closed_form,
    measured_fisher_loss_sld,
    measured_fisher_phase_sld,
    precision_from_information,
    qfi_matrix,
)
from phaseloss.fock_core import loss_matrix, make_probe, moments
from phaseloss.probes import fock_probe, holland_burnett, noon


@given(probes(n_max=20), etas)
def test_tradeoff_identity(probe, eta):
    q = qfi_matrix(probe, eta)
    m = measured_fisher_phase_sld(probe, eta)
    assert m.etaeta + q.phiphi / (4 * eta**2) == pytest.approx(q.etaeta, rel=1e-10)


@given(probes(n_max=20), etas)
def test_loss_distribution_two_routes(probe, eta):
    direct = classical_fisher_p(probe, eta).etaeta
    closed = loss_distribution_information_closed_form(moments(probe, eta))
    assert direct == pytest.approx(closed, rel=1e-9, abs=1e-9)


@given(probes(n_max=12), etas)
def test_information_ordering(probe, eta):
    q = qfi_matrix(probe, eta)
    assert q.phieta == 0.0
    assert 0 <= q.phiphi <= probe.n**2 + 1e-9
    assert measured_fisher_phase_sld(probe, eta).etaeta <= q.etaeta * (1 + 1e-12)
    assert measured_fisher_loss_sld(probe, eta).phiphi == 0.0


@given(probes(n_max=10), etas)
def test_block_decomposition_sums_to_qfi(probe, eta):
    classical, quantum = block_decomposition(probe, eta, phi=0.4)
    q = qfi_matrix(probe, eta).matrix
    assert np.allclose(classical + quantum, q, rtol=1e-10, atol=1e-10)
    assert quantum[1, 1] == pytest.approx(q[0, 0] / (4 * eta**2), rel=1e-10, abs=1e-12)


def test_phase_information_phase_independent():
    x = [0.2, 0.3, 0.5]
    a = qfi_matrix(make_probe(x), 0.6).matrix
    b = qfi_matrix(make_probe(x, [0.0, 1.3, -2.0]), 0.6).matrix
    assert np.array_equal(a, b)


def test_commutator_sign_and_zero():
    c = commutator_expectation(noon(4), 0.5)
    assert c.real == 0 and c.imag > 0
    assert commutator_expectation(fock_probe(5), 0.5) == 0


def test_noon_lossless_limit():
    for n in (1, 3, 6, 10):
        assert qfi_matrix(noon(n), 1 - 1e-9).phiphi == pytest.approx(n**2, rel=1e-4)


def test_noon_closed_form_with_loss():
    # the lossy arm keeps the phase only if no photon is lost
    n, eta = 4, 0.7
    p = 0.5 * eta**n
    expected = 4 * n**2 * p * 0.5 / (p + 0.5)
    assert qfi_matrix(noon(n), eta).phiphi == pytest.approx(expected, rel=1e-12)


def test_fock_endpoint():
    for n in (1, 4, 9):
        for eta in (0.2, 0.5, 0.77):
            q = qfi_matrix(fock_probe(n), eta)
            assert q.phiphi == 0.0
            assert q.etaeta == n / (eta * (1 - eta))


def test_precision_infinite_without_information():
    s = combined_uncertainty(fock_probe(4), 0.5)
    assert math.isinf(s.delta_phi) and s.no_information
    s = precision_from_information(4.0, 16.0)
    assert s.delta_total == pytest.approx(math.hypot(0.5, 0.25))


def test_zero_photons_rejected():
    with pytest.raises(DomainError):
        qfi_matrix(make_probe([1.0]), 0.5)


@given(probes(n_min=2, n_max=12, phases=False), etas)
def test_vectorised_gradient_matches_finite_difference(probe, eta):
    x = probe.weights
    B = loss_matrix(probe.n, eta)
    i_phi, g_phi, i_p, g_p = information_and_gradient(x, B, eta)
    assert i_phi == pytest.approx(qfi_matrix(probe, eta).phiphi, rel=1e-12, abs=1e-12)
    assert i_p == pytest.approx(classical_fisher_p(probe, eta).etaeta, rel=1e-12)
    h = 1e-6
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        up = information_and_gradient(x + e, B, eta)
        dn = information_and_gradient(x - e, B, eta)
        scale = max(1.0, abs(g_phi[k]), abs(g_p[k]))
        assert (up[0] - dn[0]) / (2 * h) == pytest.approx(g_phi[k], abs=1e-5 * scale)
        assert (up[2] - dn[2]) / (2 * h) == pytest.approx(g_p[k], abs=1e-5 * scale)


def test_holland_burnett_loss_information_matches_mean():
    hb = holland_burnett(6)
    assert qfi_matrix(hb, 0.5).etaeta == pytest.approx(3 / 0.25, rel=1e-12)

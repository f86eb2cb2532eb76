import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from phaseloss.probes import (
    TwoModeState,
    beamsplitter_matrix,
    beamsplitter_transform,
    fock_probe,
    holland_burnett,
    library_probe,
    noon,
    uniform,
)


def mode_operator_unitary(n, T):
    """Beamsplitter from the exponentiated mode generator, restricted to n photons."""
    d = n + 1
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    A, B = np.kron(a, np.eye(d)), np.kron(np.eye(d), a)
    theta = math.acos(math.sqrt(T))
    U = expm(-theta * (A.conj().T @ B - B.conj().T @ A))
    idx = [k * d + (n - k) for k in range(n + 1)]
    return U[np.ix_(idx, idx)]


@settings(max_examples=20)
@given(st.integers(1, 7), st.floats(0.0, 1.0))
def test_beamsplitter_matches_mode_operator_oracle(n, T):
    assert np.allclose(beamsplitter_matrix(n, T), mode_operator_unitary(n, T), atol=1e-10)


@pytest.mark.parametrize("n", [1, 4, 11])
def test_beamsplitter_unitary(n):
    U = beamsplitter_matrix(n, 0.37)
    assert np.allclose(U.T @ U, np.eye(n + 1), atol=1e-12)


def test_hong_ou_mandel():
    out = beamsplitter_transform(TwoModeState.fock(1, 1), 0.5)
    assert abs(out.amplitudes[1]) < 1e-15
    assert np.abs(out.amplitudes[[0, 2]]) ** 2 == pytest.approx([0.5, 0.5])


def test_holland_burnett_small():
    # |1,1> -> (|2,0> - |0,2>)/sqrt 2 up to sign: a NOON state for n = 2
    assert np.allclose(holland_burnett(2).weights, noon(2).weights)


@pytest.mark.parametrize("n", [2, 6, 20, 200])
def test_holland_burnett_structure(n):
    x = holland_burnett(n).weights
    assert x.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(x, x[::-1], atol=1e-14)
    assert np.all(x[1::2] < 1e-14)  # odd photon numbers vanish


def test_holland_burnett_n6_weights():
    # |3,3> through a balanced splitter: 5/16, 3/16, 3/16, 5/16 on even k
    x = holland_burnett(6).weights
    assert x[[0, 2, 4, 6]] == pytest.approx([5 / 16, 3 / 16, 3 / 16, 5 / 16], abs=1e-14)


@pytest.mark.parametrize("n", [0, 3, 7])
def test_holland_burnett_needs_even(n):
    with pytest.raises(ValueError):
        holland_burnett(n)


def test_library():
    assert library_probe("fock", 3).weights[-1] == 1.0
    assert np.allclose(uniform(4).weights, 0.2)
    assert fock_probe(2).n == 2
    with pytest.raises(ValueError, match="unknown probe"):
        library_probe("coherent", 3)

"""Standard comparison probes and a Fock-basis beamsplitter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fock_core import ProbeState, make_probe


@dataclass(frozen=True)
class TwoModeState:
    """Amplitudes on |k, n-k>, k = 0..n."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} amplitudes")
        if abs(np.vdot(amps, amps).real - 1) > 1e-12:
            raise ValueError("two-mode state is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, a: int, b: int) -> "TwoModeState":
        amps = np.zeros(a + b + 1, dtype=complex)
        amps[a] = 1.0
        return cls(a + b, amps)

    def to_probe(self) -> ProbeState:
        return ProbeState(self.n, self.amplitudes)


def _need_photons(n):
    if n < 1:
        raise ValueError("probe needs at least one photon")


def noon(n: int) -> ProbeState:
    _need_photons(n)
    w = np.zeros(n + 1)
    w[0] = w[n] = 0.5
    return make_probe(w)


def fock_probe(n: int) -> ProbeState:
    """All n photons in the sensing (lossy) arm."""
    _need_photons(n)
    w = np.zeros(n + 1)
    w[n] = 1.0
    return make_probe(w)


def uniform(n: int) -> ProbeState:
    _need_photons(n)
    return make_probe(np.full(n + 1, 1.0 / (n + 1)))


def _bs_sum(p, q, k, T, R):
    # coefficient of a^dag^k b^dag^(N-k) in (sT a + sR b)^p (-sR a + sT b)^q
    terms = []
    for j in range(max(0, k - p), min(q, k) + 1):
        i = k - j
        c = math.comb(p, i) * math.comb(q, j) * (-1) ** j
        terms.append(c * math.sqrt(T) ** (i + q - j) * math.sqrt(R) ** (p - i + j))
    return math.fsum(terms)


def _bs_sum_balanced(p, q, k):
    return sum(math.comb(p, k - j) * math.comb(q, j) * (-1) ** j for j in range(max(0, k - p), min(q, k) + 1))


def _bs_element(n, k, p, T):
    R = 1.0 - T
    q = n - p
    if T == R:
        # exact integer sum; the common factor is 2^(-n/2)
        s = _bs_sum_balanced(p, q, k)
        if s == 0:
            return 0.0
        sq = Fraction(s * s * math.factorial(k) * math.factorial(n - k), math.factorial(p) * math.factorial(q) * 2**n)
        return math.copysign(math.sqrt(sq), s)
    norm = math.exp(0.5 * (math.lgamma(k + 1) + math.lgamma(n - k + 1) - math.lgamma(p + 1) - math.lgamma(q + 1)))
    return _bs_sum(p, q, k, T, R) * norm


def _check_transmissivity(T):
    if not (0.0 <= T <= 1.0):
        raise ValueError(f"transmissivity {T!r} outside [0, 1]")


def beamsplitter_matrix(n: int, transmissivity: float) -> np.ndarray:
    """U[k_out, k_in] on the n-photon subspace, basis |k, n-k>.

    Mode operators map as a^dag -> sqrt(T) a^dag + sqrt(R) b^dag and
    b^dag -> -sqrt(R) a^dag + sqrt(T) b^dag with R = 1 - T.
    """
    T = float(transmissivity)
    _check_transmissivity(T)
    return np.array([[_bs_element(n, k, p, T) for p in range(n + 1)] for k in range(n + 1)])


def beamsplitter_transform(state: TwoModeState, transmissivity: float) -> TwoModeState:
    T = float(transmissivity)
    _check_transmissivity(T)
    n = state.n
    out = np.zeros(n + 1, dtype=complex)
    for p in np.flatnonzero(state.amplitudes):
        col = np.array([_bs_element(n, k, int(p), T) for k in range(n + 1)])
        out += col * state.amplitudes[p]
    out /= np.linalg.norm(out)
    return TwoModeState(n, out)


def holland_burnett(n: int) -> ProbeState:
    """Twin-Fock input |n/2, n/2> through a balanced beamsplitter."""
    if n < 2 or n % 2:
        raise ValueError(f"Holland-Burnett states need an even n >= 2, got {n}")
    return beamsplitter_transform(TwoModeState.fock(n // 2, n // 2), 0.5).to_probe()


LIBRARY = {
    "noon": noon,
    "hb": holland_burnett,
    "fock": fock_probe,
    "uniform": uniform,
}


def library_probe(name: str, n: int) -> ProbeState:
    try:
        return LIBRARY[name](n)
    except KeyError:
        raise ValueError(f"unknown probe {name!r}; choose from {sorted(LIBRARY)}") from None

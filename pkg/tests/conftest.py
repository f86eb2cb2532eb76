import hypothesis
import hypothesis.strategies as st
import numpy as np
import pytest

from phaseloss.fock_core import make_probe

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")


@st.composite
def probes(draw, n_min=1, n_max=10, phases=True):
    n = draw(st.integers(n_min, n_max))
    raw = draw(st.lists(st.floats(0.0, 1.0), min_size=n + 1, max_size=n + 1))
    w = np.asarray(raw) + 1e-3  # keep away from the all-zero vector
    ph = None
    if phases:
        ph = np.asarray(draw(st.lists(st.floats(0.0, 2 * np.pi), min_size=n + 1, max_size=n + 1)))
    return make_probe(w / w.sum(), ph)


etas = st.floats(0.05, 0.95)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def brute_force_delta(eta, step=1e-3, loss_information="measured"):
    """Exhaustive n = 2 simplex grid search for the joint objective, vectorised."""
    m = int(round(1 / step))
    i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    keep = i + j <= m
    x = np.stack([i[keep], j[keep], m - i[keep] - j[keep]], axis=1) / m  # (N, 3)
    k = np.arange(3.0)
    l = np.arange(3.0)
    from scipy.stats import binom

    B = binom.pmf(k[:, None] - l[None, :], k[:, None], eta)  # P(k - l survive)
    p = x @ B
    xi1 = (x * k) @ B
    D = B * (k[:, None] / eta - l[None, :] / (eta * (1 - eta)))
    dp = x @ D
    with np.errstate(divide="ignore", invalid="ignore"):
        i_phi = 4 * (x @ k**2 - np.sum(np.where(p > 0, xi1**2 / p, 0.0), axis=1))
        i_p = np.sum(np.where(p > 0, dp**2 / p, 0.0), axis=1)
        if loss_information == "quantum":
            i_p = (x @ k) / (eta * (1 - eta))
        delta = np.sqrt(1 / i_phi + 1 / i_p)
    delta = np.where((i_phi > 1e-12) & (i_p > 1e-12), delta, np.inf)
    best = int(np.argmin(delta))
    return float(delta[best]), x[best]


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a measured value for one acceptance criterion, then assert it."""

    def record(number, name, passed, detail):
        ACCEPTANCE[number] = (name, bool(passed), detail)
        assert passed, f"criterion {number} ({name}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {number:>2} {name}: {detail}")

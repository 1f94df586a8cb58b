import numpy as np
import pytest

from multiphase_sensing import PhaseModel
from multiphase_sensing.phase_space import GaussianState, symplectic_from_unitary

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one acceptance criterion result: acceptance(label, ok, detail)."""

    def record(label, ok, detail=""):
        _ACCEPTANCE.append((label, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")


def random_smooth_model(rng, M):
    """theta_m(x) = a_m sin(b_m x + c_m) + d_m x with analytic derivative."""
    a, b, c, d = (rng.normal(size=M) for _ in range(4))
    return PhaseModel(lambda x: a * np.sin(b * x + c) + d * x,
                      lambda x: a * b * np.cos(b * x + c) + d)


def haar_like(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, n):
    """Thermal-squeezed state pushed through a random passive map, plus a displacement."""
    nus = 0.5 + rng.exponential(0.5, size=n)
    sq = rng.uniform(-1, 1, size=n)
    V = np.diag(np.concatenate([nus * np.exp(2 * sq), nus * np.exp(-2 * sq)]))
    S = symplectic_from_unitary(haar_like(rng, n)).S
    V = S @ V @ S.T
    return GaussianState(rng.normal(size=2 * n), (V + V.T) / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

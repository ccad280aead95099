import numpy as np
import pytest
from hypothesis import settings

from causalfermion.operators import validate_point

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_unitary(rng, f):
    a = rng.normal(size=(f, f)) + 1j * rng.normal(size=(f, f))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_point(rng, f, n=1, tau=None):
    """Random point of F: n eigenvalues (1 + tau)/2n-ish positive, n negative, rest zero."""
    if tau is None:
        tau = 1.0 + rng.exponential(1.0)
    nu = np.zeros(f)
    if n == 1:
        nu[0], nu[1] = 0.5 * (1 + tau), 0.5 * (1 - tau)
    else:
        pos = rng.uniform(0.5, 2.0, n)
        neg = rng.uniform(0.0, 1.0, n)
        scale = pos.sum() - neg.sum()
        nu[:n], nu[n : 2 * n] = pos / scale, -neg / scale
    u = random_unitary(rng, f)
    return validate_point((u * nu) @ u.conj().T, n)


def random_unit(rng, dim=3):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(label, ok, detail, elapsed=None, limit=None):
    """Store and print one pass/fail line; runtime limits count towards ``ok``."""
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.2f}s"
        if limit is not None:
            timing += f" / limit {limit:g}s"
            ok = ok and elapsed < limit
        timing += "]"
    line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}{timing}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

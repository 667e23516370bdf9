import numpy as np
import pytest

from cavcool import SimParams, SystemState, build_mode_basis


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig1_params():
    return SimParams(n_atoms=1, u0=-0.6, gamma=0.03, delta=-0.6, eta=3.0)


def random_state(rng, n_atoms, n_modes, scale=2.0):
    theta = rng.uniform(0, 2 * np.pi, n_atoms)
    p = rng.normal(0, 10, n_atoms)
    alpha = scale * (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes))
    return SystemState(theta, p, alpha)


BASES = [("single_cosine", None), ("ring_pair", None), ("degenerate_set", 1),
         ("degenerate_set", 2), ("degenerate_set", 5)]


def all_bases():
    out = []
    for fam, m in BASES:
        for norm in ("verbatim", "standing"):
            out.append(build_mode_basis(fam, m, norm))
    return out


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

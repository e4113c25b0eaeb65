import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def record_acceptance():
    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:>2} [{status}] {title}"
        if detail:
            line += f" -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_sym(n, seed, low=0.0):
    rng = np.random.default_rng(seed)
    u = rng.uniform(low, 1.0, (n, n))
    return (u + u.T) / 2.0

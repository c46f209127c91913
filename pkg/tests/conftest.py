import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sicfree import enumerate_multicast_groups, sparse_generate

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def index5():
    return enumerate_multicast_groups(range(1, 6), 1)


@pytest.fixture
def sparse5(index5):
    return sparse_generate(index5, (1, 2, 3, 4, 5))


# the 4x10 sparse matrix for K=5, L=4, t=1 with priority 1..5
# columns a_12, a_13, a_14, a_15, a_23, a_24, a_25, a_34, a_35, a_45
EXAMPLE_MATRIX = np.array(
    [
        [1, 0, 0, 0, 0, 0, 0, 1, 1, 0],
        [0, 1, 0, 0, 0, 0, 1, 0, 0, 1],
        [0, 0, 1, 0, 1, 0, 0, 0, 0, 1],
        [0, 0, 0, 1, 0, 1, 0, 0, 1, 0],
    ],
    dtype=float,
)


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        props = dict(report.user_properties)
        if "criterion" in props:
            _ACCEPTANCE.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, outcome, detail in sorted(_ACCEPTANCE):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {verdict}  {detail}")

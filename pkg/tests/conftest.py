import numpy as np
import pytest

from ppl_lab.geometry import UNIT_SQUARE, PointPattern, QuadratureGrid

_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record a one-line detail for an acceptance criterion."""
    def note(number: int, title: str, detail: str):
        _ACCEPTANCE[request.node.nodeid] = (number, title, detail)
    return note


def pytest_runtest_logreport(report):
    if report.when == "call" and report.nodeid in _ACCEPTANCE:
        number, title, detail = _ACCEPTANCE[report.nodeid]
        _ACCEPTANCE[report.nodeid] = (number, title, detail, report.outcome)
    elif report.when == "setup" and report.skipped and "test_acceptance" in report.nodeid:
        _ACCEPTANCE[report.nodeid] = (None, report.nodeid.split("::")[-1], "", "skipped")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, detail, *outcome in sorted(
            _ACCEPTANCE.values(), key=lambda t: (t[0] is None, t[0] or 0)):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome[0] if outcome else "failed", "FAIL")
        label = f"[{number:2d}]" if number is not None else "[ ?]"
        terminalreporter.write_line(f"{label} {status} {title}: {detail}")


@pytest.fixture(scope="session")
def unit_grid():
    return QuadratureGrid(UNIT_SQUARE, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_pattern(rng, n, window=UNIT_SQUARE):
    u = rng.random((n, 2))
    xy = np.column_stack([window.x_min + u[:, 0] * window.width,
                          window.y_min + u[:, 1] * window.height])
    return PointPattern(xy, window)

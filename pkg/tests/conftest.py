import pytest

from noisemap import builtin_palette

_acceptance_results = []


@pytest.fixture
def palette_thessaloniki():
    return builtin_palette("thessaloniki_neapoli")


@pytest.fixture
def palette_kalamaria():
    return builtin_palette("kalamaria")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        _acceptance_results.append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed in _acceptance_results:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")

import numpy as np
import pytest

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line('markers', 'acceptance(label): exit criterion, reported in the summary')


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker('acceptance')
    if marker is None:
        return
    if report.when == 'call' or (report.when == 'setup' and not report.passed):
        _ACCEPTANCE.append((marker.args[0], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for label, outcome in sorted(_ACCEPTANCE, key=lambda x: int(x[0].split()[0][2:])):
        status = {'passed': 'PASS', 'failed': 'FAIL'}.get(outcome, outcome.upper())
        terminalreporter.write_line(f'{status}  {label}')


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

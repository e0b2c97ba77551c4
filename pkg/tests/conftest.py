import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "imc", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("imc")

_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; call ``check(cond, detail)`` inside the test."""

    class Recorder:
        def __init__(self):
            self.name = request.node.name
            self.details = []

    rec = Recorder()
    yield rec
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    line = f"{'FAIL' if failed else 'PASS'}  {rec.name}  {'; '.join(rec.details)}"
    _ACCEPTANCE.append(line)
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

import pytest

from tpaw import _backend

#: (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES = []

BACKENDS = [pytest.param(_backend.python, id="python")]
if _backend.compiled is not None:
    BACKENDS.append(pytest.param(_backend.compiled, id="compiled"))


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)

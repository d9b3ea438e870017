import pytest

from ectequiv.model import Grid
from ectequiv.solver import FallbackBackend, GridBackend, SmtBackend, solver_available
from ectequiv.syntax import parse, parse_ecterm_text

HAVE_SMT = solver_available()

requires_smt = pytest.mark.skipif(not HAVE_SMT, reason="no SMT-LIB2 solver on PATH")

# filled by the acceptance tests, printed at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture(scope="session")
def smt():
    if not HAVE_SMT:
        pytest.skip("no SMT-LIB2 solver on PATH")
    backend = SmtBackend()
    yield backend
    backend.close()


@pytest.fixture(scope="session")
def confined():
    """Exact grid backend; sound for constraints that pin every variable to [-3, 3]."""
    return GridBackend(Grid(-3, 3), exact=True)


@pytest.fixture(scope="session")
def backend(confined):
    """The SMT solver when installed, with the exact grid as fallback; the grid alone otherwise."""
    if not HAVE_SMT:
        yield confined
        return
    primary = SmtBackend()
    yield FallbackBackend(primary, confined)
    primary.close()


@pytest.fixture
def ect():
    def build(text, sig=None):
        return parse_ecterm_text(text, sig)
    return build


@pytest.fixture
def problem():
    return parse


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

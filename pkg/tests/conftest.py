import json
import warnings
from pathlib import Path

import pytest

from gaussfk.deficit import default_profile
from gaussfk.gauss import GaussianGrid


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def grid128():
    return GaussianGrid(2, 128)


@pytest.fixture(scope="session")
def grid256():
    return GaussianGrid(2, 256)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def golden():
    with open(GOLDEN_DIR / "constants.json", encoding="utf-8") as fh:
        return json.load(fh)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def report(number, ok, text):
        line = "%s criterion %d: %s" % ("PASS" if ok else "FAIL", number, text)
        print(line)
        lines.append((number, line))
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

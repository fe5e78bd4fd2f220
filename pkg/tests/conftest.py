import numpy as np
import pytest

from csam import CliqueMemory, NetworkConfig
from csam.bench import generate_messages

# toy network of 5 clusters x 4 neurons; the "black" message plus a second
# message sharing no neuron with it, chosen so that (0,0,0,0,1) hits both
BLACK = (2, 3, 0, 0, 1)
GRAY = (0, 0, 3, 2, 2)


@pytest.fixture
def toy_config():
    return NetworkConfig(5, 4)


@pytest.fixture
def toy_memory(toy_config):
    mem = CliqueMemory(toy_config)
    mem.store(BLACK)
    mem.store(GRAY)
    return mem


@pytest.fixture
def random_memory():
    def make(C, L, count, seed):
        cfg = NetworkConfig(C, L)
        msgs = generate_messages(cfg, count, seed)
        return CliqueMemory(cfg).store_many(msgs), msgs

    return make


def all_states(n):
    """Every binary vector of length n, as a (2**n, n) bool array."""
    codes = np.arange(2**n)[:, None]
    return ((codes >> np.arange(n)) & 1).astype(bool)


# -- acceptance report ----------------------------------------------------------

def pytest_configure(config):
    config._criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        measured = dict(item.user_properties).get("measured", "")
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            measured = report.longrepr[2]
        item.config._criteria.append((mark.args[0], mark.args[1], status, measured))


def pytest_terminal_summary(terminalreporter, config):
    rows = getattr(config, "_criteria", [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, measured in sorted(rows):
        line = f"[{status}] criterion {number}: {title}"
        if measured:
            line += f" -- {measured}"
        terminalreporter.write_line(line)

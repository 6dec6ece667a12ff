import re
import time
from importlib import resources

import pytest

from bermcorr.engine import MarketData
from bermcorr.market import SwapSpec, par_rate
from bermcorr.trades import load_trades

SAMPLE = resources.files("bermcorr") / "data" / "sample"


def sample_paths():
    return {name: SAMPLE / f"{name}.{ext}" for name, ext in
            (("market", "json"), ("vols", "csv"), ("corr", "json"), ("trades", "json"))}


@pytest.fixture(scope="session")
def sample_market():
    p = sample_paths()
    return MarketData.from_files(p["market"], p["vols"], p["corr"])


@pytest.fixture(scope="session")
def sample_trades():
    return {t.id: t for t in load_trades(sample_paths()["trades"])}


@pytest.fixture(scope="session")
def berm5_cset(sample_market):
    from bermcorr.coterminal import CoterminalSet

    m = sample_market
    k = par_rate(m.curve, SwapSpec(1, 10))
    return CoterminalSet.from_market([1, 2, 3, 4, 5], 10, k, m.curve, m.surface, m.corr)


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def seconds(self):
        return time.perf_counter() - self.start


@pytest.fixture
def stopwatch():
    return Stopwatch()


# one summary line per acceptance criterion

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[key] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), (outcome, secs) in sorted(_CRITERIA.items()):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n} [{name}]: {status} ({secs:.1f} s)")

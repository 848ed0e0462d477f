import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cache_lab.core import SystemConfig, random_library  # noqa: E402
from cache_lab.placement import place_caches  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def golden_3x5():
    cfg = SystemConfig(3, 5, 10)
    lib = random_library(cfg, seed=11)
    return cfg, lib, place_caches(lib, cfg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    rep = out.get_result()
    if rep.when == "call":
        item.rep_call = rep

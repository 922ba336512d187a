import itertools
import os

import numpy as np
import pytest

from compspace import tables
from compspace.bdm import BaseTable
from compspace.ctm import CTMTable, table_for_space
from compspace.machine import Dimension, MachineSpace
from compspace.runner import run_space

DATA = os.path.join(os.path.dirname(__file__), "data")

S22 = MachineSpace(2, 2)
S32 = MachineSpace(3, 2)
S22_2D = MachineSpace(2, 2, Dimension.TWO_D)


@pytest.fixture(scope="session")
def run22():
    return run_space(S22, budget=500)


@pytest.fixture(scope="session")
def table22():
    return table_for_space(S22, 500)


@pytest.fixture(scope="session")
def run32():
    return run_space(S32, budget=200)


@pytest.fixture(scope="session")
def table32():
    return tables.load("1d-3-2")


@pytest.fixture(scope="session")
def table2d():
    return tables.load("2d-4-2-sample")


def _d4_images(block: np.ndarray):
    for k in range(4):
        r = np.rot90(block, k)
        yield r
        yield r.T


def symmetric_4x4_table(seed: int = 0) -> CTMTable:
    """Every 4x4 binary array, counts drawn per rotation/reflection/complement orbit.

    A stand-in for an imported 4x4 CTM table: full coverage, with the
    symmetries an exhaustive turmite table has. Values are synthetic.
    """
    rng = np.random.default_rng(seed)
    counts = {}
    for bits in itertools.product((0, 1), repeat=16):
        b = np.array(bits, dtype=np.uint8).reshape(4, 4)
        key = "4x4:" + "".join(map(str, bits))
        if key in counts:
            continue
        c = int(rng.integers(1, 5000))
        for img in _d4_images(b):
            for arr in (img, 1 - img):
                counts["4x4:" + "".join(str(v) for v in arr.ravel())] = c
    total = sum(counts.values())
    return CTMTable(S22_2D, 1000, counts, total, total)


@pytest.fixture(scope="session")
def table4x4():
    return symmetric_4x4_table()


@pytest.fixture(scope="session")
def base4x4(table4x4):
    return BaseTable.from_ctm(table4x4)


# -- acceptance reporting ------------------------------------------------------------

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA.append((marker.args[0], marker.args[1], rep.outcome, item.name))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    grouped: dict[int, list] = {}
    for number, text, outcome, name in _CRITERIA:
        grouped.setdefault(number, [text, []])[1].append((name, outcome))
    terminalreporter.section("acceptance criteria")
    for number in sorted(grouped):
        text, results = grouped[number]
        status = "PASS" if all(o == "passed" for _, o in results) else "FAIL"
        detail = ", ".join(f"{n}={o}" for n, o in results)
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {text}  [{detail}]")

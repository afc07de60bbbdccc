import numpy as np
import pytest

from solvkernel.dataset import bundled_freesolv_path
from solvkernel.io import load_csv

SMALL = ["C", "O", "N", "CC", "CO", "CN", "C=O", "CCO", "CC=O", "C#N", "CCC", "OCO", "CCN",
         "C=C", "C#C", "CCl", "CBr", "CF", "CS", "CC(C)C", "C1CC1", "C1CCC1", "c1ccoc1",
         "CC(=O)O", "COC", "C=CC=C", "NC=O", "C1CO1", "FC(F)F", "CCCC"]


@pytest.fixture(scope="session")
def freesolv():
    return load_csv(bundled_freesolv_path())


@pytest.fixture(scope="session")
def freesolv_graphs(freesolv):
    return freesolv.graphs()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the outcome is filled in after the test body runs."""
    box = {"name": request.node.name, "detail": ""}
    yield box
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE[box["name"]] = (ok, box["detail"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda n: int(n.split("_")[1])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")

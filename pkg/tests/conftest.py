import warnings

import pytest

from weyllab.potential import BumpProfile, RadialSingularPotential

_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(id, passed, detail)."""

    def record(cid: str, passed: bool, detail: str = ""):
        prev = _RESULTS.get(cid)
        ok = bool(passed) and (prev is None or prev[0])
        detail = detail if prev is None else f"{prev[1]}; {detail}"
        _RESULTS[cid] = (ok, detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS):
        ok, detail = _RESULTS[cid]
        terminalreporter.write_line(f"{cid}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def cache_root(tmp_path_factory):
    return tmp_path_factory.mktemp("eigcache")


@pytest.fixture(scope="session")
def a4_solved(cache_root):
    """n=2, eta=0.7, gamma=1, Lambda_max=40: one dense eigensolve shared by A4/A8."""
    from weyllab.pipeline import solve

    V = RadialSingularPotential(2, 0.7, 1.0, BumpProfile(1.0, "rho"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve(V, 40.0, cache_dir=cache_root)

import pytest

from qdlab.expr import DEFAULT_REGISTRY


@pytest.fixture(scope="session", autouse=True)
def map_cache(tmp_path_factory):
    """Share solved conformal maps between tests through the on-disk cache."""
    DEFAULT_REGISTRY.set_cache(str(tmp_path_factory.mktemp("maps")))
    yield
    DEFAULT_REGISTRY.set_cache(None)


# criterion -> list of (part, passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[name]
        failed = [p for p, ok, _ in parts if not ok]
        verdict = "PASS" if not failed else "FAIL"
        detail = "; ".join(f"{p}: {d}" for p, ok, d in parts)
        terminalreporter.write_line(f"{name}: {verdict}" + (f" (failed: {', '.join(failed)})" if failed else "")
                                    + f" | {detail}")

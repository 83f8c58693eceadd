import pytest

from chainchaos.scramble import observe_profiles

ACCEPTANCE: dict = {}
SESSION: dict = {"profiles": []}


@pytest.fixture(scope="session", autouse=True)
def _watch_profiles():
    # every ScrambleProfile built during the run lands in SESSION["profiles"]
    with observe_profiles() as seen:
        SESSION["profiles"] = seen
        yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_collection_modifyitems(items):
    # acceptance criteria run last so criterion 9 sees every profile of the run
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")

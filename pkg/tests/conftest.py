import pytest

# criterion id -> (description, outcome), filled as acceptance tests report
_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = dict(report.user_properties).get("criterion")
    if marker is None:
        return
    cid, text = marker
    outcome = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
    # parametrized criteria report several times; any failure sticks
    if _ACCEPTANCE.get(cid, ("", ""))[1] != "FAIL":
        _ACCEPTANCE[cid] = (text, outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c[2:])):
        text, outcome = _ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid} {outcome}: {text}")


@pytest.fixture
def criterion(record_property):
    """Tag an acceptance test so the summary prints one line for it."""
    def tag(cid: str, text: str):
        record_property("criterion", (cid, text))
    return tag

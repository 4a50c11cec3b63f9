import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion number and title")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the current criterion."""
    marker = request.node.get_closest_marker("criterion")
    entry = _RESULTS.setdefault(marker.args[0], {"title": marker.args[1], "detail": ""})

    def put(text: str):
        entry["detail"] = text

    return put


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    entry = _RESULTS.setdefault(marker.args[0], {"title": marker.args[1], "detail": ""})
    if rep.when == "call" or rep.failed:
        entry["passed"] = rep.passed and entry.get("passed", True)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        e = _RESULTS[k]
        if "passed" not in e:
            continue
        status = "PASS" if e["passed"] else "FAIL"
        line = f"[{status}] {k:2d}. {e['title']}"
        if e["detail"]:
            line += f" -- {e['detail']}"
        terminalreporter.write_line(line)

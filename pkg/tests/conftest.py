_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        outcome = "PASS" if report.passed else "FAIL"
        if report.skipped:
            outcome = "SKIP"
        _acceptance_results.append((name, outcome))
    elif report.when == "setup" and report.skipped:
        _acceptance_results.append((name, "SKIP"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"ACCEPTANCE {outcome}: {name}")

import pytest

# criterion id -> short title, printed one line each at the end of the run
ACCEPTANCE_TITLES = {
    "P1": "budget identity at default settings",
    "P2": "entropy matches independent oracle",
    "P3": "mutation probability vector",
    "P4": "selection and mutation statistics",
    "P5": "guided search beats random baseline",
    "P6": "near-optimum recovery at quarter budget",
    "P7": "byte-identical output across thread counts",
    "P8": "survives a misbehaving external evaluator",
}

_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for cid in ACCEPTANCE_TITLES:
        if f"test_{cid.lower()}_" in report.nodeid:
            _results[cid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for cid, title in ACCEPTANCE_TITLES.items():
        outcome = _results.get(cid)
        if outcome is None:
            continue
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{cid}] {verdict} - {title}")

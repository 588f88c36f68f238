from __future__ import annotations

from pathlib import Path

import pytest

SAMPLE_CSV = (
    "id,text,anger,disgust,fear,joy,sadness,surprise\n"
    '1,"Kotu Ta Yi Hukunci Kan Shari\'ar Zaben Dan Majalisar PDP, Ta Yi Hukuncin Bazata",0,0,0,0,0,1\n'
    '2,"Toh fah inji \'yan magana suka ce ""ana wata ga wata""",0,0,0,0,0,1\n'
    "3,Bincike ya nuna yan Najeriya sun fi damuwa da rashin tsaro da talauci fiye da korona,0,0,1,0,1,0\n"
)

_ACCEPTANCE: list[tuple[str, str]] = []


@pytest.fixture
def sample_path(tmp_path: Path) -> Path:
    path = tmp_path / "sample.csv"
    path.write_text(SAMPLE_CSV, encoding="utf-8")
    return path


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _ACCEPTANCE.append((status, marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}")

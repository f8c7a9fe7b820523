from pathlib import Path

import pytest

from heightlab.elliptic import load_curve_config

CURVES = Path(__file__).resolve().parent.parent / "curves"

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    _ACCEPTANCE[name] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("-")[1])):
        ok, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'} {detail}".rstrip())


@pytest.fixture(scope="session")
def x3m2():
    return load_curve_config(CURVES / "x3m2.cfg")


@pytest.fixture(scope="session")
def x3p1():
    return load_curve_config(CURVES / "x3p1.cfg")

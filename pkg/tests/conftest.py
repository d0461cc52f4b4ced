import random

from hypothesis import settings, strategies as st
import pytest

from webpi.gen import random_process
from webpi.syntax import parse

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")


def terms(size=12):
    return st.randoms(use_true_random=False).map(lambda r: random_process(r, size))


@pytest.fixture
def P():
    return parse


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")

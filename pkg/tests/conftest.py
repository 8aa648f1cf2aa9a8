import sys

import pytest

from jetvar.symexpr import build_spec, parse


@pytest.fixture
def mech():
    """One base coordinate t, one field q."""
    return build_spec(["t"], ["q"])


@pytest.fixture
def plane():
    """Base (t, x), field u."""
    return build_spec(["t", "x"], ["u"])


@pytest.fixture
def kepler_cart():
    return build_spec(
        ["t"],
        ["q1", "q2"],
        {"r_inv": {"derivatives": {"q1": "-q1*r_inv^3", "q2": "-q2*r_inv^3"}}},
    )


@pytest.fixture
def P():
    def make(spec):
        return lambda src: parse(src, spec)

    return make


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

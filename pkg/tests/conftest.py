import json
import pathlib

import numpy as np
import pytest

DATA = pathlib.Path(__file__).with_name("data") / "oracle_values.json"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running (scattering assembly)")


@pytest.fixture(scope="session")
def frozen():
    """High-precision reference values written by data/freeze_values.py."""
    raw = json.loads(DATA.read_text())

    def conv(v):
        if isinstance(v, list) and len(v) == 2 and all(isinstance(t, float) for t in v):
            return complex(*v)
        if isinstance(v, list):
            return np.array([conv(t) for t in v])
        return v

    return {k: conv(v) for k, v in raw.items()}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

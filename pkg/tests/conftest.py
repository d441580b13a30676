import pytest

from relay_iabc.config import SimConfig

ACCEPTANCE_LINES: list[str] = []


def make_config(**overrides) -> SimConfig:
    base = {
        "m": 7, "b": 2,
        "graph": {"kind": "complete", "seed": 0},
        "iterations": 20,
        "init_range": [-110.0, 110.0],
        "default_value": 0.0,
        "adversary": {"*": {"kind": "RandomRange"}},
        "algorithm": "both",
        "seed": 0,
        "epsilon": 1e-6,
    }
    base.update(overrides)
    return SimConfig.from_dict(base)


@pytest.fixture
def cfg_factory():
    return make_config


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

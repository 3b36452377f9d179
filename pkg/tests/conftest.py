import numpy as np
import pytest
from hypothesis import settings

# first calls into numba kernels include JIT compilation
settings.register_profile("numeric", deadline=None)
settings.load_profile("numeric")

from chpeakon import _kernels

KERNEL_NAMES = ("peakon_rhs", "peakon_field", "peakon_slope", "h1_squared")
BACKENDS = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    for name in KERNEL_NAMES:
        monkeypatch.setattr(_kernels, name, getattr(_kernels, f"{name}_{request.param}"))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; the lines are repeated in the terminal summary."""
    def add(criterion: int, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

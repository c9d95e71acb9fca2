import sys
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", module="numba")

from avseld._jit import use_jit

BACKENDS = ["numpy", "numba"] if use_jit() else ["numpy"]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)

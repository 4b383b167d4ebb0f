import numpy as np
import pytest

from ytest import _kernels

ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


BACKENDS = [pytest.param((_kernels.ols_batch_numpy, _kernels.t_two_sided_numpy), id="numpy")]
if _kernels.ols_batch_numba is not None:
    BACKENDS.append(pytest.param((_kernels.ols_batch_numba, _kernels.t_two_sided_numba),
                                 id="numba"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

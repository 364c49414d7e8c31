import numpy as np
import pytest

from skreflect.model import ModelParams


@pytest.fixture
def fig_params():
    """Reference parameter set: rho_ab=0.9, alpha=0.05, rho_e=0.1, sigma2_e=1."""
    return ModelParams(sigma2=10.0, sigma2_e=1.0, rho_ab=0.9, rho_e=0.1, alpha=0.05)


def sample_cov_se(x: np.ndarray, i: int, j: int) -> tuple[float, float]:
    """Sample covariance of columns i, j and its standard error."""
    xi = x[:, i] - x[:, i].mean()
    xj = x[:, j] - x[:, j].mean()
    prod = xi * xj
    return prod.mean(), prod.std(ddof=1) / np.sqrt(len(prod))


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])

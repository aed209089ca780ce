import numpy as np
import pytest

_CRITERIA: dict[str, tuple[str, str]] = {}


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _CRITERIA[name] = (report.outcome, report.head_line or name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        outcome, _ = _CRITERIA[name]
        number = int(name.split("_")[2])
        label = " ".join(name.split("_")[3:])
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} [{status}] {label}")


def random_points(rng, n, count, spread=(0.3, 1.6)):
    """Quotient points pi_n(c G) with mu(c G) uniform in ``spread``, so both sides of the boundary occur."""
    from muquotient.mu import mu_eval_batch
    from muquotient.quotient import pi_n_batch

    G = cgauss(rng, count, n, n)
    mu = mu_eval_batch(G, tol=1e-6)["value"]
    c = rng.uniform(*spread, count) / mu
    return pi_n_batch(G * c[:, None, None])

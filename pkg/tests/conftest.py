import numpy as np
import pytest

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when in ("setup", "call"):
        name = report.nodeid.split("::")[-1]
        if report.when == "call" or report.outcome != "passed":
            _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _ACCEPTANCE.items():
        tag = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{tag}  {name}")


def oracle_true_params(soft_iron, hard_iron):
    """Reference shape/offset: positive-diagonal QR of inv(S), done by hand.

    Kept independent of the library's qr_decompose so recovery tests have
    an external yardstick.
    """
    q, r = np.linalg.qr(np.linalg.inv(np.asarray(soft_iron, float)))
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return signs[:, None] * r, np.asarray(hard_iron, float)


@pytest.fixture(scope="session")
def default_scene():
    """Default scenario objects shared across test modules."""
    from magcal.simulate import default_truth, sweep_trajectory

    truth = default_truth()
    r_true, h_true = oracle_true_params(truth.soft_iron, truth.hard_iron)
    return {
        "truth": truth,
        "trajectory": sweep_trajectory(300),
        "r_true": r_true,
        "h_true": h_true,
    }

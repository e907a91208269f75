"""Shared fixtures: bundled cases, profiles, and small probe networks."""

import importlib.resources

import pytest

from gridloss import harness, lvrt
from gridloss.netmodel import parse_case


def data_text(name: str) -> str:
    return (importlib.resources.files("gridloss.data") / name).read_text()


def chain_case(n, loads_q, devices, loads_p=None, r=0.02, x=0.02,
               base_mva=1.0):
    """Case text for a single feeder 1-2-...-n with PV plants.

    ``loads_q``/``loads_p`` map bus id to per-unit load, ``devices`` is a
    list of (bus, s_rated, p_out) PV entries.
    """
    loads_p = loads_p or {}
    lines = ["CASE probe", f"BASE_MVA {base_mva}", "BASE_KV 1.0", "SLACK 1",
             "BUS_UNITS pu", "BRANCH_UNITS pu", "DEVICE_UNITS pu", "BUS"]
    for b in range(1, n + 1):
        lines.append(f"{b} {loads_p.get(b, 0.0)} {loads_q.get(b, 0.0)}")
    lines += ["END", "BRANCH"]
    for b in range(1, n):
        lines.append(f"{b} {b + 1} {r} {x}")
    lines += ["END", "DEVICE"]
    for bus, s_rated, p_out in devices:
        lines.append(f"{bus} PV {s_rated} {s_rated} {p_out}")
    lines += ["END"]
    return "\n".join(lines) + "\n"


def profile_slice(n_rows: int, start: int = 0) -> str:
    """The first column rows of the bundled day profile, as CSV text."""
    lines = data_text("day_profile.csv").splitlines()
    return "\n".join([lines[0]] + lines[1 + start:1 + start + n_rows]) + "\n"


@pytest.fixture(scope="session")
def case33_text():
    return data_text("ieee33.case")


@pytest.fixture(scope="session")
def case33_der_text():
    return data_text("ieee33_der.case")


@pytest.fixture(scope="session")
def case5_text():
    return data_text("five_bus.case")


@pytest.fixture(scope="session")
def net33(case33_text):
    return parse_case(case33_text)


@pytest.fixture(scope="session")
def net33_der(case33_der_text):
    return parse_case(case33_der_text)


@pytest.fixture(scope="session")
def net5(case5_text):
    return parse_case(case5_text)


@pytest.fixture(scope="session")
def day_profile_text():
    return data_text("day_profile.csv")


@pytest.fixture(scope="session")
def day_profile(day_profile_text):
    return harness.ingest_timeseries(day_profile_text)


@pytest.fixture(scope="session")
def deep_sag_text():
    return data_text("fault_deep_sag.scen")


@pytest.fixture(scope="session")
def deep_sag(deep_sag_text):
    return lvrt.parse_scenario(deep_sag_text)


# ---------------------------------------------------------------------------
# The acceptance gate prints one verdict line per criterion at the end of
# the run; the labels come from the `acceptance` marker on each test.

def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): criterion checked by the acceptance gate")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(outcome, ()):
            label = getattr(report, "acceptance_label", None)
            if label is not None:
                lines.append((label, outcome.upper()))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for label, verdict in sorted(lines):
        terminalreporter.write_line(f"[{verdict}] {label}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    result = yield
    report = result.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    # skips surface on setup, pass/fail on call
    if (report.when == "call") or (report.when == "setup" and report.skipped):
        report.acceptance_label = marker.args[0]

"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import re
from collections import OrderedDict

CRITERIA = OrderedDict([
    ("1", "theory vs simulation within 1 dB per node (f_D = 66 Hz, T_s = 1 us)"),
    ("2", "alpha = 1 reduces to the stationary theory; simulation within 1 dB"),
    ("3", "sinusoidal floor above stationary; MSD non-decreasing over Doppler sweep"),
    ("4", "T_s = 1 ms flagged or at least 10 dB above T_s = 1 us"),
    ("5", "oracle equivalences: J0, closed form vs Neumann, scalar, optimal weight"),
    ("6", "eta covariance within 2%; MSE - EMSE within 10% of noise variance"),
    ("7", "byte-identical CSV output across serial and parallel runs"),
])

_PATTERN = re.compile(r"test_acceptance\.py::test_c(\d+)_")
_outcomes = {}


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    key = m.group(1)
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if report.when == "call" or failed:
        _outcomes.setdefault(key, []).append(not failed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, text in CRITERIA.items():
        results = _outcomes.get(key)
        status = "NOT RUN" if not results else ("PASS" if all(results) else "FAIL")
        terminalreporter.write_line(f"criterion {key}: {status:7s} {text}")

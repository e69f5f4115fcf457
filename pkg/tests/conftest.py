"""Shared metric fixtures for the test suite."""

from __future__ import annotations

import sys

import pytest

from generators import GENERIC_FIELDS
from threaded5d.metric import build_metric


@pytest.fixture
def mink():
    return build_metric({"family": "minkowski5"})


@pytest.fixture
def rw_bilinear():
    return build_metric({"family": "rw5", "fields": {"f": "x0*x4"}})


@pytest.fixture
def rw_critical():
    return build_metric({"family": "rw5", "fields": {"f": "1 + (x0-2)^2 + (x4-5)^2"}})


@pytest.fixture
def generic():
    return build_metric({"family": "custom", "fields": GENERIC_FIELDS})


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

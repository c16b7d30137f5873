import numpy as np
import pytest
from hypothesis import settings

from nfrange import (ArrayConfig, Scenario, TargetKind, TargetModel,
                     make_cardinal_sine)

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

FC = 24e9
B = 100e6
D = 1.5


@pytest.fixture
def sinc_waveform():
    return make_cardinal_sine(B)


def scenario(R=10.0, config="et-mimo", n=25, aperture=D, fc=FC, bandwidth=B,
             snr_db=None, gamma_n=1.0, xi=1.0):
    target, tag = config.split("-")
    array = ArrayConfig.simo(n, aperture) if tag == "simo" else ArrayConfig.mimo(n, n, aperture)
    w = make_cardinal_sine(bandwidth)
    model = TargetModel(TargetKind(target))
    if snr_db is not None:
        return Scenario.from_snr(fc, R, w, array, model, snr_db, xi)
    return Scenario(fc, R, w, array, model, xi, gamma_n)


@pytest.fixture
def make_scenario():
    return scenario


CONFIGS = ["pt-simo", "pt-mimo", "et-simo", "et-mimo"]


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    holder = {}

    def record(number, text):
        holder["label"] = f"criterion {number:>2}: {text}"

    yield record
    if "label" in holder:
        rep = getattr(request.node, "rep_call", None)
        status = "PASS" if rep is not None and rep.passed else "FAIL"
        line = f"{status}  {holder['label']}"
        ACCEPTANCE_LINES.append(line)
        print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

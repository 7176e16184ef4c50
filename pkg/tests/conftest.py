import copy

import pytest

from goiot import kpi
from goiot.scenario import load_scenario, scenario_from_dict


@pytest.fixture(scope="session")
def repro():
    return load_scenario("paper-repro")


@pytest.fixture
def repro_raw(repro):
    return copy.deepcopy(repro.raw)


@pytest.fixture
def model_640x():
    return kpi.ModelConfig("640X", 195.9, 1.2288e6, kpi.DetectorProfile.logistic(0.9, -0.52, 0.1))


@pytest.fixture
def radio():
    return kpi.RadioConfig(alpha=50e6, p_t=0.2, p_ap_recv=218.7, p_ap_proc=218.7,
                           p_pa=390.0, eta=0.27, ap_capacity=1e9)


MINIMAL = {
    "schema_version": 1,
    "name": "minimal",
    "topology": {
        "nodes": [{"id": "ap", "kind": "access-point"},
                  {"id": "dc", "kind": "cloud", "hardware": "cpu"}],
        "edges": [{"a": "ap", "b": "dc", "length": "1 km", "rate": "100 Gbps"}],
    },
    "hardware": [{"id": "cpu", "frequency": "2 GHz", "gflops": 100}],
    "models": [{"id": "m", "gflop": 1.0, "payload": "100 kB",
                "detector": {"thresholds": [0.0, 1.0], "tpr": [1.0, 0.5], "fpr": [0.5, 0.0]}}],
    "radio": {"alpha": "50 Mbps", "p_t": "0.2 W", "p_ap_recv": "100 W", "p_ap_proc": "100 W",
              "p_pa": "100 W", "eta": 0.2, "ap_capacity": "1 Gbps"},
    "upf": {"l_upf": "1 ms", "upf_rate": "1 Tbps"},
    "strategies": [{"id": "t", "kind": "TIoT", "cloud_stage": {"model": "m"}, "cloud": "dc"}],
    "simulation": {"frames": 100, "event_frequency": 0.2, "runs": 3, "master_seed": 1},
}


@pytest.fixture
def minimal_raw():
    return copy.deepcopy(MINIMAL)


@pytest.fixture
def minimal(minimal_raw):
    return scenario_from_dict(minimal_raw)


_REPORT = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_REPORT]

    def check(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

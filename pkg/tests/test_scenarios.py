import pytest

from echcap.config import TestingConfig
from echcap.tasks.scenarios import ALIASES, SCENARIOS, UnknownScenarioError, run_scenario

FAST = ["weights", "capacities", "decomposition-identity", "inclusion", "packing"]
SLOW = ["theorem-1.1", "prop-1.4", "explicit-map", "area",
        "billiard-convergence", "billiard-oracle"]


class AcceptanceConfig(TestingConfig):
    OMEGA0_SAMPLES = 8192


def test_registry_names():
    assert sorted(SCENARIOS) == sorted(FAST + SLOW)


@pytest.mark.parametrize("name", FAST)
def test_fast_scenarios_pass(name):
    report = run_scenario(name, AcceptanceConfig)
    assert report.passed, report.to_dict()
    assert report.to_dict()["scenario"] == name


@pytest.mark.slow
@pytest.mark.parametrize("name", SLOW)
def test_slow_scenarios_pass(name):
    report = run_scenario(name, AcceptanceConfig)
    assert report.passed, report.to_dict()


def test_aliases_resolve_to_registered_names():
    assert ALIASES == {"bidisk-verdicts": "theorem-1.1", "ellipsoid-dominance": "prop-1.4"}
    assert set(ALIASES.values()) <= set(SCENARIOS)
    assert not set(ALIASES) & set(SCENARIOS)


@pytest.mark.slow
def test_alias_runs_registered_scenario():
    report = run_scenario("ellipsoid-dominance", AcceptanceConfig)
    assert report.scenario == "prop-1.4"
    assert report.passed, report.to_dict()


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError):
        run_scenario("unknown-name", AcceptanceConfig)


def test_failed_check_fails_report():
    report = run_scenario("weights", AcceptanceConfig)
    report.add("forced", 1.0, 2.0, 1e-9)
    assert not report.passed
    assert report.to_dict()["checks"][-1]["pass"] is False

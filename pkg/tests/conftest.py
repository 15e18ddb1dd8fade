import pytest

from src.demand import MarketParams
from src.simulate import SimulationConfig


@pytest.fixture
def basic() -> MarketParams:
    """n=500 customers buying with probability 0.5, p=1, c=0.85, alpha=0.97."""
    return MarketParams(n=500, pi=0.5, c=0.85)


@pytest.fixture
def small_config() -> SimulationConfig:
    return SimulationConfig(runs=400, periods=48, master_seed=12345)


@pytest.fixture
def basic_scenario_file(tmp_path):
    path = tmp_path / "basic.scenario"
    path.write_text(
        "# basic example\n"
        "n = 500\n"
        "pi = 0.5\n"
        "c = 0.85   # supply cost\n"
        "lambda = 0.5\n",
        encoding="utf-8",
    )
    return str(path)

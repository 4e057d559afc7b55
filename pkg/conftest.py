"""
Pytest configuration and fixtures for the pickling line project.

This file contains shared fixtures used across all test modules.
"""

import numpy as np
import pytest

# ============================================================================
# Configuration Fixtures
# ============================================================================


@pytest.fixture
def run_config(settings):
    """Desk-profile run configuration with the default master seed."""
    from core.config import load_run_config

    return load_run_config(profile="desk", seed=7)


@pytest.fixture
def line_config():
    """Line geometry and limits with the project defaults."""
    from line.state import LineConfig

    return LineConfig()


@pytest.fixture
def quiet_disturbance():
    """Stops of fixed length with perfect forecasts."""
    from line.disturbance import DisturbanceConfig

    return DisturbanceConfig(
        weld_mean=120.0,
        weld_sd=0.0,
        weld_min=120.0,
        cut_mean=30.0,
        cut_sd=0.0,
        cut_min=30.0,
        prediction_sd=0.0,
    )


@pytest.fixture
def disturbance():
    """Default stochastic disturbance model."""
    from line.disturbance import DisturbanceConfig

    return DisturbanceConfig()


@pytest.fixture
def speed_table():
    """The bundled synthetic speed table."""
    from strips.speed_table import default_speed_table

    return default_speed_table()


@pytest.fixture
def flat_speed_table():
    """One row covering every strip with (30, 200) m/min."""
    from strips.speed_table import SpeedRow, SpeedTable

    return SpeedTable([SpeedRow(0, 10000, 0, 100000, frozenset(), 30, 200)])


# ============================================================================
# Strip Fixtures
# ============================================================================


@pytest.fixture
def make_strip():
    """Factory for strips with sensible defaults."""
    from strips.domain import Strip

    def _make(grade="08PS", width=1250, thickness=250, weight=15000, length=600.0, **extra):
        return Strip(
            grade=grade,
            original_width=width,
            resulting_width=extra.pop("resulting_width", width - 10),
            thickness=thickness,
            weight=weight,
            coiling_temperature=extra.pop("coiling_temperature", 620.0),
            strips_in_resulting_coil=extra.pop("strips_in_resulting_coil", 1.0),
            length=length,
        )

    return _make


@pytest.fixture
def history():
    """Synthetic 500-strip, 5-grade history."""
    from strips.history import generate_history

    return generate_history(np.random.default_rng(11), strips=500, grades=5, length_max=1500.0)


@pytest.fixture
def short_queue(make_strip):
    """Three equal strips for small line episodes."""
    return [make_strip(length=400.0) for _ in range(3)]


@pytest.fixture
def scenario(short_queue):
    """A deterministic three-strip scenario with a balanced start."""
    from line.scenario import InitialConditions, Scenario

    return Scenario(
        scenario_id="toy-0000",
        queue=tuple(short_queue),
        initial=InitialConditions(
            looper1=250.0,
            looper2=60.0,
            stu_speed=80.0,
            ftu_speed=80.0,
            ttu_speed=80.0,
            ftu_residual=300.0,
        ),
        disturbance_seed=12345,
    )


@pytest.fixture
def episode_setup(line_config, quiet_disturbance, flat_speed_table):
    """Episode wiring with noiseless stops and a flat speed table."""
    from agents.conservative import CAgentConfig
    from agents.variants import state_ranges
    from harness.episodes import EpisodeSetup

    return EpisodeSetup(
        line=line_config,
        disturbance=quiet_disturbance,
        speed_table=flat_speed_table,
        c_agent=CAgentConfig(),
        ranges=state_ranges(line_config, quiet_disturbance, 1500.0),
        gamma=0.95,
        reward_values={},
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)

"""Shared fixtures: seeded randomness and a small reference run."""

from __future__ import annotations

import numpy as np
import pytest

from euler_align import (
    InitialDataSpec,
    ShapeSpec,
    SolverConfig,
    Trajectory,
    run,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def small_proportional_run() -> Trajectory:
    """Short proportional-data run shared by solver/diagnostics/CLI tests."""
    cfg = SolverConfig(
        alpha=0.5,
        n=512,
        half_width=8.0,
        t_end=0.5,
        initial=InitialDataSpec(ShapeSpec("gaussian", width=0.5)),
        output_times=(0.0, 0.25, 0.5),
    )
    return run(cfg)


@pytest.fixture(scope="session")
def decade_proportional_run() -> Trajectory:
    """Run to t = 10 with enough outputs for decay and slope-series checks."""
    cfg = SolverConfig(
        alpha=0.5,
        n=1024,
        half_width=24.0,
        t_end=10.0,
        initial=InitialDataSpec(ShapeSpec("gaussian", width=1.0)),
        output_times=(0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.5, 8.0, 10.0),
    )
    return run(cfg)

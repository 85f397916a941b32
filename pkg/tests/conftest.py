import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quadtrot.gait import GaitParams


@pytest.fixture(scope="session")
def params_running() -> GaitParams:
    """Fast-run tuning set (speed-ramp experiment)."""
    return GaitParams(f=2.9, vx=1.0, zs=-0.14, hwa=0.04, hsd=0.005,
                      c1=4.0, c2=-0.1, c3=-3.0, c4=-4.5, c5=0.2)


@pytest.fixture(scope="session")
def params_speed() -> GaitParams:
    """Slow-retract tuning set (constant 0.8 m/s experiment)."""
    return GaitParams(f=2.8, vx=0.8, zs=-0.154, hwa=0.02, hsd=0.01,
                      c1=2.0, c2=-0.1, c3=-2.0, c4=-0.1, c5=0.6)

from importlib import import_module

from .grid import GoalField, NavGrid, nav_grid
from .kinematics import KinematicsConfig, step
from .world import World, raycast, scan

# episode depends on control, which depends on this package; load it on first use
_EPISODE = ("Agents", "EpisodeConfig", "TrajectoryLog", "candidate_costs", "run_episode")


def __getattr__(name):
    if name in _EPISODE:
        return getattr(import_module(".episode", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [*_EPISODE, "GoalField", "KinematicsConfig", "NavGrid", "World", "nav_grid", "raycast", "scan", "step"]

from .base import ControllerOutcome, detect_deadlock
from .planned import plan_path, planned_controller
from .tryout import TryoutConfig, tryout_controller

__all__ = [
    "ControllerOutcome",
    "TryoutConfig",
    "detect_deadlock",
    "plan_path",
    "planned_controller",
    "tryout_controller",
]

from .engine import Env, check_task_success, initial_state, noop_record, reset, room_overview, step
from .generate import generate_world, sample_goal
from .parse import parse_action
from .reach import Reachable, descriptor, enumerate_reachable
from .solver import check_solvable, plan_solution
from .types import (
    NOTHING_HAPPENS, Action, EnvState, LocationSpec, ObjectSpec, StepRecord, TaskGoal,
    Trajectory, WorldSpec,
)

__all__ = [
    "Action", "Env", "EnvState", "LocationSpec", "NOTHING_HAPPENS", "ObjectSpec", "Reachable",
    "StepRecord", "TaskGoal", "Trajectory", "WorldSpec", "check_solvable", "check_task_success",
    "descriptor", "enumerate_reachable", "generate_world", "initial_state", "noop_record",
    "parse_action", "plan_solution", "reset", "room_overview", "sample_goal", "step",
]

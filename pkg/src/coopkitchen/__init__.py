"""Cooperative kitchen simulator with intention-inferring planner agents."""

from .world import (
    Action,
    GridMap,
    Item,
    Kitchen,
    MapError,
    MapParseError,
    MapValidationError,
    Order,
    OrderSchedule,
    Recipe,
    ScoreEvent,
    Station,
    StationKind,
    Subtask,
    SubtaskKind,
    TaskGraph,
    WorldState,
    chopped,
    load_map,
    raw,
    soup,
)
from .pathing import (
    PathQuery,
    PathResult,
    UnreachableSubtaskError,
    optimal_first_actions,
    shortest_path,
    subtask_cost,
)
from .agents import (
    AgentMind,
    AgentParams,
    InternalRewardTable,
    choose_subtask,
    coordination_filter,
    ntom_step,
    subtask_utilities,
    tom_step,
)
from .belief import (
    ActionLikelihood,
    GoalPosterior,
    action_likelihood,
    posterior_mode,
    update_posterior,
)
from .harness import (
    ComparisonReport,
    ConditionSummary,
    EpisodeConfig,
    EpisodeLog,
    compare_conditions,
    replay_episode,
    run_condition,
    run_episode,
    run_sweep,
)
from .assets import MAP_NAMES, load_bundled_map

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

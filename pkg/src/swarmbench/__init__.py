"""Deterministic 2D swarm-coordination simulator and factorial benchmark harness."""

from .comm import (MetricComm, NeighborGraph, SpecialAgent, Specials,
                   TopologicalComm, VisualComm, build_graph, metric_neighbors,
                   topological_neighbors, visual_neighbors)
from .dynamics import (AgentState, Diagnostics, ForceBreakdown, MotionConfig,
                       RadiiConfig, SwarmState, step, swarm_force, swarm_forces,
                       total_force, total_forces, wrap_angle)
from .harness import (DesignSpec, TrialConfig, TrialResult, enumerate_design,
                      mix_seed, run_sweep, run_trial)
from .metrics import (MetricsRecord, TrialHistory, clustering_coefficient,
                      connected_components, trial_metrics)
from .stats import (AnovaResult, SampleGroup, anova_oneway,
                    anova_twoway_balanced, describe, fisher_lsd)
from .tasks import (AvoidTask, DisperseTask, FollowTask, GoalTask, PathSpec,
                    PlacementError, RallyTask, TargetsTask, TaskState, WalkSpec,
                    advance_specials, init_trial, task_force, task_forces,
                    update_task_state)
from .world import (Circle, Vec2, WorldConfig, clamp_to_world, env_force,
                    segment_clear, vec2)

__version__ = "0.1.0"

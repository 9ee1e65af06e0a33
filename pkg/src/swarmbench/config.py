"""Plain-text configuration files: ``key = value`` under four section headers.

[world]   width, height, wall_margin, steer_offset, speed, max_turn,
          body_radius, env_weight, swarm_weight
[model]   kind, d_met, n_top, d_vis, phi
[task]    kind, n_targets, n_obstacles, informed_fraction, groups, strength,
          goal_weight
[sweep]   task, models, n_top_levels, n_agents_levels, r_r_levels, r_o_mults,
          r_a_mults, n_obstacles_levels, n_targets_levels, informed_levels,
          group_levels, strength_levels, replicates, scale, iterations,
          base_seed, goal_weight

Unknown keys raise; absent keys fall back to the paper-faithful defaults.
"""

from __future__ import annotations

import configparser
import math
from typing import Optional

from .comm import CommModel, MetricComm, TopologicalComm, VisualComm
from .dynamics import MotionConfig, RadiiConfig
from .harness import DesignSpec
from .tasks import (AvoidTask, DisperseTask, FollowTask, GoalTask, RallyTask,
                    TargetsTask, TaskSpec)
from .world import WorldConfig

_KNOWN_KEYS = {
    "world": {"width", "height", "wall_margin", "steer_offset", "speed",
              "max_turn", "body_radius", "env_weight", "swarm_weight",
              "capped_attraction", "unit_zone_terms", "repulsion_priority"},
    "model": {"kind", "d_met", "n_top", "d_vis", "phi"},
    "task": {"kind", "n_targets", "n_obstacles", "informed_fraction", "groups",
             "strength", "goal_weight"},
    "sweep": {"task", "models", "n_top_levels", "n_agents_levels", "r_r_levels",
              "r_o_mults", "r_a_mults", "n_obstacles_levels", "n_targets_levels",
              "informed_levels", "group_levels", "strength_levels", "replicates",
              "scale", "iterations", "base_seed", "goal_weight"},
}


def load_config(path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    out: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ValueError(f"unknown config section [{section}]")
        body = dict(parser.items(section))
        unknown = set(body) - _KNOWN_KEYS[section]
        if unknown:
            raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")
        out[section] = body
    return out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def world_from_config(cfg: dict) -> WorldConfig:
    sec = cfg.get("world", {})
    return WorldConfig(
        width=float(sec.get("width", 1000.0)),
        height=float(sec.get("height", 1000.0)),
        wall_margin=float(sec.get("wall_margin", 20.0)),
        steer_offset=float(sec.get("steer_offset", 0.0)),
    )


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def motion_from_config(cfg: dict) -> MotionConfig:
    sec = cfg.get("world", {})
    defaults = MotionConfig()
    return MotionConfig(
        speed=float(sec.get("speed", 2.0)),
        max_turn=float(sec.get("max_turn", 0.3)),
        body_radius=float(sec.get("body_radius", 5.0)),
        env_weight=float(sec.get("env_weight", 1.0)),
        swarm_weight=float(sec.get("swarm_weight", 1.0)),
        capped_attraction=(_bool(sec["capped_attraction"])
                           if "capped_attraction" in sec
                           else defaults.capped_attraction),
        unit_zone_terms=(_bool(sec["unit_zone_terms"])
                         if "unit_zone_terms" in sec
                         else defaults.unit_zone_terms),
        repulsion_priority=(_bool(sec["repulsion_priority"])
                            if "repulsion_priority" in sec
                            else defaults.repulsion_priority),
    )


def model_from_config(cfg: dict, kind: Optional[str], radii: RadiiConfig,
                      world: WorldConfig, n_top: Optional[int] = None) -> CommModel:
    """Build a communication model; d_met defaults to the attraction radius,
    d_vis to half the world diagonal, phi to 2*pi/3."""
    sec = cfg.get("model", {})
    kind = kind or sec.get("kind", "metric")
    if kind == "metric":
        return MetricComm(float(sec.get("d_met", radii.attraction)))
    if kind == "topological":
        k = n_top if n_top is not None else int(sec.get("n_top", 7))
        return TopologicalComm(k)
    if kind == "visual":
        return VisualComm(float(sec.get("d_vis", world.diagonal / 2.0)),
                          float(sec.get("phi", 2.0 * math.pi / 3.0)))
    raise ValueError(f"unknown model kind {kind!r}")


def task_from_config(cfg: dict, kind: Optional[str] = None) -> TaskSpec:
    sec = cfg.get("task", {})
    kind = kind or sec.get("kind", "targets")
    weight = float(sec.get("goal_weight", 0.5))
    if kind == "targets":
        return TargetsTask(num_targets=int(sec.get("n_targets", 8)),
                           num_obstacles=int(sec.get("n_obstacles", 5)))
    if kind == "goal":
        return GoalTask(num_obstacles=int(sec.get("n_obstacles", 5)), weight=weight)
    if kind == "rally":
        return RallyTask(informed_fraction=float(sec.get("informed_fraction", 0.16)),
                         groups=int(sec.get("groups", 2)), weight=weight)
    if kind == "disperse":
        return DisperseTask(num_obstacles=int(sec.get("n_obstacles", 5)),
                            strength=float(sec.get("strength", 0.90)))
    if kind == "avoid":
        return AvoidTask()
    if kind == "follow":
        return FollowTask()
    raise ValueError(f"unknown task kind {kind!r}")


def design_from_config(cfg: dict, **overrides) -> DesignSpec:
    """DesignSpec from the [sweep] section plus keyword overrides."""
    sec = cfg.get("sweep", {})
    kwargs: dict = {}
    if "task" in sec:
        kwargs["task"] = sec["task"]
    if "models" in sec:
        kwargs["models"] = tuple(sec["models"].replace(",", " ").split())
    for key, conv in [
            ("n_top_levels", _ints), ("n_agents_levels", _ints),
            ("r_r_levels", _floats), ("r_o_mults", _floats),
            ("r_a_mults", _floats), ("n_obstacles_levels", _ints),
            ("n_targets_levels", _ints), ("informed_levels", _floats),
            ("group_levels", _ints), ("strength_levels", _floats)]:
        if key in sec:
            kwargs[key] = conv(sec[key])
    if "replicates" in sec:
        kwargs["replicates"] = int(sec["replicates"])
    if "scale" in sec:
        kwargs["scale"] = float(sec["scale"])
    if "iterations" in sec:
        kwargs["iterations"] = int(sec["iterations"])
    if "base_seed" in sec:
        kwargs["base_seed"] = int(sec["base_seed"])
    if "goal_weight" in sec:
        kwargs["goal_weight"] = float(sec["goal_weight"])
    kwargs["world"] = world_from_config(cfg)
    kwargs["motion"] = motion_from_config(cfg)
    kwargs.update(overrides)
    if "task" not in kwargs:
        raise ValueError("sweep config must name a task")
    return DesignSpec(**kwargs)

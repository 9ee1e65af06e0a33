"""The six swarm tasks: task forces, auxiliary entities, init, bookkeeping.

Fixed constants: a goal or rally point counts as reached within a 50 px disc;
a target is discovered within 10 px. Spawn schemes: agents start in a disc
around the world center sized by ``spawn_disc_radius`` (Avoid headings face
the predator; the Follow leader starts anywhere in the world), except Rally,
which starts in ``groups`` clusters of spread 3 * attraction radius.
Obstacles, targets, goal, and rally point are rejection-sampled clear of the
spawn regions and of each other; placement failing 10,000 attempts aborts
the trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .comm import NeighborGraph, SpecialAgent, Specials
from .dynamics import MotionConfig, RadiiConfig, SwarmState, wrap_angle
from .world import Circle, Vec2, WorldConfig, clamp_to_world

GOAL_RADIUS = 50.0
DISCOVERY_RADIUS = 10.0
OBSTACLE_RADIUS = 25.0
MAX_PLACEMENT_ATTEMPTS = 10_000

# Tasks whose agents spawn uniformly over the world instead of in the
# central disc, kept as an experiment hook; the shipped tasks all use the
# concentrated spawn.
UNIFORM_SPAWN_TASKS: tuple[str, ...] = ()

# Mean in-disc spacing floor (px) for central spawns; keeps the initial pack
# loose enough that bodies do not shadow the whole neighborhood.
SPAWN_SPACING = 15.0


def spawn_disc_radius(task_kind: str, n_agents: int, attraction: float) -> float:
    """Central spawn disc radius: twice the attraction radius, with a
    density floor for every task except Disperse (whose radius is fixed)."""
    base = 2.0 * attraction
    if task_kind == "disperse":
        return base
    return max(base, SPAWN_SPACING * math.sqrt(n_agents))


class PlacementError(RuntimeError):
    """Raised when rejection sampling cannot satisfy placement constraints."""


@dataclass(frozen=True)
class PathSpec:
    """Predefined straight traversal: entry point, direction, speed."""

    entry: Vec2
    direction: float
    speed: float

    def __post_init__(self):
        object.__setattr__(self, "entry", np.asarray(self.entry, dtype=np.float64))


@dataclass(frozen=True)
class WalkSpec:
    """Random walk: per-iteration heading noise half-width and speed
    (None means the agents' speed)."""

    sigma: float = 0.15
    speed: Optional[float] = None


@dataclass(frozen=True)
class TargetsTask:
    """Search for multiple targets through swarming alone (no task force)."""

    num_targets: int = 8
    num_obstacles: int = 5
    kind = "targets"


@dataclass(frozen=True)
class GoalTask:
    """Find a goal; aware agents are attracted to it and tell their neighbors."""

    num_obstacles: int = 5
    goal: Optional[Vec2] = None
    weight: float = 0.5
    kind = "goal"


@dataclass(frozen=True)
class RallyTask:
    """A fixed informed minority is attracted to the rally point but never
    shares its location."""

    informed_fraction: float = 0.16
    groups: int = 2
    rally_point: Optional[Vec2] = None
    weight: float = 0.5
    kind = "rally"


@dataclass(frozen=True)
class DisperseTask:
    """Constant radial force away from the center, scaled by ``strength``."""

    num_obstacles: int = 5
    strength: float = 0.90
    center: Optional[Vec2] = None
    kind = "disperse"


@dataclass(frozen=True)
class AvoidTask:
    """A predator on a predefined straight path repels agents within the
    attraction radius and occludes visual links."""

    path: Optional[PathSpec] = None
    kind = "avoid"


@dataclass(frozen=True)
class FollowTask:
    """A randomly walking leader attracts agents that currently sense it."""

    walk: WalkSpec = WalkSpec()
    kind = "follow"


TaskSpec = Union[TargetsTask, GoalTask, RallyTask, DisperseTask, AvoidTask, FollowTask]


@dataclass
class TaskState:
    """Mutable per-trial task bookkeeping (single-writer, one trial)."""

    targets: Optional[np.ndarray] = None          # (N_t, 2)
    discovered: Optional[np.ndarray] = None       # (N_t,) bool, monotone
    goal: Optional[np.ndarray] = None             # goal or rally point
    reached_ever: Optional[np.ndarray] = None     # (N,) bool
    first_aware_iter: Optional[int] = None
    all_aware_iter: Optional[int] = None
    dinf_sum: float = 0.0
    dinf_steps: int = 0
    predator: Optional[SpecialAgent] = None
    path: Optional[PathSpec] = None
    predator_range: float = 0.0
    leader: Optional[SpecialAgent] = None
    walk: Optional[WalkSpec] = None
    follow_counts: Optional[np.ndarray] = None    # (N,) int
    follow_ever: Optional[np.ndarray] = None      # (N,) bool
    swarm_stick: int = 0

    def specials(self) -> Specials:
        return Specials(leader=self.leader, predator=self.predator)


def _unit_from(dx: float, dy: float) -> np.ndarray:
    d = math.sqrt(dx * dx + dy * dy)
    if d > 0.0:
        return np.array([dx / d, dy / d])
    return np.zeros(2)


def task_force(task: TaskSpec, i: int, states: SwarmState, graph: NeighborGraph,
               task_state: TaskState):
    """Unit task force direction and weight for agent i, or ((0,0), 0)."""
    zero = (np.zeros(2), 0.0)
    pos = states.positions
    if isinstance(task, TargetsTask):
        return zero
    if isinstance(task, GoalTask):
        if not states.aware[i]:
            return zero
        g = task_state.goal
        return (_unit_from(g[0] - pos[i, 0], g[1] - pos[i, 1]), task.weight)
    if isinstance(task, RallyTask):
        if not states.informed[i]:
            return zero
        g = task_state.goal
        return (_unit_from(g[0] - pos[i, 0], g[1] - pos[i, 1]), task.weight)
    if isinstance(task, DisperseTask):
        c = task_state.goal
        return (_unit_from(pos[i, 0] - c[0], pos[i, 1] - c[1]), task.strength)
    if isinstance(task, AvoidTask):
        p = task_state.predator.position
        dx = pos[i, 0] - p[0]
        dy = pos[i, 1] - p[1]
        r = task_state.predator_range
        if dx * dx + dy * dy <= r * r:
            return (_unit_from(dx, dy), 1.0)
        return zero
    if isinstance(task, FollowTask):
        if graph.leader_link is not None and graph.leader_link[i]:
            p = task_state.leader.position
            return (_unit_from(p[0] - pos[i, 0], p[1] - pos[i, 1]), 1.0)
        return zero
    raise TypeError(f"unknown task: {task!r}")


def _unit_rows(vecs: np.ndarray) -> np.ndarray:
    norm = np.sqrt(vecs[:, 0] ** 2 + vecs[:, 1] ** 2)
    out = np.zeros_like(vecs)
    nz = norm > 0.0
    out[nz] = vecs[nz] / norm[nz, None]
    return out


def task_forces(task: TaskSpec, states: SwarmState, graph: NeighborGraph,
                task_state: TaskState) -> np.ndarray:
    """Weighted (N,2) task force vectors for all agents at once."""
    n = states.n
    pos = states.positions
    if isinstance(task, TargetsTask):
        return np.zeros((n, 2))
    if isinstance(task, (GoalTask, RallyTask)):
        gate = states.aware if isinstance(task, GoalTask) else states.informed
        out = np.zeros((n, 2))
        out[gate] = _unit_rows(task_state.goal[None, :] - pos[gate]) * task.weight
        return out
    if isinstance(task, DisperseTask):
        return _unit_rows(pos - task_state.goal[None, :]) * task.strength
    if isinstance(task, AvoidTask):
        rel = pos - task_state.predator.position[None, :]
        d2 = rel[:, 0] ** 2 + rel[:, 1] ** 2
        r = task_state.predator_range
        out = np.zeros((n, 2))
        gate = d2 <= r * r
        out[gate] = _unit_rows(rel[gate])
        return out
    if isinstance(task, FollowTask):
        out = np.zeros((n, 2))
        gate = graph.leader_link
        if gate is not None and gate.any():
            out[gate] = _unit_rows(task_state.leader.position[None, :] - pos[gate])
        return out
    raise TypeError(f"unknown task: {task!r}")


def advance_specials(task: TaskSpec, task_state: TaskState, world: WorldConfig,
                     rng) -> None:
    """Move the predator along its path / the leader along its random walk.

    The leader reflects off walls; the predator follows its predefined line
    regardless of the swarm (and may exit the world)."""
    if isinstance(task, AvoidTask):
        p = task_state.predator
        p.position = p.position + p.speed * np.array(
            [math.cos(p.heading), math.sin(p.heading)])
    elif isinstance(task, FollowTask):
        lead = task_state.leader
        sigma = task_state.walk.sigma
        lead.heading = wrap_angle(lead.heading + rng.uniform(-sigma, sigma))
        speed = task_state.walk.speed if task_state.walk.speed is not None else lead.speed
        nxt = lead.position + speed * np.array(
            [math.cos(lead.heading), math.sin(lead.heading)])
        if nxt[0] < 0.0 or nxt[0] > world.width:
            lead.heading = wrap_angle(math.pi - lead.heading)
        if nxt[1] < 0.0 or nxt[1] > world.height:
            lead.heading = wrap_angle(-lead.heading)
        nxt = lead.position + speed * np.array(
            [math.cos(lead.heading), math.sin(lead.heading)])
        lead.position = clamp_to_world(nxt, world)


def update_task_state(task: TaskSpec, graph: NeighborGraph, states: SwarmState,
                      task_state: TaskState, t: int,
                      component_labels: Optional[np.ndarray] = None) -> TaskState:
    """Per-iteration task bookkeeping after movement (discoveries, awareness,
    influence samples, follow counts). Mutates and returns ``task_state``."""
    pos = states.positions
    if isinstance(task, TargetsTask):
        undiscovered = ~task_state.discovered
        if undiscovered.any():
            rel = task_state.targets[undiscovered, None, :] - pos[None, :, :]
            d2 = (rel ** 2).sum(axis=2)
            hit = (d2 <= DISCOVERY_RADIUS * DISCOVERY_RADIUS).any(axis=1)
            idx = np.nonzero(undiscovered)[0][hit]
            task_state.discovered[idx] = True
    elif isinstance(task, GoalTask):
        rel = pos - task_state.goal[None, :]
        inside = rel[:, 0] ** 2 + rel[:, 1] ** 2 <= GOAL_RADIUS * GOAL_RADIUS
        task_state.reached_ever |= inside
        informers = states.aware
        new_aware = states.aware | inside
        if informers.any():
            new_aware = new_aware | graph.adj[informers].any(axis=0)
        states.aware = new_aware
        if task_state.first_aware_iter is None and new_aware.any():
            task_state.first_aware_iter = t
        if task_state.all_aware_iter is None and new_aware.all():
            task_state.all_aware_iter = t
    elif isinstance(task, RallyTask):
        rel = pos - task_state.goal[None, :]
        inside = rel[:, 0] ** 2 + rel[:, 1] ** 2 <= GOAL_RADIUS * GOAL_RADIUS
        task_state.reached_ever |= inside
        uninformed = ~states.informed
        n_uninformed = int(uninformed.sum())
        if n_uninformed > 0:
            influenced = graph.adj[:, states.informed].any(axis=1) & uninformed
            task_state.dinf_sum += influenced.sum() / n_uninformed
            task_state.dinf_steps += 1
    elif isinstance(task, FollowTask):
        direct = graph.leader_link
        if direct is None:
            return task_state
        task_state.follow_counts += direct
        if direct.any():
            task_state.swarm_stick += 1
            if component_labels is None:
                from .metrics import component_labels as _labels
                component_labels = _labels(graph)
            roots = np.unique(component_labels[direct])
            task_state.follow_ever |= np.isin(component_labels, roots)
    # DisperseTask and AvoidTask need no bookkeeping beyond graph history.
    return task_state


def _sample_disc(rng, center, radius: float, n: int) -> np.ndarray:
    radii = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    angles = rng.uniform(0.0, 2.0 * math.pi, n)
    return center[None, :] + np.column_stack(
        (radii * np.cos(angles), radii * np.sin(angles)))


def _place_obstacles(rng, world: WorldConfig, count: int,
                     keepouts: list[tuple[np.ndarray, float]]) -> tuple[Circle, ...]:
    placed: list[Circle] = []
    r = OBSTACLE_RADIUS
    for _ in range(count):
        for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
            c = np.array([rng.uniform(r, world.width - r),
                          rng.uniform(r, world.height - r)])
            ok = all(np.hypot(*(c - kc)) > r + kr for kc, kr in keepouts)
            ok = ok and all(np.hypot(*(c - o.center)) > r + o.radius for o in placed)
            if ok:
                placed.append(Circle(c, r))
                break
        else:
            raise PlacementError(f"cannot place obstacle {len(placed) + 1} of {count}")
    return tuple(placed)


def _place_point(rng, world: WorldConfig, margin: float,
                 keepouts: list[tuple[np.ndarray, float]], what: str) -> np.ndarray:
    if 2.0 * margin >= world.width or 2.0 * margin >= world.height:
        raise PlacementError(f"cannot place {what}: margin exceeds world size")
    for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
        p = np.array([rng.uniform(margin, world.width - margin),
                      rng.uniform(margin, world.height - margin)])
        if all(np.hypot(*(p - kc)) > kr for kc, kr in keepouts):
            return p
    raise PlacementError(f"cannot place {what}")


def _uniform_positions(rng, world: WorldConfig, n: int,
                       keepouts: list[tuple[np.ndarray, float]]) -> np.ndarray:
    """Uniform positions over the world, redrawn out of the keepout discs."""
    pos = np.column_stack((rng.uniform(0.0, world.width, n),
                           rng.uniform(0.0, world.height, n)))
    for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
        bad = np.zeros(n, dtype=bool)
        for center, radius in keepouts:
            rel = pos - np.asarray(center)[None, :]
            bad |= rel[:, 0] ** 2 + rel[:, 1] ** 2 <= radius * radius
        if not bad.any():
            return pos
        k = int(bad.sum())
        pos[bad] = np.column_stack((rng.uniform(0.0, world.width, k),
                                    rng.uniform(0.0, world.height, k)))
    raise PlacementError("cannot place agents clear of task entities")


def init_trial(task: TaskSpec, n_agents: int, radii: RadiiConfig,
               motion: MotionConfig, world: WorldConfig,
               rng) -> tuple[SwarmState, TaskState, WorldConfig]:
    """Seeded initialization of one trial.

    Draw order is fixed: obstacles, task entities, agent positions, agent
    headings, then the Rally informed sample. Returns the trial world with
    its obstacles installed.
    """
    center = world.center
    if isinstance(task, DisperseTask) and task.center is not None:
        center = np.asarray(task.center, dtype=np.float64)
    spawn_radius = spawn_disc_radius(task.kind, n_agents, radii.attraction)
    uniform_spawn = task.kind in UNIFORM_SPAWN_TASKS
    ts = TaskState()

    n_obstacles = getattr(task, "num_obstacles", 0)
    if n_obstacles:
        obstacles = _place_obstacles(
            rng, world, n_obstacles,
            keepouts=[] if uniform_spawn else [(center, spawn_radius)])
        world = replace(world, obstacles=obstacles)
    obstacle_keepouts = [(o.center, o.radius) for o in world.obstacles]
    entity_keepouts: list[tuple[np.ndarray, float]] = []

    spawn_keepout = [] if uniform_spawn else [(center, spawn_radius + DISCOVERY_RADIUS)]
    spawn_centers = [center]
    if isinstance(task, TargetsTask):
        pts = []
        for k in range(task.num_targets):
            pts.append(_place_point(
                rng, world, margin=DISCOVERY_RADIUS,
                keepouts=spawn_keepout + obstacle_keepouts, what=f"target {k + 1}"))
        ts.targets = np.array(pts) if pts else np.zeros((0, 2))
        ts.discovered = np.zeros(len(pts), dtype=bool)
        entity_keepouts = [(p, DISCOVERY_RADIUS + 2.0) for p in pts]
    elif isinstance(task, GoalTask):
        goal_keepout = [] if uniform_spawn else [(center, spawn_radius + GOAL_RADIUS)]
        ts.goal = (np.asarray(task.goal, dtype=np.float64) if task.goal is not None
                   else _place_point(rng, world, margin=GOAL_RADIUS + DISCOVERY_RADIUS,
                                     keepouts=goal_keepout + obstacle_keepouts,
                                     what="goal"))
        ts.reached_ever = np.zeros(n_agents, dtype=bool)
        entity_keepouts = [(ts.goal, GOAL_RADIUS + 2.0)]
    elif isinstance(task, RallyTask):
        spread = 3.0 * radii.attraction
        margin = min(spread, world.width / 2.0, world.height / 2.0)
        spawn_centers = []
        for k in range(task.groups):
            spawn_centers.append(_place_point(
                rng, world, margin=margin,
                keepouts=[(c, 4.0 * radii.attraction) for c in spawn_centers],
                what=f"rally spawn cluster {k + 1}"))
        ts.goal = (np.asarray(task.rally_point, dtype=np.float64)
                   if task.rally_point is not None
                   else _place_point(rng, world, margin=GOAL_RADIUS + DISCOVERY_RADIUS,
                                     keepouts=[(c, spread + GOAL_RADIUS)
                                               for c in spawn_centers],
                                     what="rally point"))
        ts.reached_ever = np.zeros(n_agents, dtype=bool)
    elif isinstance(task, DisperseTask):
        ts.goal = center
        spawn_centers = [center]
    elif isinstance(task, AvoidTask):
        if task.path is not None:
            path = task.path
        else:
            edge = int(rng.integers(0, 4))
            along = rng.uniform(0.0, world.width if edge < 2 else world.height)
            if edge == 0:
                entry = np.array([along, 0.0])
            elif edge == 1:
                entry = np.array([along, world.height])
            else:
                entry = np.array([0.0 if edge == 2 else world.width, along])
            direction = math.atan2(center[1] - entry[1], center[0] - entry[0])
            path = PathSpec(entry, direction, motion.speed)
        ts.path = path
        ts.predator = SpecialAgent(path.entry.copy(), path.direction,
                                   path.speed, motion.body_radius)
        ts.predator_range = radii.attraction
    elif isinstance(task, FollowTask):
        ts.walk = task.walk
        lead_pos = _uniform_positions(rng, world, 1, obstacle_keepouts)[0]
        lead_heading = wrap_angle(rng.uniform(-math.pi, math.pi))
        ts.leader = SpecialAgent(lead_pos, lead_heading, motion.speed,
                                 motion.body_radius)
        ts.follow_counts = np.zeros(n_agents, dtype=np.int64)
        ts.follow_ever = np.zeros(n_agents, dtype=bool)
    else:
        raise TypeError(f"unknown task: {task!r}")

    if uniform_spawn:
        positions = _uniform_positions(rng, world, n_agents,
                                       obstacle_keepouts + entity_keepouts)
    elif isinstance(task, RallyTask):
        spread = 3.0 * radii.attraction
        assignment = np.arange(n_agents) % task.groups
        offsets = _sample_disc(rng, np.zeros(2), spread, n_agents)
        positions = np.array(spawn_centers)[assignment] + offsets
    else:
        positions = _sample_disc(rng, spawn_centers[0], spawn_radius, n_agents)
    positions = np.column_stack((np.clip(positions[:, 0], 0.0, world.width),
                                 np.clip(positions[:, 1], 0.0, world.height)))

    if isinstance(task, AvoidTask):
        rel = ts.predator.position[None, :] - positions
        headings = np.arctan2(rel[:, 1], rel[:, 0])
    else:
        headings = rng.uniform(-math.pi, math.pi, n_agents)

    informed = np.zeros(n_agents, dtype=bool)
    if isinstance(task, RallyTask):
        k = int(round(task.informed_fraction * n_agents))
        informed[rng.choice(n_agents, size=k, replace=False)] = True

    states = SwarmState(positions, headings, speed=motion.speed,
                        body_radius=motion.body_radius, informed=informed)
    return states, ts, world

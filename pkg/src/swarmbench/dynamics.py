"""Self-propelled particle state and per-iteration force accumulation.

All agents move at constant speed; control acts on the velocity heading only.
Zone interactions (repel / align / attract) are evaluated on squared distances
so the compiled bulk path and the per-agent reference path agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .world import Vec2, WorldConfig, clamp_positions, env_force, env_forces

TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    """Normalize an angle (scalar or array) to (-pi, pi]."""
    return math.pi - (math.pi - theta) % TWO_PI


@dataclass
class Diagnostics:
    """Per-trial anomaly counters (integration overshoots, coincident pairs)."""

    overshoot: int = 0
    coincident: int = 0


@dataclass(frozen=True)
class RadiiConfig:
    """Zone radii: repel inside ``repulsion``, align inside ``orientation``,
    attract inside ``attraction``; interactions vanish beyond ``attraction``."""

    repulsion: float
    orientation: float
    attraction: float

    def __post_init__(self):
        if not (0.0 < self.repulsion < self.orientation < self.attraction):
            raise ValueError("radii must satisfy 0 < repulsion < orientation < attraction")


@dataclass(frozen=True)
class MotionConfig:
    """Shared motion/force parameters.

    Three switches select the swarm-force variant; the defaults are the
    plain zonal reading, and the alternatives exist for dynamics
    experiments:

    ``capped_attraction`` — True (default): the attraction zone ends at the
    attraction radius for every model; False: it ends at the communication
    model's sensing reach, so linked neighbors keep attracting at any
    sensed distance. The two coincide for the metric model, whose range
    equals the attraction radius.

    ``unit_zone_terms`` — True (default): each zone sum is normalized to
    unit magnitude before mixing; False: raw per-neighbor unit-vector sums,
    so a zone's pull scales with how many neighbors occupy it. Either way
    the combined swarm force is unit-normalized before entering the force
    accumulation, so task and environment weights keep their meaning.

    ``repulsion_priority`` — False (default): the three zones sum
    unconditionally; True: an active repulsion zone overrides orientation
    and attraction, the classic zonal-model collision rule.
    """

    speed: float = 2.0
    max_turn: float = 0.3
    body_radius: float = 5.0
    env_weight: float = 1.0
    swarm_weight: float = 1.0
    capped_attraction: bool = True
    unit_zone_terms: bool = True
    repulsion_priority: bool = False

    def __post_init__(self):
        if self.speed < 0 or self.max_turn < 0 or self.body_radius <= 0:
            raise ValueError("invalid motion parameters")


@dataclass
class AgentState:
    """Snapshot of one agent; headings are kept in (-pi, pi]."""

    id: int
    position: Vec2
    heading: float
    speed: float = 2.0
    body_radius: float = 5.0
    informed: bool = False
    aware: bool = False


class SwarmState:
    """Column-wise state of the whole swarm (one shared speed/body radius)."""

    def __init__(self, positions, headings, speed=2.0, body_radius=5.0,
                 informed=None, aware=None):
        self.positions = np.ascontiguousarray(positions, dtype=np.float64)
        self.headings = wrap_angle(np.asarray(headings, dtype=np.float64))
        n = self.positions.shape[0]
        if self.positions.shape != (n, 2) or self.headings.shape != (n,):
            raise ValueError("positions must be (N,2) and headings (N,)")
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.headings))):
            raise ValueError("non-finite state")
        if speed < 0 or body_radius <= 0:
            raise ValueError("invalid speed/body_radius")
        self.speed = float(speed)
        self.body_radius = float(body_radius)
        self.informed = (np.zeros(n, dtype=bool) if informed is None
                         else np.asarray(informed, dtype=bool).copy())
        self.aware = (np.zeros(n, dtype=bool) if aware is None
                      else np.asarray(aware, dtype=bool).copy())

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def agent(self, i: int) -> AgentState:
        return AgentState(
            id=i,
            position=self.positions[i].copy(),
            heading=float(self.headings[i]),
            speed=self.speed,
            body_radius=self.body_radius,
            informed=bool(self.informed[i]),
            aware=bool(self.aware[i]),
        )

    @classmethod
    def from_agents(cls, agents) -> "SwarmState":
        agents = list(agents)
        speeds = {a.speed for a in agents}
        radii = {a.body_radius for a in agents}
        if len(speeds) > 1 or len(radii) > 1:
            raise ValueError("speed and body_radius must be uniform across the swarm")
        return cls(
            positions=np.array([a.position for a in agents], dtype=np.float64),
            headings=np.array([a.heading for a in agents], dtype=np.float64),
            speed=agents[0].speed if agents else 2.0,
            body_radius=agents[0].body_radius if agents else 5.0,
            informed=[a.informed for a in agents],
            aware=[a.aware for a in agents],
        )

    def copy(self) -> "SwarmState":
        return SwarmState(self.positions.copy(), self.headings.copy(),
                          self.speed, self.body_radius,
                          self.informed, self.aware)


@dataclass
class ForceBreakdown:
    """Force terms acting on one agent.

    f_swarm is the swarm-weighted unit normalization of f_r + f_o + f_a
    (same direction, clamped magnitude) and f_total == f_env + f_swarm +
    f_task holds exactly as computed.
    """

    f_env: Vec2
    f_r: Vec2
    f_o: Vec2
    f_a: Vec2
    f_swarm: Vec2
    f_task: Vec2
    f_total: Vec2


def _unit(x: float, y: float):
    d = math.sqrt(x * x + y * y)
    if d > 0.0:
        return x / d, y / d
    return 0.0, 0.0


def swarm_force(i, graph, states: SwarmState, radii: RadiiConfig,
                rng=None, diagnostics: Diagnostics | None = None,
                unit_terms: bool = True):
    """Repulsion/orientation/attraction forces for agent i.

    With ``unit_terms`` (the default) each zone sum is normalized to unit
    magnitude when nonzero; otherwise the raw per-neighbor unit-vector sums
    are returned, so crowded zones pull harder. Coincident neighbor pairs
    (zero distance) contribute a repulsion unit vector in an RNG-drawn
    direction and are counted in the diagnostics.
    """
    pos = states.positions
    rr2 = radii.repulsion * radii.repulsion
    ro2 = radii.orientation * radii.orientation
    ra2 = radii.attraction * radii.attraction
    fr = [0.0, 0.0]
    fo = [0.0, 0.0]
    fa = [0.0, 0.0]
    for j in graph.neighbors(i):
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        d2 = dx * dx + dy * dy
        if d2 == 0.0:
            angle = 0.0 if rng is None else rng.uniform(0.0, TWO_PI)
            fr[0] += math.cos(angle)
            fr[1] += math.sin(angle)
            if diagnostics is not None:
                diagnostics.coincident += 1
        elif d2 < rr2:
            d = math.sqrt(d2)
            fr[0] -= dx / d
            fr[1] -= dy / d
        elif d2 < ro2:
            fo[0] += math.cos(float(states.headings[j]))
            fo[1] += math.sin(float(states.headings[j]))
        elif d2 < ra2:
            d = math.sqrt(d2)
            fa[0] += dx / d
            fa[1] += dy / d
    if unit_terms:
        return (np.array(_unit(*fr)), np.array(_unit(*fo)), np.array(_unit(*fa)))
    return np.array(fr), np.array(fo), np.array(fa)


def _normalize_rows(arr: np.ndarray) -> np.ndarray:
    norm = np.sqrt(arr[:, 0] * arr[:, 0] + arr[:, 1] * arr[:, 1])
    out = np.zeros_like(arr)
    nz = norm > 0.0
    out[nz] = arr[nz] / norm[nz, None]
    return out


def swarm_forces(graph, states: SwarmState, radii: RadiiConfig,
                 rng=None, diagnostics: Diagnostics | None = None,
                 unit_terms: bool = True):
    """Bulk version of swarm_force over the whole swarm; identical output."""
    cos_h = np.cos(states.headings)
    sin_h = np.sin(states.headings)
    f_r, f_o, f_a, coincident = _kernels.zone_force_sums(
        states.positions, cos_h, sin_h, graph.adj,
        radii.repulsion, radii.orientation, radii.attraction)
    for i, _j in coincident:
        angle = 0.0 if rng is None else rng.uniform(0.0, TWO_PI)
        f_r[i, 0] += math.cos(angle)
        f_r[i, 1] += math.sin(angle)
    if diagnostics is not None:
        diagnostics.coincident += len(coincident)
    if unit_terms:
        return _normalize_rows(f_r), _normalize_rows(f_o), _normalize_rows(f_a)
    return f_r, f_o, f_a


def total_force(i, states: SwarmState, world: WorldConfig, graph,
                radii: RadiiConfig, task_term=None,
                motion: MotionConfig = MotionConfig(),
                rng=None, diagnostics: Diagnostics | None = None) -> ForceBreakdown:
    """Accumulate environment, swarming, and task forces for agent i.

    ``task_term`` is the (unit direction, weight) pair produced by the task
    force rule, or None when the task exerts no force on this agent. Every
    nonzero term enters the sum unit-normalized and scaled by its weight.
    """
    f_env = env_force(states.positions[i], world) * motion.env_weight
    f_r, f_o, f_a = swarm_force(i, graph, states, radii, rng, diagnostics,
                                unit_terms=motion.unit_zone_terms)
    if motion.repulsion_priority and (f_r[0] != 0.0 or f_r[1] != 0.0):
        mix = f_r
    else:
        mix = f_r + f_o + f_a
    f_swarm = np.array(_unit(mix[0], mix[1])) * motion.swarm_weight
    if task_term is None:
        f_task = np.zeros(2)
    else:
        direction, weight = task_term
        f_task = np.asarray(direction, dtype=np.float64) * float(weight)
    f_total = f_env + f_swarm + f_task
    return ForceBreakdown(f_env=f_env, f_r=f_r, f_o=f_o, f_a=f_a,
                          f_swarm=f_swarm, f_task=f_task, f_total=f_total)


def total_forces(states: SwarmState, world: WorldConfig, graph,
                 radii: RadiiConfig, task_vectors: np.ndarray,
                 motion: MotionConfig = MotionConfig(),
                 rng=None, diagnostics: Diagnostics | None = None) -> np.ndarray:
    """Bulk total force; ``task_vectors`` is the (N,2) weighted task force."""
    f_env = env_forces(states.positions, world) * motion.env_weight
    f_r, f_o, f_a = swarm_forces(graph, states, radii, rng, diagnostics,
                                 unit_terms=motion.unit_zone_terms)
    mix = f_r + f_o + f_a
    if motion.repulsion_priority:
        repelling = (f_r[:, 0] != 0.0) | (f_r[:, 1] != 0.0)
        mix[repelling] = f_r[repelling]
    f_swarm = _normalize_rows(mix) * motion.swarm_weight
    return f_env + f_swarm + task_vectors


def step(states: SwarmState, forces, world: WorldConfig, max_turn: float,
         diagnostics: Diagnostics | None = None) -> SwarmState:
    """Synchronous heading/position update of all agents.

    ``forces`` is an (N,2) array of total forces or a sequence of
    ForceBreakdown. Headings rotate toward the force direction by at most
    ``max_turn`` (ties at pi break counterclockwise); positions advance by
    ``speed`` along the new heading and are clamped to the world.
    """
    if len(forces) and isinstance(forces[0], ForceBreakdown):
        forces = np.array([f.f_total for f in forces], dtype=np.float64)
    else:
        forces = np.asarray(forces, dtype=np.float64)
    mag = np.sqrt(forces[:, 0] ** 2 + forces[:, 1] ** 2)
    desired = np.where(mag > 0.0, np.arctan2(forces[:, 1], forces[:, 0]),
                       states.headings)
    delta = wrap_angle(desired - states.headings)
    turn = np.clip(delta, -max_turn, max_turn)
    new_headings = wrap_angle(states.headings + turn)
    proposed = states.positions + states.speed * np.column_stack(
        (np.cos(new_headings), np.sin(new_headings)))
    clamped = clamp_positions(proposed, world)
    if diagnostics is not None:
        diagnostics.overshoot += int(np.sum(np.any(clamped != proposed, axis=1)))
    return SwarmState(clamped, new_headings, states.speed, states.body_radius,
                      states.informed, states.aware)

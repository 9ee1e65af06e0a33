"""Communication models: per-iteration neighbor assignment as a directed graph.

Three rules decide who an agent senses: everyone within a fixed range
(metric), the k nearest agents regardless of distance (topological), or
agents inside the field of view with an unoccluded line of sight (visual).
Boundary conventions are fixed so tests are exact: the metric range is
inclusive, the visual range is strict, topological ties break toward the
lower agent index, and the field-of-view test is evaluated as a projection
(dx*cos + dy*sin >= dist*cos(half_angle)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .dynamics import SwarmState
from .world import Circle, WorldConfig, segment_clear


@dataclass(frozen=True)
class MetricComm:
    """Link to every agent within ``radius`` (boundary inclusive)."""

    radius: float

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError("metric radius must be > 0")


@dataclass(frozen=True)
class TopologicalComm:
    """Link to the ``k`` nearest agents (capped at N-1)."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("topological neighbor count must be >= 1")


@dataclass(frozen=True)
class VisualComm:
    """Link to agents within ``radius``, inside +/- ``half_angle`` of the
    heading, and not occluded by another body or obstacle."""

    radius: float
    half_angle: float

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError("visual radius must be > 0")
        if not (0.0 < self.half_angle <= math.pi):
            raise ValueError("half_angle must be in (0, pi]")


CommModel = Union[MetricComm, TopologicalComm, VisualComm]


@dataclass
class SpecialAgent:
    """Leader or predator: a link endpoint and occluder, never a swarm member."""

    position: np.ndarray
    heading: float = 0.0
    speed: float = 2.0
    body_radius: float = 5.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)

    def body(self) -> Circle:
        return Circle(self.position.copy(), self.body_radius)


@dataclass
class Specials:
    leader: Optional[SpecialAgent] = None
    predator: Optional[SpecialAgent] = None


@dataclass
class NeighborGraph:
    """Directed adjacency over the swarm plus optional special-agent links."""

    adj: np.ndarray
    leader_link: Optional[np.ndarray] = None
    predator_link: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        return np.nonzero(self.adj[i])[0]

    def symmetrized(self) -> np.ndarray:
        return self.adj | self.adj.T


def metric_neighbors(i: int, positions, d_met: float) -> set[int]:
    """Indices of agents within d_met of agent i (boundary inclusive)."""
    pos = np.asarray(positions, dtype=np.float64)
    lim = d_met * d_met
    out = set()
    for j in range(pos.shape[0]):
        if j == i:
            continue
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        if dx * dx + dy * dy <= lim:
            out.add(j)
    return out


def topological_neighbors(i: int, positions, n_top: int) -> set[int]:
    """Indices of the n_top nearest agents; ties break to the lower index."""
    if n_top < 1:
        raise ValueError("n_top must be >= 1")
    pos = np.asarray(positions, dtype=np.float64)
    n = pos.shape[0]
    d2 = {}
    for j in range(n):
        if j == i:
            continue
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        d2[j] = dx * dx + dy * dy
    order = sorted(d2, key=lambda j: (d2[j], j))
    return set(order[:min(n_top, n - 1)])


def visual_neighbors(i: int, states: SwarmState, cfg: VisualComm,
                     occluders=()) -> set[int]:
    """Indices visible from agent i under the visual rule.

    ``occluders`` holds the static discs (obstacles, leader/predator bodies);
    the body discs of the other swarm agents always occlude and are handled
    here, excluding the two segment endpoints for each candidate.
    """
    pos = states.positions
    n = states.n
    cos_h = np.cos(states.headings)
    sin_h = np.sin(states.headings)
    cos_phi = math.cos(cfg.half_angle)
    lim = cfg.radius * cfg.radius
    bodies = [Circle(pos[k].copy(), states.body_radius) for k in range(n)]
    out = set()
    for j in range(n):
        if j == i:
            continue
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        d2 = dx * dx + dy * dy
        if d2 >= lim:
            continue
        d = math.sqrt(d2)
        if dx * cos_h[i] + dy * sin_h[i] < d * cos_phi:
            continue
        occ = [bodies[k] for k in range(n) if k != i and k != j]
        occ.extend(occluders)
        if not segment_clear(pos[i], pos[j], occ):
            continue
        out.add(j)
    return out


def _occluder_arrays(states: SwarmState, world: WorldConfig,
                     extra_bodies=()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flat disc arrays for the kernels: agent bodies (skippable by agent
    index), then obstacles and special bodies (never skipped)."""
    n = states.n
    k = n + len(world.obstacles) + len(extra_bodies)
    xy = np.empty((k, 2))
    r2 = np.empty(k)
    skip = np.full(k, -1, dtype=np.int64)
    xy[:n] = states.positions
    r2[:n] = states.body_radius * states.body_radius
    skip[:n] = np.arange(n)
    row = n
    for circ in list(world.obstacles) + list(extra_bodies):
        xy[row] = circ.center
        r2[row] = circ.radius * circ.radius
        row += 1
    return xy, r2, skip


def _target_links(model: CommModel, states: SwarmState, world: WorldConfig,
                  target: SpecialAgent, other_bodies=()) -> np.ndarray:
    """Per-agent flags: does ``target`` satisfy the model conditions from each
    agent's perspective? Distance ties under the topological rule go to swarm
    agents, so the target joins only when strictly fewer than k agents are at
    least as close."""
    pos = states.positions
    if isinstance(model, MetricComm):
        rel = pos - target.position
        d2 = rel[:, 0] ** 2 + rel[:, 1] ** 2
        return d2 <= model.radius * model.radius
    if isinstance(model, TopologicalComm):
        return np.asarray(_kernels.topological_target_links(
            pos, target.position, model.k))
    occ_xy, occ_r2, occ_skip = _occluder_arrays(states, world, other_bodies)
    return np.asarray(_kernels.visual_target_links(
        pos, np.cos(states.headings), np.sin(states.headings),
        target.position, model.radius, math.cos(model.half_angle),
        occ_xy, occ_r2, occ_skip))


def build_graph(model: CommModel, states: SwarmState, world: WorldConfig,
                special: Optional[Specials] = None) -> NeighborGraph:
    """Neighbor graph for one immutable state snapshot.

    Pure function of its inputs: identical snapshots give identical graphs.
    Leader and predator act as occluders for the visual model and get their
    own link flags, but never appear in the swarm adjacency.
    """
    if states.n < 1:
        raise ValueError("swarm must contain at least one agent")
    pos = states.positions
    special = special or Specials()
    extra_bodies = [s.body() for s in (special.leader, special.predator) if s is not None]

    if isinstance(model, MetricComm):
        adj = _kernels.metric_adjacency(pos, model.radius)
    elif isinstance(model, TopologicalComm):
        adj = _kernels.topological_adjacency(pos, model.k)
    elif isinstance(model, VisualComm):
        occ_xy, occ_r2, occ_skip = _occluder_arrays(states, world, extra_bodies)
        adj = _kernels.visual_adjacency(
            pos, np.cos(states.headings), np.sin(states.headings),
            model.radius, math.cos(model.half_angle), occ_xy, occ_r2, occ_skip)
    else:
        raise TypeError(f"unknown communication model: {model!r}")

    leader_link = None
    predator_link = None
    if special.leader is not None:
        others = [special.predator.body()] if special.predator is not None else []
        leader_link = _target_links(model, states, world, special.leader, others)
    if special.predator is not None:
        others = [special.leader.body()] if special.leader is not None else []
        predator_link = _target_links(model, states, world, special.predator, others)
    return NeighborGraph(adj=np.asarray(adj), leader_link=leader_link,
                         predator_link=predator_link)

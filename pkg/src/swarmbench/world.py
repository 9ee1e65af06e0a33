"""Bounded 2D world: geometry primitives, circular obstacles, wall/obstacle steering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# A point or force vector is a float64 array of shape (2,).
Vec2 = np.ndarray


def vec2(x: float, y: float) -> Vec2:
    """Build a finite 2D vector; NaN/inf components are rejected."""
    v = np.array([x, y], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector ({x}, {y})")
    return v


@dataclass(frozen=True)
class Circle:
    """Disc occluder/obstacle with strictly positive radius."""

    center: Vec2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        if self.center.shape != (2,) or not np.all(np.isfinite(self.center)):
            raise ValueError("circle center must be a finite 2D point")
        if not (self.radius > 0.0):
            raise ValueError("circle radius must be > 0")


@dataclass(frozen=True)
class WorldConfig:
    """Rectangular world [0,width] x [0,height] with circular obstacles.

    Steering away from walls/obstacles activates within ``wall_margin`` of a
    surface; ``steer_offset`` rotates the steering direction (|offset| < pi/4
    so the steered vector still points away from the surface).
    """

    width: float = 1000.0
    height: float = 1000.0
    obstacles: tuple[Circle, ...] = field(default_factory=tuple)
    wall_margin: float = 20.0
    steer_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not (self.width > 0 and self.height > 0):
            raise ValueError("world dimensions must be positive")
        if not (self.wall_margin >= 0):
            raise ValueError("wall_margin must be >= 0")
        if not (abs(self.steer_offset) < math.pi / 4):
            raise ValueError("steer_offset must satisfy |offset| < pi/4")
        for c in self.obstacles:
            x, y = c.center
            if (x - c.radius < 0 or x + c.radius > self.width
                    or y - c.radius < 0 or y + c.radius > self.height):
                raise ValueError("obstacle not fully inside world bounds")

    @property
    def center(self) -> Vec2:
        return np.array([self.width / 2.0, self.height / 2.0])

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def in_bounds(self, p: Vec2) -> bool:
        return bool(0.0 <= p[0] <= self.width and 0.0 <= p[1] <= self.height)


def point_segment_distance_sq(c: Vec2, a: Vec2, b: Vec2) -> float:
    """Squared distance from point c to the closed segment [a, b]."""
    ax, ay = float(a[0]), float(a[1])
    dx, dy = float(b[0]) - ax, float(b[1]) - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        ex, ey = float(c[0]) - ax, float(c[1]) - ay
        return ex * ex + ey * ey
    t = ((float(c[0]) - ax) * dx + (float(c[1]) - ay) * dy) / length_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ex = ax + t * dx - float(c[0])
    ey = ay + t * dy - float(c[1])
    return ex * ex + ey * ey


def segment_clear(a: Vec2, b: Vec2, occluders) -> bool:
    """True iff no occluder disc interior intersects the open segment (a, b).

    A disc touching only an endpoint (distance exactly equal to its radius)
    does not block. Degenerate a == b is defined as clear.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a[0] == b[0] and a[1] == b[1]:
        return True
    for occ in occluders:
        if point_segment_distance_sq(occ.center, a, b) < occ.radius * occ.radius:
            return False
    return True


def clamp_to_world(p: Vec2, world: WorldConfig) -> Vec2:
    """Project a point onto [0,width] x [0,height]; identity for interior points."""
    return np.array([
        min(max(float(p[0]), 0.0), world.width),
        min(max(float(p[1]), 0.0), world.height),
    ])


def clamp_positions(positions: np.ndarray, world: WorldConfig) -> np.ndarray:
    """Vectorized clamp of an (N,2) position array to world bounds."""
    out = positions.copy()
    np.clip(out[:, 0], 0.0, world.width, out=out[:, 0])
    np.clip(out[:, 1], 0.0, world.height, out=out[:, 1])
    return out


def env_forces(positions: np.ndarray, world: WorldConfig) -> np.ndarray:
    """Steering directions away from nearby walls/obstacles for all agents.

    Returns an (N,2) array where each row is either a zero vector (no surface
    within wall_margin) or a unit vector pointing away from the nearby
    surfaces, optionally rotated by steer_offset. Out-of-bounds positions are
    clamped before evaluation.
    """
    pos = clamp_positions(np.asarray(positions, dtype=np.float64), world)
    n = pos.shape[0]
    acc = np.zeros((n, 2))
    m = world.wall_margin
    acc[:, 0] += (pos[:, 0] <= m).astype(np.float64)            # left wall
    acc[:, 0] -= (world.width - pos[:, 0] <= m).astype(np.float64)   # right wall
    acc[:, 1] += (pos[:, 1] <= m).astype(np.float64)            # bottom wall
    acc[:, 1] -= (world.height - pos[:, 1] <= m).astype(np.float64)  # top wall
    for obs in world.obstacles:
        rel = pos - obs.center
        dist = np.hypot(rel[:, 0], rel[:, 1])
        near = (dist - obs.radius <= m) & (dist > 0.0)
        if np.any(near):
            acc[near] += rel[near] / dist[near, None]
    norm = np.hypot(acc[:, 0], acc[:, 1])
    active = norm > 0.0
    out = np.zeros((n, 2))
    out[active] = acc[active] / norm[active, None]
    if world.steer_offset != 0.0 and np.any(active):
        c, s = math.cos(world.steer_offset), math.sin(world.steer_offset)
        x, y = out[active, 0].copy(), out[active, 1].copy()
        out[active, 0] = c * x - s * y
        out[active, 1] = s * x + c * y
    return out


def env_force(position: Vec2, world: WorldConfig) -> Vec2:
    """Single-agent wall/obstacle steering force (zero or unit magnitude)."""
    return env_forces(np.asarray(position, dtype=np.float64)[None, :], world)[0]

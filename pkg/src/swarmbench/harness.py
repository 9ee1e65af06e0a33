"""Factorial design enumeration, seeded trial execution, and CSV persistence.

Per-trial seeds are derived from the base seed and the trial index with a
splitmix-style 64-bit mixing function, so any subset of trials reproduces in
isolation and changing one trial's index never perturbs another trial's
random stream. Results are written in trial_index order regardless of worker
count, making sweep output byte-identical for any parallelism degree.
"""

from __future__ import annotations

import csv
import math
import multiprocessing
import time
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .comm import CommModel, MetricComm, TopologicalComm, VisualComm, build_graph
from .dynamics import Diagnostics, MotionConfig, RadiiConfig, step, total_forces
from .metrics import MetricsRecord, TrialHistory, trial_metrics
from .tasks import (AvoidTask, DisperseTask, FollowTask, GoalTask, PlacementError,
                    RallyTask, TargetsTask, TaskSpec, advance_specials, init_trial,
                    task_forces, update_task_state)
from .world import WorldConfig

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

TABLE1_ITERATIONS = {
    "targets": 1000, "goal": 1000, "rally": 750,
    "disperse": 200, "avoid": 200, "follow": 2000,
}

RESULT_COLUMNS = [
    "task", "model", "n_top", "N", "r_r", "r_o", "r_a",
    "task_factor_1", "task_factor_2", "trial_index", "seed",
    "PF", "NCC", "PR", "L", "SCC", "D", "I", "DINF", "INF", "ASTK", "SSTK",
    "status", "diagnostics",
]

TRACE_COLUMNS = ["t", "agent_id", "x", "y", "heading", "aware", "informed",
                 "n_neighbors", "event"]


def mix_seed(base_seed: int, trial_index: int) -> int:
    """splitmix64 finalizer over base_seed + GOLDEN * (trial_index + 1)."""
    z = (base_seed + _GOLDEN * (trial_index + 1)) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class TrialConfig:
    """One fully specified simulation run."""

    task: TaskSpec
    model: CommModel
    n_agents: int
    radii: RadiiConfig
    iterations: int
    seed: int
    trial_index: int = 0
    world: WorldConfig = WorldConfig()
    motion: MotionConfig = MotionConfig()

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class TrialResult:
    """Config echo plus metrics and diagnostics for one completed trial."""

    config: TrialConfig
    metrics: MetricsRecord
    status: str = "ok"
    abort_reason: str = ""
    overshoot: int = 0
    coincident: int = 0
    notes: tuple[str, ...] = ()
    wall_clock: float = 0.0   # kept in memory only; excluded from CSV output

    def csv_row(self) -> list[str]:
        cfg = self.config
        model, n_top = _model_column(cfg.model)
        f1, f2 = _task_factor_columns(cfg.task)
        row = [
            cfg.task.kind, model, n_top, str(cfg.n_agents),
            _fmt(cfg.radii.repulsion), _fmt(cfg.radii.orientation),
            _fmt(cfg.radii.attraction), f1, f2,
            str(cfg.trial_index), str(cfg.seed),
        ]
        for code in ("PF", "NCC", "PR", "L", "SCC", "D", "I", "DINF", "INF",
                     "ASTK", "SSTK"):
            row.append(_fmt(self.metrics.get(code)))
        status = self.status if self.status == "ok" else f"aborted={self.abort_reason}"
        diag = f"overshoot={self.overshoot};coincident={self.coincident}"
        if self.notes:
            diag += ";" + ";".join(self.notes)
        row.append(status.replace(",", ";"))
        row.append(diag.replace(",", ";"))
        return row


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".10g")


def _model_column(model: CommModel) -> tuple[str, str]:
    if isinstance(model, MetricComm):
        return "metric", ""
    if isinstance(model, TopologicalComm):
        return "topological", str(model.k)
    return "visual", ""


def _task_factor_columns(task: TaskSpec) -> tuple[str, str]:
    if isinstance(task, TargetsTask):
        return str(task.num_obstacles), str(task.num_targets)
    if isinstance(task, GoalTask):
        return str(task.num_obstacles), ""
    if isinstance(task, RallyTask):
        return _fmt(task.informed_fraction), str(task.groups)
    if isinstance(task, DisperseTask):
        return str(task.num_obstacles), _fmt(task.strength)
    return "", ""


@dataclass(frozen=True)
class DesignSpec:
    """Factor grids for one task's factorial experiment.

    ``scale`` shrinks the replicate count (rounded, floor 1): the full design
    uses 25 replicates per cell, so scale=0.04 gives single-replicate runs.
    """

    task: str
    models: tuple[str, ...] = ("metric", "topological", "visual")
    n_top_levels: tuple[int, ...] = (5, 6, 7, 8)
    n_agents_levels: tuple[int, ...] = (50, 100, 200)
    r_r_levels: tuple[float, ...] = (10.0, 20.0)
    r_o_mults: tuple[float, ...] = (1.5, 2.0)
    r_a_mults: tuple[float, ...] = (1.5, 2.0)
    n_obstacles_levels: tuple[int, ...] = (0, 5, 10)
    n_targets_levels: tuple[int, ...] = (4, 8, 16)
    informed_levels: tuple[float, ...] = (0.08, 0.16, 0.24)
    group_levels: tuple[int, ...] = (1, 2, 4)
    strength_levels: tuple[float, ...] = (0.45, 0.90, 1.35)
    replicates: int = 25
    scale: float = 1.0
    iterations: Optional[int] = None
    base_seed: int = 0
    goal_weight: float = 0.5
    world: WorldConfig = WorldConfig()
    motion: MotionConfig = MotionConfig()

    def __post_init__(self):
        if self.task not in TABLE1_ITERATIONS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.replicates < 1 or self.scale <= 0:
            raise ValueError("replicates must be >= 1 and scale > 0")


def _model_variants(spec: DesignSpec) -> list[tuple[str, Optional[int]]]:
    out: list[tuple[str, Optional[int]]] = []
    for kind in spec.models:
        if kind == "topological":
            out.extend(("topological", k) for k in spec.n_top_levels)
        elif kind in ("metric", "visual"):
            out.append((kind, None))
        else:
            raise ValueError(f"unknown model kind {kind!r}")
    return out


def _task_factor_grid(spec: DesignSpec) -> list[tuple]:
    if spec.task == "targets":
        return list(product(spec.n_obstacles_levels, spec.n_targets_levels))
    if spec.task == "goal":
        return [(n_o,) for n_o in spec.n_obstacles_levels]
    if spec.task == "rally":
        return list(product(spec.informed_levels, spec.group_levels))
    if spec.task == "disperse":
        return list(product(spec.n_obstacles_levels, spec.strength_levels))
    return [()]


def _make_task(spec: DesignSpec, factors: tuple) -> TaskSpec:
    if spec.task == "targets":
        return TargetsTask(num_targets=factors[1], num_obstacles=factors[0])
    if spec.task == "goal":
        return GoalTask(num_obstacles=factors[0], weight=spec.goal_weight)
    if spec.task == "rally":
        return RallyTask(informed_fraction=factors[0], groups=factors[1],
                         weight=spec.goal_weight)
    if spec.task == "disperse":
        return DisperseTask(num_obstacles=factors[0], strength=factors[1])
    if spec.task == "avoid":
        return AvoidTask()
    return FollowTask()


def enumerate_design(spec: DesignSpec) -> list[TrialConfig]:
    """Materialize the Cartesian product of factor grids times replicates.

    Nesting order (outer to inner): model variant, task factors, N, r_r,
    r_o multiplier, r_a multiplier, replicate. The metric range is bound to
    the attraction radius; the visual range is half the world diagonal.
    """
    variants = _model_variants(spec)
    factor_grid = _task_factor_grid(spec)
    reps = max(1, round(spec.replicates * spec.scale))
    iterations = (spec.iterations if spec.iterations is not None
                  else TABLE1_ITERATIONS[spec.task])
    grids_ok = (variants and factor_grid and spec.n_agents_levels
                and spec.r_r_levels and spec.r_o_mults and spec.r_a_mults)
    if not grids_ok:
        raise ValueError("design has an empty factor grid")
    d_vis = spec.world.diagonal / 2.0
    phi = 2.0 * math.pi / 3.0
    configs: list[TrialConfig] = []
    index = 0
    for kind, n_top in variants:
        for factors in factor_grid:
            task = _make_task(spec, factors)
            for n in spec.n_agents_levels:
                for r_r in spec.r_r_levels:
                    for ro_mult in spec.r_o_mults:
                        for ra_mult in spec.r_a_mults:
                            r_o = ro_mult * r_r
                            r_a = ra_mult * r_o
                            radii = RadiiConfig(r_r, r_o, r_a)
                            if kind == "metric":
                                model: CommModel = MetricComm(r_a)
                            elif kind == "topological":
                                model = TopologicalComm(n_top)
                            else:
                                model = VisualComm(d_vis, phi)
                            for _rep in range(reps):
                                configs.append(TrialConfig(
                                    task=task, model=model, n_agents=n,
                                    radii=radii, iterations=iterations,
                                    seed=mix_seed(spec.base_seed, index),
                                    trial_index=index, world=spec.world,
                                    motion=spec.motion))
                                index += 1
    return configs


class _Tracer:
    """Optional per-iteration trace CSV writer."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(TRACE_COLUMNS)

    def states(self, t, states, graph):
        degrees = graph.adj.sum(axis=1)
        for i in range(states.n):
            self._writer.writerow([
                t, i, _fmt(states.positions[i, 0]), _fmt(states.positions[i, 1]),
                _fmt(states.headings[i]), int(states.aware[i]),
                int(states.informed[i]), int(degrees[i]), "",
            ])

    def event(self, t, tag, position=None):
        x = _fmt(position[0]) if position is not None else ""
        y = _fmt(position[1]) if position is not None else ""
        self._writer.writerow([t, -1, x, y, "", "", "", "", tag])

    def close(self):
        self._fh.close()


def force_zone_radii(cfg: TrialConfig) -> RadiiConfig:
    """Zone radii used for force evaluation: the attraction radius by
    default, or the model's sensing reach when capped_attraction is off
    (the metric range equals the attraction radius, so both modes agree
    there)."""
    radii = cfg.radii
    if cfg.motion.capped_attraction or isinstance(cfg.model, MetricComm):
        return radii
    if isinstance(cfg.model, VisualComm):
        reach = max(cfg.model.radius, radii.attraction)
    else:
        reach = 4.0 * cfg.world.diagonal   # beyond any in-world distance
    return RadiiConfig(radii.repulsion, radii.orientation, reach)


def run_trial(cfg: TrialConfig, trace_path=None) -> TrialResult:
    """Run one seeded trial to completion; fully determined by ``cfg``."""
    t_start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    diag = Diagnostics()
    try:
        states, task_state, world = init_trial(
            cfg.task, cfg.n_agents, cfg.radii, cfg.motion, cfg.world, rng)
    except PlacementError as exc:
        return TrialResult(cfg, MetricsRecord(), status="aborted",
                           abort_reason=str(exc),
                           wall_clock=time.perf_counter() - t_start)

    history = TrialHistory(cfg.n_agents)
    history.iterations = cfg.iterations
    history.task_state = task_state
    history.record_start_positions(states.positions)
    tracer = _Tracer(trace_path) if trace_path else None

    zone_radii = force_zone_radii(cfg)
    graph = build_graph(cfg.model, states, world, task_state.specials())
    history.record_snapshot(graph)
    if tracer:
        tracer.states(0, states, graph)
    try:
        for t in range(1, cfg.iterations + 1):
            task_vecs = task_forces(cfg.task, states, graph, task_state)
            forces = total_forces(states, world, graph, zone_radii, task_vecs,
                                  cfg.motion, rng, diag)
            states = step(states, forces, world, cfg.motion.max_turn, diag)
            advance_specials(cfg.task, task_state, world, rng)
            graph = build_graph(cfg.model, states, world, task_state.specials())
            labels = history.record_snapshot(graph)
            before_discovered = (task_state.discovered.sum()
                                 if task_state.discovered is not None else 0)
            before_first = task_state.first_aware_iter
            before_all = task_state.all_aware_iter
            update_task_state(cfg.task, graph, states, task_state, t, labels)
            if tracer:
                if task_state.discovered is not None:
                    newly = int(task_state.discovered.sum()) - int(before_discovered)
                    if newly:
                        tracer.event(t, f"targets_discovered:{newly}")
                if before_first is None and task_state.first_aware_iter is not None:
                    tracer.event(t, "first_aware", task_state.goal)
                if before_all is None and task_state.all_aware_iter is not None:
                    tracer.event(t, "all_aware", task_state.goal)
                tracer.states(t, states, graph)
    finally:
        if tracer:
            tracer.close()
    history.record_end_positions(states.positions)
    record = trial_metrics(history, cfg.task)
    return TrialResult(cfg, record, status="ok",
                       overshoot=diag.overshoot, coincident=diag.coincident,
                       notes=tuple(history.notes),
                       wall_clock=time.perf_counter() - t_start)


def write_results_csv(path, results) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for res in results:
            writer.writerow(res.csv_row())


def run_sweep(spec: DesignSpec, workers: int = 1, out="results.csv",
              progress=None) -> dict:
    """Run every trial of a design and persist one CSV row per trial.

    Rows land in trial_index order for any worker count; each trial owns its
    RNG, so the output bytes are independent of the parallelism degree.
    """
    configs = enumerate_design(spec)
    t_start = time.perf_counter()
    n_ok = 0
    n_aborted = 0
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        if workers <= 1:
            iterator = map(run_trial, configs)
        else:
            ctx = multiprocessing.get_context()
            pool = ctx.Pool(processes=workers)
            iterator = pool.imap(run_trial, configs,
                                 chunksize=max(1, len(configs) // (workers * 16)))
        try:
            for done, res in enumerate(iterator, start=1):
                if res.status == "ok":
                    n_ok += 1
                else:
                    n_aborted += 1
                writer.writerow(res.csv_row())
                if progress and (done % progress == 0 or done == len(configs)):
                    elapsed = time.perf_counter() - t_start
                    print(f"  {done}/{len(configs)} trials "
                          f"({elapsed:.0f}s elapsed)", flush=True)
        finally:
            if workers > 1:
                pool.close()
                pool.join()
    return {
        "trials": len(configs), "ok": n_ok, "aborted": n_aborted,
        "out": str(out), "elapsed": time.perf_counter() - t_start,
    }


def read_results_csv(path) -> list[dict]:
    """Load a results CSV as a list of row dicts (strings as written)."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))

"""Trial performance measures computed from per-iteration graph history.

Directed links are symmetrized before any connectivity computation. Graph
snapshot statistics (component count, clustering, isolation) are averaged
over all recorded snapshots, including the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Optional

import numpy as np

from . import _kernels

# Metrics recorded per task; everything else stays unset (serialized empty).
RECORDED_METRICS = {
    "targets": {"PF", "NCC", "SCC", "D", "I"},
    "goal": {"L", "SCC", "PR", "D", "I"},
    "rally": {"NCC", "SCC", "PR", "DINF", "D", "I"},
    "disperse": {"NCC", "SCC", "D", "I"},
    "avoid": {"NCC", "SCC", "D", "I"},
    "follow": {"NCC", "SCC", "D", "I", "ASTK", "SSTK", "INF"},
}


@dataclass
class MetricsRecord:
    """One trial's measures; fields are None when not recorded for the task.

    percent_found      PF    targets discovered, percent of target count
    components_mean    NCC   connected components, mean over snapshots
    percent_reached    PR    agents that ever entered the goal disc, percent
    latency            L     iterations from first to full goal awareness
    clustering_mean    SCC   swarm clustering coefficient, mean over snapshots
    dispersion_gain    D     percent increase of mean pairwise distance
    isolated_pct       I     agents with no (symmetrized) neighbors, percent,
                             mean over snapshots
    direct_influence   DINF  uninformed agents with an informed neighbor over
                             uninformed count, mean over iterations
    leader_influence   INF   agents ever graph-connected to the leader, fraction
    agent_stickiness   ASTK  iterations directly linked to the leader, mean
                             over agents
    swarm_stickiness   SSTK  iterations with at least one direct leader link
    """

    percent_found: Optional[float] = None
    components_mean: Optional[float] = None
    percent_reached: Optional[float] = None
    latency: Optional[float] = None
    clustering_mean: Optional[float] = None
    dispersion_gain: Optional[float] = None
    isolated_pct: Optional[float] = None
    direct_influence: Optional[float] = None
    leader_influence: Optional[float] = None
    agent_stickiness: Optional[float] = None
    swarm_stickiness: Optional[float] = None

    FIELD_BY_CODE: ClassVar[dict[str, str]] = {
        "PF": "percent_found", "NCC": "components_mean", "PR": "percent_reached",
        "L": "latency", "SCC": "clustering_mean", "D": "dispersion_gain",
        "I": "isolated_pct", "DINF": "direct_influence", "INF": "leader_influence",
        "ASTK": "agent_stickiness", "SSTK": "swarm_stickiness",
    }

    def get(self, code: str) -> Optional[float]:
        return getattr(self, self.FIELD_BY_CODE[code])

    def set(self, code: str, value: Optional[float]) -> None:
        setattr(self, self.FIELD_BY_CODE[code], value)


def _adjacency_of(graph) -> np.ndarray:
    adj = graph.adj if hasattr(graph, "adj") else np.asarray(graph)
    return np.ascontiguousarray(adj, dtype=np.bool_)


def connected_components(graph) -> int:
    """Weakly connected component count after symmetrizing directed links."""
    n_comp, _cc, _iso, _labels = _kernels.graph_snapshot_stats(_adjacency_of(graph))
    return int(n_comp)


def clustering_coefficient(graph) -> float:
    """Mean over agents of the fraction of neighbor pairs that are linked;
    agents with fewer than two (symmetrized) neighbors contribute zero."""
    _n, cc, _iso, _labels = _kernels.graph_snapshot_stats(_adjacency_of(graph))
    return float(cc)


def component_labels(graph) -> np.ndarray:
    """Per-agent component root label on the symmetrized graph."""
    _n, _cc, _iso, labels = _kernels.graph_snapshot_stats(_adjacency_of(graph))
    return np.asarray(labels)


def mean_pairwise_distance(positions: np.ndarray) -> float:
    return float(_kernels.mean_pairwise_distance(
        np.ascontiguousarray(positions, dtype=np.float64)))


class TrialHistory:
    """Streaming accumulator over per-iteration graphs, states and task events.

    Graph snapshots are recorded for the initial state and after every
    iteration; task bookkeeping lives in the TaskState attached at the end of
    the trial by the runner.
    """

    def __init__(self, n: int):
        self.n = n
        self.iterations = 0
        self.snapshots = 0
        self._ncc_sum = 0.0
        self._scc_sum = 0.0
        self._iso_sum = 0.0
        self.start_spread: Optional[float] = None
        self.end_spread: Optional[float] = None
        self.task_state = None
        self.notes: list[str] = []

    def record_snapshot(self, graph) -> np.ndarray:
        """Fold one graph snapshot into the running averages; returns the
        component labels so callers can reuse them for task bookkeeping."""
        n_comp, cc, iso, labels = _kernels.graph_snapshot_stats(_adjacency_of(graph))
        self.snapshots += 1
        self._ncc_sum += n_comp
        self._scc_sum += cc
        self._iso_sum += 100.0 * iso / self.n
        return np.asarray(labels)

    def record_start_positions(self, positions: np.ndarray) -> None:
        self.start_spread = mean_pairwise_distance(positions)

    def record_end_positions(self, positions: np.ndarray) -> None:
        self.end_spread = mean_pairwise_distance(positions)

    @property
    def components_mean(self) -> float:
        return self._ncc_sum / self.snapshots

    @property
    def clustering_mean(self) -> float:
        return self._scc_sum / self.snapshots

    @property
    def isolated_pct(self) -> float:
        return self._iso_sum / self.snapshots


def trial_metrics(history: TrialHistory, task) -> MetricsRecord:
    """Assemble the metrics recorded for ``task`` from a completed history."""
    recorded = RECORDED_METRICS[task.kind]
    ts = history.task_state
    rec = MetricsRecord()
    if history.snapshots == 0:
        raise ValueError("empty trial history")

    if "NCC" in recorded:
        rec.components_mean = history.components_mean
    if "SCC" in recorded:
        rec.clustering_mean = history.clustering_mean
    if "I" in recorded:
        rec.isolated_pct = history.isolated_pct
    if "D" in recorded:
        if history.n < 2 or not history.start_spread:
            history.notes.append("D undefined: zero or degenerate start spread")
        else:
            rec.dispersion_gain = (100.0 * (history.end_spread - history.start_spread)
                                   / history.start_spread)
    if "PF" in recorded:
        if ts is None or ts.discovered is None or ts.discovered.size == 0:
            history.notes.append("PF undefined: no targets")
        else:
            rec.percent_found = 100.0 * float(np.mean(ts.discovered))
    if "PR" in recorded:
        rec.percent_reached = 100.0 * float(np.mean(ts.reached_ever))
    if "L" in recorded:
        if ts.first_aware_iter is None or ts.all_aware_iter is None:
            rec.latency = float(history.iterations)
        else:
            rec.latency = float(ts.all_aware_iter - ts.first_aware_iter)
    if "DINF" in recorded:
        if ts.dinf_steps == 0:
            history.notes.append("DINF undefined: no valid iterations")
        else:
            rec.direct_influence = ts.dinf_sum / ts.dinf_steps
    if "INF" in recorded:
        rec.leader_influence = float(np.mean(ts.follow_ever))
    if "ASTK" in recorded:
        rec.agent_stickiness = float(np.mean(ts.follow_counts))
    if "SSTK" in recorded:
        rec.swarm_stickiness = float(ts.swarm_stick)
    return rec

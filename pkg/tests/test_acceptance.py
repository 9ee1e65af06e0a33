"""Acceptance suite: desk-scale reproduction gates and hard invariants.

Desk scale means N in {50, 100}, 10 replicates per cell, the full radii
grid, n_top = 7, and one task-factor level per task. Ordering criteria are
checked on group means with Fisher LSD significance at alpha = 0.05; the
goal-latency criterion compares medians. Every criterion prints one
PASS/FAIL line. Sweeps are shared across criteria through session fixtures.
"""

import math
import statistics
import sys
from pathlib import Path

import numpy as np
import pytest

from swarmbench.comm import (MetricComm, NeighborGraph, TopologicalComm,
                             VisualComm, build_graph, metric_neighbors)
from swarmbench.dynamics import RadiiConfig, SwarmState, swarm_forces
from swarmbench.harness import (DesignSpec, enumerate_design,
                                read_results_csv, run_sweep, run_trial)
from swarmbench.metrics import clustering_coefficient, connected_components
from swarmbench.stats import (SampleGroup, anova_oneway, anova_twoway_balanced,
                              fisher_lsd)
from swarmbench.world import WorldConfig

from oracles import (UnionFind, bfs_component_count, brute_metric_neighbors,
                     brute_topological_neighbors, triple_enumeration_clustering)

ALPHA = 0.05
DESK_N = (50, 100)
DESK_REPS = 10


def desk_spec(task, **kw):
    base = dict(task=task, models=("metric", "topological", "visual"),
                n_top_levels=(7,), n_agents_levels=DESK_N,
                replicates=DESK_REPS, base_seed=20260808,
                n_obstacles_levels=(5,), n_targets_levels=(8,),
                informed_levels=(0.16,), group_levels=(2,),
                strength_levels=(0.9,))
    base.update(kw)
    return DesignSpec(**base)


def run_desk_sweep(tmp_factory, task, **kw):
    out = tmp_factory.mktemp(f"sweep_{task}") / "results.csv"
    summary = run_sweep(desk_spec(task, **kw), workers=1, out=str(out))
    print(f"[sweep {task}] {summary['trials']} trials, "
          f"{summary['aborted']} aborted, {summary['elapsed']:.0f}s",
          file=sys.__stdout__, flush=True)
    return out


def by_model(rows, code):
    grouped = {"metric": [], "topological": [], "visual": []}
    for row in rows:
        if row["status"] == "ok" and row[code] != "":
            grouped[row["model"]].append(float(row[code]))
    return grouped


def lsd_pairs(grouped, alpha=ALPHA):
    groups = [SampleGroup(k, tuple(v)) for k, v in grouped.items()]
    result = anova_oneway(groups)
    comps = {}
    for comp in fisher_lsd(result, groups, alpha=alpha):
        comps[(comp.label_a, comp.label_b)] = comp
        comps[(comp.label_b, comp.label_a)] = comp
    return result, comps


def significantly_greater(comps, a, b):
    comp = comps[(a, b)]
    mean_gap = comp.mean_diff if comp.label_a == a else -comp.mean_diff
    return mean_gap > 0 and comp.significant


def report(number, ok, detail):
    # bypass pytest's capture so every criterion line reaches the terminal
    print(f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'} - {detail}",
          file=sys.__stdout__, flush=True)
    return ok


@pytest.fixture(scope="session")
def targets_csv(tmp_path_factory):
    return run_desk_sweep(tmp_path_factory, "targets")


@pytest.fixture(scope="session")
def goal_csv(tmp_path_factory):
    return run_desk_sweep(tmp_path_factory, "goal")


@pytest.fixture(scope="session")
def rally_csv(tmp_path_factory):
    return run_desk_sweep(tmp_path_factory, "rally")


@pytest.fixture(scope="session")
def disperse_csv(tmp_path_factory):
    return run_desk_sweep(tmp_path_factory, "disperse")


@pytest.fixture(scope="session")
def avoid_csv(tmp_path_factory):
    return run_desk_sweep(tmp_path_factory, "avoid")


@pytest.fixture(scope="session")
def follow_csv(tmp_path_factory):
    return run_desk_sweep(tmp_path_factory, "follow")


@pytest.fixture(scope="session")
def follow_trend_csvs(tmp_path_factory):
    """ASTK trend cells: one mid radii configuration, N in {50,100,200}."""
    out = tmp_path_factory.mktemp("follow_trend") / "results.csv"
    spec = desk_spec("follow", n_agents_levels=(50, 100, 200),
                     r_r_levels=(20.0,), r_o_mults=(1.5,), r_a_mults=(2.0,))
    summary = run_sweep(spec, workers=1, out=str(out))
    print(f"[sweep follow-trend] {summary['trials']} trials, "
          f"{summary['elapsed']:.0f}s", file=sys.__stdout__, flush=True)
    return out


class TestCriterion1Invariants:
    """Module invariants as randomized property suites (>=200 cases each)."""

    def test_metric_graph_symmetry(self):
        rng = np.random.default_rng(910)
        world = WorldConfig()
        for _ in range(200):
            n = int(rng.integers(2, 40))
            st = SwarmState(rng.uniform(0, 800, (n, 2)), rng.uniform(-3, 3, n))
            radius = float(rng.uniform(20, 300))
            g = build_graph(MetricComm(radius), st, world)
            assert np.array_equal(g.adj, g.adj.T)
            i = int(rng.integers(n))
            assert set(g.neighbors(i)) == brute_metric_neighbors(
                i, st.positions, radius)
        report(1, True, "metric symmetry + brute-force oracle (200 cases)")

    def test_topological_out_degree(self):
        rng = np.random.default_rng(911)
        world = WorldConfig()
        for _ in range(200):
            n = int(rng.integers(2, 40))
            k = int(rng.integers(1, 10))
            st = SwarmState(rng.uniform(0, 800, (n, 2)), rng.uniform(-3, 3, n))
            g = build_graph(TopologicalComm(k), st, world)
            assert np.all(g.adj.sum(axis=1) == min(k, n - 1))
            i = int(rng.integers(n))
            assert set(g.neighbors(i)) == brute_topological_neighbors(
                i, st.positions, k)
        report(1, True, "topological out-degree + oracle (200 cases)")

    def test_visual_subset_of_range(self):
        rng = np.random.default_rng(912)
        world = WorldConfig()
        phi = 2 * math.pi / 3
        for _ in range(200):
            n = int(rng.integers(2, 25))
            st = SwarmState(rng.uniform(0, 600, (n, 2)), rng.uniform(-3, 3, n))
            d_vis = float(rng.uniform(50, 500))
            g = build_graph(VisualComm(d_vis, phi), st, world)
            i = int(rng.integers(n))
            assert set(g.neighbors(i)) <= metric_neighbors(i, st.positions, d_vis)
        report(1, True, "visual subset of range neighbors (200 cases)")

    def test_component_and_clustering_oracles(self):
        rng = np.random.default_rng(913)
        for _ in range(200):
            n = int(rng.integers(1, 35))
            adj = rng.random((n, n)) < rng.uniform(0.02, 0.3)
            np.fill_diagonal(adj, False)
            g = NeighborGraph(adj=adj)
            assert connected_components(g) == bfs_component_count(adj)
            assert clustering_coefficient(g) == pytest.approx(
                triple_enumeration_clustering(adj), abs=1e-12)
            sym = adj | adj.T
            uf = UnionFind(n)
            for i in range(n):
                for j in range(i + 1, n):
                    if sym[i, j]:
                        uf.union(i, j)
            assert connected_components(g) == n - uf.unions
        report(1, True, "component/clustering oracles + union-find (200 cases)")

    def test_force_equivariances(self):
        rng = np.random.default_rng(914)
        world = WorldConfig()
        radii = RadiiConfig(10.0, 20.0, 40.0)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            pos = rng.uniform(-80, 80, (n, 2))
            headings = rng.uniform(-math.pi, math.pi, n)
            alpha = float(rng.uniform(-math.pi, math.pi))
            c, s = math.cos(alpha), math.sin(alpha)
            rot = np.array([[c, -s], [s, c]])
            shift = rng.uniform(-40, 40, 2)
            st1 = SwarmState(pos, headings)
            st2 = SwarmState(pos + shift, headings)
            st3 = SwarmState(pos @ rot.T, headings + alpha)
            g1 = build_graph(MetricComm(1000.0), st1, world)
            g2 = build_graph(MetricComm(1000.0), st2, world)
            g3 = build_graph(MetricComm(1000.0), st3, world)
            f1 = swarm_forces(g1, st1, radii)
            f2 = swarm_forces(g2, st2, radii)
            f3 = swarm_forces(g3, st3, radii)
            for a, b in zip(f1, f2):
                assert np.allclose(a, b, atol=1e-9)
            for a, b in zip(f1, f3):
                assert np.allclose(a @ rot.T, b, atol=1e-9)
        report(1, True, "translation/rotation force equivariance (200 cases)")

    def test_determinism_under_parallelism(self, tmp_path):
        rng = np.random.default_rng(915)
        tasks = ("targets", "goal", "rally", "disperse", "avoid", "follow")
        for case in range(200):
            spec = desk_spec(tasks[case % 6], n_agents_levels=(7,),
                             replicates=1, iterations=6,
                             r_r_levels=(10.0,), r_o_mults=(1.5,),
                             r_a_mults=(2.0,),
                             base_seed=int(rng.integers(1 << 48)))
            cfg = enumerate_design(spec)[case % 3]
            assert run_trial(cfg).csv_row() == run_trial(cfg).csv_row()
        out1 = tmp_path / "w1.csv"
        out2 = tmp_path / "w2.csv"
        spec = desk_spec("disperse", n_agents_levels=(12,), replicates=2,
                         iterations=25)
        run_sweep(spec, workers=1, out=str(out1))
        run_sweep(spec, workers=2, out=str(out2))
        assert out1.read_bytes() == out2.read_bytes()
        report(1, True, "replay determinism (200 cases) + worker independence")


class TestCriterion2TopologicalIsolation:
    def test_topological_never_isolated(self, disperse_csv, avoid_csv):
        bad = 0
        total = 0
        for path in (disperse_csv, avoid_csv):
            for row in read_results_csv(path):
                if row["model"] == "topological" and row["status"] == "ok":
                    total += 1
                    if float(row["I"]) != 0.0:
                        bad += 1
        ok = report(2, bad == 0 and total > 0,
                    f"topological I == 0 exactly in {total} Disperse/Avoid trials "
                    f"({bad} violations)")
        assert ok


class TestCriterion3GoalClustering:
    def test_scc_ordering(self, goal_csv):
        grouped = by_model(read_results_csv(goal_csv), "SCC")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "metric", "topological")
              and significantly_greater(comps, "topological", "visual"))
        ok = report(3, ok,
                    "Goal SCC metric > topological > visual: "
                    + ", ".join(f"{k}={v:.3f}" for k, v in means.items()))
        assert ok


class TestCriterion4TargetsFound:
    def test_pf_topological_top(self, targets_csv):
        grouped = by_model(read_results_csv(targets_csv), "PF")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "topological", "visual")
              and significantly_greater(comps, "topological", "metric"))
        ok = report(4, ok,
                    "Targets PF topological top: "
                    + ", ".join(f"{k}={v:.2f}" for k, v in means.items()))
        assert ok


class TestCriterion5TargetsComponents:
    def test_ncc_ordering(self, targets_csv):
        grouped = by_model(read_results_csv(targets_csv), "NCC")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "metric", "visual")
              and significantly_greater(comps, "topological", "metric"))
        ok = report(5, ok,
                    "Targets NCC visual < metric < topological: "
                    + ", ".join(f"{k}={v:.2f}" for k, v in means.items()))
        assert ok


class TestCriterion6Rally:
    def test_pr_ordering(self, rally_csv):
        grouped = by_model(read_results_csv(rally_csv), "PR")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "visual", "metric")
              and significantly_greater(comps, "metric", "topological"))
        ok = report(6, ok,
                    "Rally PR visual > metric > topological: "
                    + ", ".join(f"{k}={v:.2f}" for k, v in means.items()))
        assert ok

    def test_dinf_metric_top(self, rally_csv):
        grouped = by_model(read_results_csv(rally_csv), "DINF")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "metric", "topological")
              and significantly_greater(comps, "metric", "visual"))
        ok = report(6, ok,
                    "Rally DINF metric highest: "
                    + ", ".join(f"{k}={v:.3f}" for k, v in means.items()))
        assert ok


class TestCriterion7Dispersion:
    def test_disperse_topological_top(self, disperse_csv):
        grouped = by_model(read_results_csv(disperse_csv), "D")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "topological", "metric")
              and significantly_greater(comps, "topological", "visual"))
        ok = report(7, ok,
                    "Disperse D topological highest: "
                    + ", ".join(f"{k}={v:.1f}" for k, v in means.items()))
        assert ok

    def test_avoid_topological_top(self, avoid_csv):
        grouped = by_model(read_results_csv(avoid_csv), "D")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "topological", "metric")
              and significantly_greater(comps, "topological", "visual"))
        ok = report(7, ok,
                    "Avoid D topological highest: "
                    + ", ".join(f"{k}={v:.1f}" for k, v in means.items()))
        assert ok


class TestCriterion8Follow:
    def test_inf_visual_top(self, follow_csv):
        grouped = by_model(read_results_csv(follow_csv), "INF")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "visual", "metric")
              and significantly_greater(comps, "visual", "topological"))
        ok = report(8, ok,
                    "Follow INF visual highest: "
                    + ", ".join(f"{k}={v:.3f}" for k, v in means.items()))
        assert ok

    def test_astk_metric_top(self, follow_csv):
        grouped = by_model(read_results_csv(follow_csv), "ASTK")
        means = {k: statistics.mean(v) for k, v in grouped.items()}
        _res, comps = lsd_pairs(grouped)
        ok = (significantly_greater(comps, "metric", "topological")
              and significantly_greater(comps, "metric", "visual"))
        ok = report(8, ok,
                    "Follow ASTK metric highest: "
                    + ", ".join(f"{k}={v:.1f}" for k, v in means.items()))
        assert ok

    def test_astk_decreasing_in_n(self, follow_trend_csvs):
        # monotone trend across the three swarm sizes: fitted slope of the
        # per-trial values on N is negative and the endpoint means decrease
        rows = read_results_csv(follow_trend_csvs)
        ok = True
        detail = []
        for model in ("metric", "topological", "visual"):
            xs, ys = [], []
            means = {}
            for n in (50, 100, 200):
                vals = [float(r["ASTK"]) for r in rows
                        if r["model"] == model and r["N"] == str(n)
                        and r["status"] == "ok"]
                means[n] = statistics.mean(vals)
                xs.extend([n] * len(vals))
                ys.extend(vals)
            slope = np.polyfit(np.array(xs, dtype=float), np.array(ys), 1)[0]
            detail.append(f"{model}: means " +
                          " / ".join(f"{means[n]:.1f}" for n in (50, 100, 200)) +
                          f", slope {slope:.3f}")
            ok = ok and slope < 0 and means[200] < means[50]
        ok = report(8, ok, "ASTK decreasing in N; " + "; ".join(detail))
        assert ok


class TestCriterion9GoalLatency:
    def test_median_latency_visual_lowest(self, goal_csv):
        grouped = by_model(read_results_csv(goal_csv), "L")
        medians = {k: statistics.median(v) for k, v in grouped.items()}
        ok = (medians["visual"] < medians["metric"]
              and medians["visual"] < medians["topological"])
        ok = report(9, ok,
                    "Goal median L visual lowest: "
                    + ", ".join(f"{k}={v:.1f}" for k, v in medians.items()))
        assert ok


class TestCriterion10DesignArithmetic:
    def test_table_totals(self):
        expected = {"targets": 32400, "goal": 10800, "rally": 32400,
                    "disperse": 32400, "avoid": 3600, "follow": 3600}
        actual = {task: len(enumerate_design(DesignSpec(task=task)))
                  for task in expected}
        ok = report(10, actual == expected,
                    "full-design totals " + str(actual))
        assert ok


class TestCriterion11StatsCorrectness:
    def test_pinned_oracles_and_identity(self):
        from test_stats import (GROUP_A, GROUP_B, GROUP_C, LSD_EXPECTED,
                                ONEWAY_F, ONEWAY_P, TWOWAY_DATA, TWOWAY_EXPECTED)
        groups = [SampleGroup("a", GROUP_A), SampleGroup("b", GROUP_B),
                  SampleGroup("c", GROUP_C)]
        res = anova_oneway(groups)
        ok = (abs(res.F - ONEWAY_F) / ONEWAY_F < 1e-6
              and abs(res.p - ONEWAY_P) / ONEWAY_P < 1e-6)
        for comp in fisher_lsd(res, groups):
            t_ref, p_ref = LSD_EXPECTED[(comp.label_a, comp.label_b)]
            ok = ok and abs(comp.t - t_ref) / t_ref < 1e-6
            ok = ok and abs(comp.p - p_ref) / p_ref < 1e-6
        tw = anova_twoway_balanced(TWOWAY_DATA)
        for effect, name in ((tw.factor_a, "A"), (tw.factor_b, "B"),
                             (tw.interaction, "AxB")):
            f_ref, p_ref = TWOWAY_EXPECTED[name]
            ok = ok and abs(effect.F - f_ref) / f_ref < 1e-6
            ok = ok and abs(effect.p - p_ref) / p_ref < 1e-6
        # F = t^2 identity for two groups
        rng = np.random.default_rng(916)
        for _ in range(50):
            a = tuple(rng.normal(0, 1, 8))
            b = tuple(rng.normal(1, 2, 6))
            two = anova_oneway([SampleGroup("a", a), SampleGroup("b", b)])
            ma, mb = statistics.mean(a), statistics.mean(b)
            sp2 = (sum((x - ma) ** 2 for x in a)
                   + sum((x - mb) ** 2 for x in b)) / (len(a) + len(b) - 2)
            t = (ma - mb) / math.sqrt(sp2 * (1 / len(a) + 1 / len(b)))
            ok = ok and abs(two.F - t * t) / (t * t) < 1e-9
        ok = report(11, ok, "ANOVA/LSD pinned oracle values and F = t^2")
        assert ok


class TestCriterion12Determinism:
    def test_desk_sweep_byte_identical(self, avoid_csv, tmp_path):
        out2 = tmp_path / "avoid_again.csv"
        run_sweep(desk_spec("avoid"), workers=2, out=str(out2))
        ok = Path(avoid_csv).read_bytes() == out2.read_bytes()
        ok = report(12, ok,
                    "full desk-scale Avoid sweep byte-identical across "
                    "worker counts 1 and 2")
        assert ok

import math

import numpy as np
import pytest

from swarmbench.comm import MetricComm, build_graph
from swarmbench.dynamics import (Diagnostics, RadiiConfig, SwarmState, step,
                                 swarm_force, swarm_forces, total_force,
                                 total_forces, wrap_angle)
from swarmbench.world import WorldConfig

from oracles import brute_zone_sums, unit_or_zero

WORLD = WorldConfig()
RADII = RadiiConfig(10.0, 20.0, 40.0)


def swarm(positions, headings=None, speed=2.0):
    positions = np.asarray(positions, dtype=float)
    if headings is None:
        headings = np.zeros(len(positions))
    return SwarmState(positions, headings, speed=speed)


def graph_of(positions, radius=1000.0):
    return build_graph(MetricComm(radius), swarm(positions), WORLD)


class TestWrapAngle:
    def test_half_turn_maps_to_pi(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)

    def test_range(self):
        rng = np.random.default_rng(0)
        vals = wrap_angle(rng.uniform(-50, 50, 1000))
        assert np.all(vals > -math.pi) and np.all(vals <= math.pi)


class TestSwarmForce:
    def test_repulsion_zone(self):
        st = swarm([(0, 0), (5, 0)])
        g = graph_of(st.positions)
        f_r, f_o, f_a = swarm_force(0, g, st, RADII)
        assert f_r[0] == pytest.approx(-1.0)
        assert np.allclose(f_o, 0) and np.allclose(f_a, 0)

    def test_orientation_zone(self):
        st = swarm([(0, 0), (15, 0)], headings=[0.0, math.pi / 2])
        g = graph_of(st.positions)
        f_r, f_o, f_a = swarm_force(0, g, st, RADII)
        assert np.allclose(f_r, 0) and np.allclose(f_a, 0)
        assert f_o[1] == pytest.approx(1.0)

    def test_attraction_zone(self):
        st = swarm([(0, 0), (30, 0)])
        g = graph_of(st.positions)
        f_r, f_o, f_a = swarm_force(0, g, st, RADII)
        assert np.allclose(f_r, 0) and np.allclose(f_o, 0)
        assert f_a[0] == pytest.approx(1.0)

    def test_no_neighbors(self):
        st = swarm([(0, 0), (500, 500)])
        g = graph_of(st.positions, radius=10.0)
        assert all(np.allclose(v, 0) for v in swarm_force(0, g, st, RADII))

    def test_beyond_attraction_contributes_nothing(self):
        st = swarm([(0, 0), (40.0, 0)])  # exactly at the attraction boundary
        g = graph_of(st.positions)
        assert all(np.allclose(v, 0) for v in swarm_force(0, g, st, RADII))

    def test_zone_sum_oracle(self):
        rng = np.random.default_rng(30)
        for _ in range(200):
            n = int(rng.integers(2, 21))
            pos = rng.uniform(0, 120, (n, 2))
            headings = rng.uniform(-math.pi, math.pi, n)
            st = swarm(pos, headings)
            g = graph_of(pos)
            i = int(rng.integers(n))
            f_r, f_o, f_a = swarm_force(i, g, st, RADII)
            br, bo, ba = brute_zone_sums(i, pos, headings, g.neighbors(i),
                                         RADII.repulsion, RADII.orientation,
                                         RADII.attraction)
            assert np.allclose(f_r, unit_or_zero(br), atol=1e-12)
            assert np.allclose(f_o, unit_or_zero(bo), atol=1e-12)
            assert np.allclose(f_a, unit_or_zero(ba), atol=1e-12)
            # raw mode returns the zone sums themselves
            r_r, r_o, r_a = swarm_force(i, g, st, RADII, unit_terms=False)
            assert np.allclose(r_r, br, atol=1e-12)
            assert np.allclose(r_o, bo, atol=1e-12)
            assert np.allclose(r_a, ba, atol=1e-12)

    def test_bulk_matches_reference_bitwise(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            n = int(rng.integers(2, 25))
            st = swarm(rng.uniform(0, 150, (n, 2)),
                       rng.uniform(-math.pi, math.pi, n))
            g = graph_of(st.positions)
            bulk = swarm_forces(g, st, RADII)
            for i in range(n):
                ref = swarm_force(i, g, st, RADII)
                for a, b in zip(ref, (bulk[0][i], bulk[1][i], bulk[2][i])):
                    assert np.array_equal(a, b)

    def test_coincident_pair_counted_and_random_direction(self):
        st = swarm([(5, 5), (5, 5)])
        g = graph_of(st.positions)
        diag = Diagnostics()
        rng = np.random.default_rng(9)
        f_r, _, _ = swarm_force(0, g, st, RADII, rng=rng, diagnostics=diag)
        assert diag.coincident == 1
        assert math.hypot(*f_r) == pytest.approx(1.0)
        # bulk path counts the directed pair twice (once per agent)
        diag2 = Diagnostics()
        swarm_forces(g, st, RADII, rng=np.random.default_rng(9), diagnostics=diag2)
        assert diag2.coincident == 2


class TestTotalForce:
    def test_swarm_only_identity(self):
        st = swarm([(500, 500), (530, 500)])
        g = graph_of(st.positions)
        fb = total_force(0, st, WORLD, g, RADII)
        assert np.array_equal(fb.f_total, fb.f_swarm)
        # f_swarm is the unit normalization of the zone mixture
        mix = fb.f_r + fb.f_o + fb.f_a
        assert np.allclose(fb.f_swarm, mix / math.hypot(*mix), atol=1e-15)

    def test_all_zero(self):
        st = swarm([(500, 500)])
        g = graph_of(st.positions)
        fb = total_force(0, st, WORLD, g, RADII)
        assert np.array_equal(fb.f_total, np.zeros(2))

    def test_component_sum_oracle(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            n = int(rng.integers(2, 15))
            st = swarm(rng.uniform(0, 1000, (n, 2)),
                       rng.uniform(-math.pi, math.pi, n))
            g = graph_of(st.positions)
            i = int(rng.integers(n))
            direction = unit_or_zero(rng.normal(size=2))
            weight = rng.uniform(0, 2)
            fb = total_force(i, st, WORLD, g, RADII, task_term=(direction, weight))
            assert np.array_equal(fb.f_total, fb.f_env + fb.f_swarm + fb.f_task)
            assert np.array_equal(fb.f_task, direction * weight)
            mix = fb.f_r + fb.f_o + fb.f_a
            norm = math.hypot(*mix)
            if norm > 0:
                assert np.allclose(fb.f_swarm, mix / norm, atol=1e-15)
                assert math.hypot(*fb.f_swarm) == pytest.approx(1.0)
            else:
                assert np.array_equal(fb.f_swarm, np.zeros(2))

    def test_bulk_matches_reference(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            n = int(rng.integers(2, 15))
            st = swarm(rng.uniform(0, 1000, (n, 2)),
                       rng.uniform(-math.pi, math.pi, n))
            g = graph_of(st.positions)
            task_dirs = rng.normal(size=(n, 2))
            task_vecs = np.array([unit_or_zero(v) for v in task_dirs]) * 0.5
            bulk = total_forces(st, WORLD, g, RADII, task_vecs)
            for i in range(n):
                fb = total_force(i, st, WORLD, g, RADII,
                                 task_term=(unit_or_zero(task_dirs[i]), 0.5))
                assert np.allclose(bulk[i], fb.f_total, atol=1e-15)


class TestStep:
    def test_straight_line_motion(self):
        st = swarm([(10, 10)], headings=[0.0], speed=2.0)
        out = step(st, np.zeros((1, 2)), WORLD, 0.3)
        assert np.allclose(out.positions[0], (12, 10))
        assert out.headings[0] == 0.0

    def test_turn_rate_cap_tie_counterclockwise(self):
        st = swarm([(500, 500)], headings=[0.0], speed=0.0)
        out = step(st, np.array([[-1.0, 0.0]]), WORLD, 0.3)
        assert out.headings[0] == pytest.approx(0.3)

    def test_small_turn_reaches_desired(self):
        st = swarm([(500, 500)], headings=[0.0], speed=0.0)
        out = step(st, np.array([[1.0, 0.1]]), WORLD, 0.3)
        assert out.headings[0] == pytest.approx(math.atan2(0.1, 1.0))

    def test_positions_stay_in_bounds(self):
        rng = np.random.default_rng(34)
        st = swarm(rng.uniform(0, 1000, (50, 2)),
                   rng.uniform(-math.pi, math.pi, 50), speed=50.0)
        out = st
        for _ in range(20):
            out = step(out, rng.normal(size=(50, 2)), WORLD, 0.5)
            assert np.all(out.positions >= 0)
            assert np.all(out.positions[:, 0] <= WORLD.width)
            assert np.all(out.positions[:, 1] <= WORLD.height)

    def test_overshoot_diagnostic(self):
        st = swarm([(999.5, 500)], headings=[0.0], speed=2.0)
        diag = Diagnostics()
        step(st, np.zeros((1, 2)), WORLD, 0.3, diagnostics=diag)
        assert diag.overshoot == 1

    def test_replay_bitwise_identical(self):
        rng = np.random.default_rng(35)
        for _ in range(200):
            n = int(rng.integers(1, 12))
            pos = rng.uniform(0, 1000, (n, 2))
            headings = rng.uniform(-math.pi, math.pi, n)
            forces = rng.normal(size=(n, 2))
            a = step(swarm(pos, headings), forces, WORLD, 0.3)
            b = step(swarm(pos, headings), forces, WORLD, 0.3)
            assert np.array_equal(a.positions, b.positions)
            assert np.array_equal(a.headings, b.headings)


class TestEquivariance:
    def test_translation_leaves_forces_unchanged(self):
        rng = np.random.default_rng(36)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            pos = rng.uniform(100, 300, (n, 2))
            headings = rng.uniform(-math.pi, math.pi, n)
            shift = rng.uniform(-50, 50, 2)
            st1, st2 = swarm(pos, headings), swarm(pos + shift, headings)
            g1, g2 = graph_of(st1.positions), graph_of(st2.positions)
            f1 = swarm_forces(g1, st1, RADII)
            f2 = swarm_forces(g2, st2, RADII)
            for a, b in zip(f1, f2):
                assert np.allclose(a, b, atol=1e-9)

    def test_rotation_rotates_forces(self):
        rng = np.random.default_rng(37)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            pos = rng.uniform(-100, 100, (n, 2))
            headings = rng.uniform(-math.pi, math.pi, n)
            alpha = rng.uniform(-math.pi, math.pi)
            c, s = math.cos(alpha), math.sin(alpha)
            rot = np.array([[c, -s], [s, c]])
            st1 = swarm(pos, headings)
            st2 = swarm(pos @ rot.T, headings + alpha)
            g1, g2 = graph_of(st1.positions), graph_of(st2.positions)
            f1 = swarm_forces(g1, st1, RADII)
            f2 = swarm_forces(g2, st2, RADII)
            for a, b in zip(f1, f2):
                assert np.allclose(a @ rot.T, b, atol=1e-9)

    def test_synchronous_update_order_free(self):
        # permuting agent indices permutes the outcome, nothing else
        rng = np.random.default_rng(38)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            pos = rng.uniform(0, 500, (n, 2))
            headings = rng.uniform(-math.pi, math.pi, n)
            perm = rng.permutation(n)
            st = swarm(pos, headings)
            stp = swarm(pos[perm], headings[perm])
            g, gp = graph_of(st.positions), graph_of(stp.positions)
            f = swarm_forces(g, st, RADII)
            fp = swarm_forces(gp, stp, RADII)
            for a, b in zip(f, fp):
                assert np.allclose(a[perm], b, atol=1e-12)
            out = step(st, f[0] + f[1] + f[2], WORLD, 0.3)
            outp = step(stp, fp[0] + fp[1] + fp[2], WORLD, 0.3)
            assert np.allclose(out.positions[perm], outp.positions, atol=1e-12)
            assert np.allclose(out.headings[perm], outp.headings, atol=1e-12)


class TestValidation:
    def test_radii_ordering_enforced(self):
        with pytest.raises(ValueError):
            RadiiConfig(10.0, 10.0, 40.0)
        with pytest.raises(ValueError):
            RadiiConfig(0.0, 20.0, 40.0)

    def test_swarm_norm_ranges(self):
        rng = np.random.default_rng(39)
        for _ in range(100):
            n = int(rng.integers(2, 15))
            st = swarm(rng.uniform(0, 100, (n, 2)),
                       rng.uniform(-math.pi, math.pi, n))
            g = graph_of(st.positions)
            f_r, f_o, f_a = swarm_forces(g, st, RADII)
            total = f_r + f_o + f_a
            norms = np.hypot(total[:, 0], total[:, 1])
            assert np.all(norms <= 3.0 + 1e-12)

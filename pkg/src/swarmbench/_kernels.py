"""Compiled inner loops for graph construction, zone forces, and graph stats.

Every kernel mirrors the arithmetic of the corresponding reference operation
exactly (same expressions, same evaluation order) so both paths produce
identical adjacency/force values, including at zone and range boundaries.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def metric_adjacency(pos, d_met):
    n = pos.shape[0]
    adj = np.zeros((n, n), dtype=np.bool_)
    lim = d_met * d_met
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            if dx * dx + dy * dy <= lim:
                adj[i, j] = True
                adj[j, i] = True
    return adj


@njit(cache=True)
def topological_adjacency(pos, k):
    n = pos.shape[0]
    adj = np.zeros((n, n), dtype=np.bool_)
    kk = k if k < n - 1 else n - 1
    if kk <= 0:
        return adj
    d2 = np.empty(n)
    taken = np.empty(n, dtype=np.bool_)
    for i in range(n):
        for j in range(n):
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            d2[j] = dx * dx + dy * dy
            taken[j] = False
        taken[i] = True
        # repeated min scan; strict < keeps the lowest index on ties
        for _ in range(kk):
            best = -1
            best_d = np.inf
            for j in range(n):
                if not taken[j] and d2[j] < best_d:
                    best_d = d2[j]
                    best = j
            taken[best] = True
            adj[i, best] = True
    return adj


@njit(cache=True)
def _segment_blocked(ax, ay, dx, dy, length_sq, i, j, occ_xy, occ_r2, occ_skip):
    for m in range(occ_xy.shape[0]):
        sk = occ_skip[m]
        if sk == i or sk == j:
            continue
        cx = occ_xy[m, 0]
        cy = occ_xy[m, 1]
        t = ((cx - ax) * dx + (cy - ay) * dy) / length_sq
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        ex = ax + t * dx - cx
        ey = ay + t * dy - cy
        if ex * ex + ey * ey < occ_r2[m]:
            return True
    return False


@njit(cache=True)
def visual_adjacency(pos, cos_h, sin_h, d_vis, cos_phi, occ_xy, occ_r2, occ_skip):
    n = pos.shape[0]
    adj = np.zeros((n, n), dtype=np.bool_)
    lim = d_vis * d_vis
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            d2 = dx * dx + dy * dy
            if d2 >= lim:
                continue
            d = np.sqrt(d2)
            fov_ij = dx * cos_h[i] + dy * sin_h[i] >= d * cos_phi
            fov_ji = -dx * cos_h[j] - dy * sin_h[j] >= d * cos_phi
            if not (fov_ij or fov_ji):
                continue
            if d2 > 0.0 and _segment_blocked(
                    pos[i, 0], pos[i, 1], dx, dy, d2, i, j, occ_xy, occ_r2, occ_skip):
                continue
            if fov_ij:
                adj[i, j] = True
            if fov_ji:
                adj[j, i] = True
    return adj


@njit(cache=True)
def visual_target_links(pos, cos_h, sin_h, target, d_vis, cos_phi,
                        occ_xy, occ_r2, occ_skip):
    """Per-agent visibility of one extra (non-swarm) point under the visual rule."""
    n = pos.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    lim = d_vis * d_vis
    for i in range(n):
        dx = target[0] - pos[i, 0]
        dy = target[1] - pos[i, 1]
        d2 = dx * dx + dy * dy
        if d2 >= lim:
            continue
        d = np.sqrt(d2)
        if dx * cos_h[i] + dy * sin_h[i] < d * cos_phi:
            continue
        if d2 > 0.0 and _segment_blocked(
                pos[i, 0], pos[i, 1], dx, dy, d2, i, -2, occ_xy, occ_r2, occ_skip):
            continue
        out[i] = True
    return out


@njit(cache=True)
def topological_target_links(pos, target, k):
    """True for agents whose k nearest candidates (swarm plus target) include
    the target; distance ties go to the swarm agent."""
    n = pos.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        tx = target[0] - pos[i, 0]
        ty = target[1] - pos[i, 1]
        dt2 = tx * tx + ty * ty
        closer = 0
        for j in range(n):
            if j == i:
                continue
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            if dx * dx + dy * dy <= dt2:
                closer += 1
        if closer < k:
            out[i] = True
    return out


@njit(cache=True)
def zone_force_sums(pos, cos_h, sin_h, adj, r_r, r_o, r_a):
    """Raw repulsion/orientation/attraction sums per agent (before unit
    normalization), plus the list of coincident directed pairs whose repulsion
    direction must be drawn from the trial RNG by the caller."""
    n = pos.shape[0]
    rr2 = r_r * r_r
    ro2 = r_o * r_o
    ra2 = r_a * r_a
    f_r = np.zeros((n, 2))
    f_o = np.zeros((n, 2))
    f_a = np.zeros((n, 2))
    n_co = 0
    for i in range(n):
        for j in range(n):
            if adj[i, j]:
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                if dx * dx + dy * dy == 0.0:
                    n_co += 1
    coincident = np.empty((n_co, 2), dtype=np.int64)
    m = 0
    for i in range(n):
        for j in range(n):
            if not adj[i, j]:
                continue
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            d2 = dx * dx + dy * dy
            if d2 == 0.0:
                coincident[m, 0] = i
                coincident[m, 1] = j
                m += 1
            elif d2 < rr2:
                d = np.sqrt(d2)
                f_r[i, 0] -= dx / d
                f_r[i, 1] -= dy / d
            elif d2 < ro2:
                f_o[i, 0] += cos_h[j]
                f_o[i, 1] += sin_h[j]
            elif d2 < ra2:
                d = np.sqrt(d2)
                f_a[i, 0] += dx / d
                f_a[i, 1] += dy / d
    return f_r, f_o, f_a, coincident


@njit(cache=True)
def graph_snapshot_stats(adj):
    """Per-snapshot connectivity stats on the symmetrized graph.

    Returns (component_count, mean_clustering, isolated_count, labels) where
    labels[i] is the root agent index of i's weakly connected component.
    """
    n = adj.shape[0]
    sym = np.zeros((n, n), dtype=np.bool_)
    degree = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j] or adj[j, i]:
                sym[i, j] = True
                sym[j, i] = True
                degree[i] += 1
                degree[j] += 1

    parent = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            if sym[i, j]:
                ri = i
                while parent[ri] != ri:
                    parent[ri] = parent[parent[ri]]
                    ri = parent[ri]
                rj = j
                while parent[rj] != rj:
                    parent[rj] = parent[parent[rj]]
                    rj = parent[rj]
                if ri != rj:
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj
    labels = np.empty(n, dtype=np.int64)
    n_components = 0
    for i in range(n):
        r = i
        while parent[r] != r:
            r = parent[r]
        labels[i] = r
        if r == i:
            n_components += 1

    cc_sum = 0.0
    buf = np.empty(n, dtype=np.int64)
    for i in range(n):
        k = degree[i]
        if k < 2:
            continue
        m = 0
        for j in range(n):
            if sym[i, j]:
                buf[m] = j
                m += 1
        closed = 0
        for a in range(m):
            for b in range(a + 1, m):
                if sym[buf[a], buf[b]]:
                    closed += 1
        cc_sum += 2.0 * closed / (k * (k - 1.0))
    mean_clustering = cc_sum / n if n > 0 else 0.0

    isolated = 0
    for i in range(n):
        if degree[i] == 0:
            isolated += 1
    return n_components, mean_clustering, isolated, labels


@njit(cache=True)
def mean_pairwise_distance(pos):
    n = pos.shape[0]
    if n < 2:
        return 0.0
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            total += np.sqrt(dx * dx + dy * dy)
    return total / (n * (n - 1) / 2.0)

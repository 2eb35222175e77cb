"""Shared fixtures and independent oracle helpers."""

import numpy as np
import pytest

from markedpoints import LinearNetwork, MarkedPoint, MarkedPointPattern, PlanarWindow


@pytest.fixture
def unit_square():
    return PlanarWindow(0.0, 1.0, 0.0, 1.0)


def random_connected_network(rng, n_vertices, extra_edge_prob=0.3):
    """Random connected network: random spanning tree plus a few chords."""
    pts = rng.uniform(0.0, 10.0, size=(n_vertices, 2))
    edges = set()
    order = rng.permutation(n_vertices)
    for i in range(1, n_vertices):
        a = int(order[i])
        b = int(order[rng.integers(0, i)])
        edges.add((min(a, b), max(a, b)))
    for a in range(n_vertices):
        for b in range(a + 1, n_vertices):
            if (a, b) not in edges and rng.uniform() < extra_edge_prob:
                edges.add((a, b))
    return LinearNetwork(pts, sorted(edges))


def shortest_path_by_enumeration(net, source, target):
    """Min over all simple vertex paths, summing edge lengths from the source.

    Independent of the package Dijkstra; summation runs in path order so a
    matching optimal path accumulates the same floats.
    """
    lengths = {}
    for k, (a, b) in enumerate(net.segments):
        w = float(net.seg_lengths[k])
        lengths[(int(a), int(b))] = w
        lengths[(int(b), int(a))] = w
    adj = {v: [] for v in range(net.n_vertices)}
    for (a, b), w in lengths.items():
        adj[a].append(b)

    best = [np.inf]

    def dfs(u, acc, visited):
        if acc >= best[0]:
            return
        if u == target:
            best[0] = acc
            return
        for v in adj[u]:
            if v not in visited:
                visited.add(v)
                dfs(v, acc + lengths[(u, v)], visited)
                visited.remove(v)

    dfs(source, 0.0, {source})
    return best[0]


def planar_pattern(window, xy, marks=None, labels=None):
    pts = []
    for i, (x, y) in enumerate(xy):
        pts.append(
            MarkedPoint(
                (float(x), float(y)),
                None if labels is None else labels[i],
                None if marks is None else float(marks[i]),
            )
        )
    return MarkedPointPattern(window, pts)

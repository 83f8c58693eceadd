"""Brute-force reference implementations used by the tests.

Nothing here shares code with the package: graphs are rebuilt from the raw
distance table and every closure is computed the slow way.
"""
from __future__ import annotations

import math

import numpy as np

from chainchaos.system import make_finite_system


def random_system(rng: np.random.Generator, n_max: int = 12, n_min: int = 1):
    """Random points in the unit square (sup metric) with 1-3 successors each."""
    n = int(rng.integers(n_min, n_max + 1))
    pts = rng.random((n, 2)).round(3)
    dist = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    succ = [sorted(set(rng.integers(0, n, rng.integers(1, 4)).tolist())) for _ in range(n)]
    return make_finite_system(range(n), dist, succ)


def delta_edges(dist: np.ndarray, succ, delta: float):
    n = len(succ)
    return [[q for q in range(n) if min(dist[r][q] for r in succ[p]) <= delta + 1e-12] for p in range(n)]


def closure(edges):
    """``R[p][q]`` iff a path of length >= 1 leads from p to q (Warshall)."""
    n = len(edges)
    R = [[q in edges[p] for q in range(n)] for p in range(n)]
    for k in range(n):
        for i in range(n):
            if R[i][k]:
                for j in range(n):
                    if R[k][j]:
                        R[i][j] = True
    return R


def recurrent_and_classes(edges):
    R = closure(edges)
    n = len(edges)
    rec = {v for v in range(n) if R[v][v]}
    classes = set()
    for v in rec:
        classes.add(tuple(sorted(u for u in rec if (R[v][u] and R[u][v]) or u == v)))
    return rec, classes, R


def pair_chain_meet(edges, x, y, limit):
    """Equal-length chains from x and y ending at a common vertex, searched
    breadth-first up to ``limit`` steps."""
    frontier = {(x, y)}
    seen = set(frontier)
    for _ in range(limit + 1):
        if any(a == b for a, b in frontier):
            return True
        nxt = {(a2, b2) for a, b in frontier for a2 in edges[a] for b2 in edges[b]} - seen
        if not nxt:
            return False
        seen |= nxt
        frontier = nxt
    return False


def brute_chain_proximal(dist, succ, delta):
    edges = delta_edges(dist, succ, delta)
    n = len(succ)
    return all(pair_chain_meet(edges, x, y, n * n) for x in range(n) for y in range(n))


def cycle_gcd(edges, comp):
    """gcd of closed walk lengths up to ``2 * len(comp)`` through comp[0] and
    all vertices (enough to pin the period of a small strongly connected set)."""
    members = set(comp)
    n = len(comp)
    g = 0
    for v in comp:
        cur = {v}
        for length in range(1, 2 * n + 1):
            cur = {w for u in cur for w in edges[u] if w in members}
            if v in cur:
                g = math.gcd(g, length)
    return g


def word_distance(a, b):
    return max((2.0 ** -(i + 1) * abs(float(x) - float(y)) for i, (x, y) in enumerate(zip(a, b))), default=0.0)

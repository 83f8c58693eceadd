"""delta-transition graphs and their chain structure.

Vertex ``p`` has an edge to ``q`` when ``q`` lies within ``delta`` of some
exact successor of ``p``; paths are then exactly the delta-chains of the
system.  Strongly connected components with a cycle are the chain classes.
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NotAComponent, NotStronglyConnected
from .system import FiniteSystem

EDGE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransitionGraph:
    delta: float
    edges: tuple
    system: FiniteSystem

    @property
    def n(self) -> int:
        return len(self.edges)

    def reverse(self) -> tuple:
        rev = self.__dict__.get("_rev")
        if rev is None:
            lists = [[] for _ in range(self.n)]
            for p, out in enumerate(self.edges):
                for q in out:
                    lists[q].append(p)
            rev = tuple(tuple(r) for r in lists)
            object.__setattr__(self, "_rev", rev)
        return rev

    def has_self_loop(self, v: int) -> bool:
        out = self.edges[v]
        i = np.searchsorted(out, v)
        return i < len(out) and out[i] == v


def build_delta_graph(system: FiniteSystem, delta: float) -> TransitionGraph:
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    edges = []
    cut = delta + EDGE_TOL
    for p in range(system.n):
        succ = system.succ[p]
        near = system.row(succ[0])
        for r in succ[1:]:
            near = np.minimum(near, system.row(r))
        edges.append(tuple(int(q) for q in np.flatnonzero(near <= cut)))
    return TransitionGraph(float(delta), tuple(edges), system)


def strongly_connected(n: int, neighbors: Callable[[int], Iterable[int]]) -> list:
    """Iterative Tarjan.  Components come out in reverse topological order
    (sinks first), each as a sorted tuple."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list = []
    comps: list = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, iter(neighbors(root)))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(neighbors(w))))
                    advanced = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))
    return comps


def _sccs(graph: TransitionGraph) -> list:
    cached = graph.__dict__.get("_sccs")
    if cached is None:
        cached = strongly_connected(graph.n, graph.edges.__getitem__)
        object.__setattr__(graph, "_sccs", cached)
    return cached


def _is_cyclic(graph: TransitionGraph, comp: tuple) -> bool:
    return len(comp) > 1 or graph.has_self_loop(comp[0])


def chain_recurrent(graph: TransitionGraph) -> frozenset:
    """Vertices lying on a cycle of the graph."""
    return frozenset(v for comp in _sccs(graph) if _is_cyclic(graph, comp) for v in comp)


def forward_reach(edges: Sequence, sources: Iterable[int]) -> np.ndarray:
    seen = np.zeros(len(edges), dtype=bool)
    queue = deque()
    for s in sources:
        if not seen[s]:
            seen[s] = True
            queue.append(s)
    while queue:
        v = queue.popleft()
        for w in edges[v]:
            if not seen[w]:
                seen[w] = True
                queue.append(w)
    return seen


@dataclass(frozen=True, eq=False)
class ChainStructure:
    """Chain classes of one delta-graph; ``comp_of[v]`` is -1 off the
    recurrent set.  ``stable_flags[c]`` lists the ``(probe_delta, eps)``
    pairs at which component ``c`` was found stable."""

    delta: float
    graph: TransitionGraph
    cr_set: frozenset
    components: tuple
    comp_of: tuple
    periods: tuple
    order: frozenset
    stable_flags: tuple = field(default=())

    def component_of(self, v: int) -> int:
        return self.comp_of[v]

    def reaches(self, a: int, b: int) -> bool:
        return (a, b) in self.order

    def maximal(self) -> tuple:
        """Components that reach no other component (the top of the order)."""
        return tuple(a for a in range(len(self.components)) if not any(
            (a, b) in self.order for b in range(len(self.components)) if b != a))


def delta_components(graph: TransitionGraph) -> ChainStructure:
    comps = sorted((c for c in _sccs(graph) if _is_cyclic(graph, c)), key=lambda c: c[0])
    comp_of = [-1] * graph.n
    for k, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = k
    order = set()
    for a, comp in enumerate(comps):
        seen = forward_reach(graph.edges, comp)
        for b, other in enumerate(comps):
            if seen[other[0]]:
                order.add((a, b))
    periods = tuple(component_period(graph, c) for c in comps)
    return ChainStructure(
        graph.delta, graph, frozenset(v for c in comps for v in c), tuple(comps),
        tuple(comp_of), periods, frozenset(order),
    )


def reach_order(graph: TransitionGraph, A: Iterable[int], B: Iterable[int]) -> bool:
    """True iff some vertex of ``A`` delta-reaches some vertex of ``B``."""
    A, B = list(A), list(B)
    if set(A) & set(B):
        return True
    seen = forward_reach(graph.edges, A)
    return bool(seen[B].any())


def component_period(graph: TransitionGraph, C: Sequence[int]) -> int:
    """gcd of cycle lengths inside ``C`` via BFS levels."""
    C = list(C)
    if not C:
        raise NotAComponent("empty vertex set")
    members = set(C)
    level = {C[0]: 0}
    queue = deque([C[0]])
    while queue:
        v = queue.popleft()
        for w in graph.edges[v]:
            if w in members and w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    if len(level) != len(members):
        raise NotStronglyConnected(f"{len(members) - len(level)} vertices unreachable inside the set")
    rev = graph.reverse()
    back = {C[0]}
    queue.append(C[0])
    while queue:
        v = queue.popleft()
        for w in rev[v]:
            if w in members and w not in back:
                back.add(w)
                queue.append(w)
    if len(back) != len(members):
        raise NotStronglyConnected("set is not strongly connected")
    g = 0
    for v in C:
        for w in graph.edges[v]:
            if w in members:
                g = math.gcd(g, level[v] + 1 - level[w])
    if g == 0:
        raise NotStronglyConnected("set carries no cycle")
    return g


# --- stability ---------------------------------------------------------------

@dataclass(frozen=True)
class StabilityResult:
    structure: ChainStructure
    eps: float
    probe_delta: float
    flags: tuple
    escape: tuple  # per component: farthest distance to C reached from C

    @property
    def stable(self) -> tuple:
        return tuple(k for k, f in enumerate(self.flags) if f)


def _distance_to_set(system: FiniteSystem, members: Sequence[int], targets: np.ndarray) -> float:
    if not len(targets):
        return 0.0
    best = np.full(len(targets), np.inf)
    for c in members:
        best = np.minimum(best, system.row(c)[targets])
    return float(best.max())


def chain_stable_components(system: FiniteSystem, delta: float, eps: float,
                            probe_delta: float | None = None,
                            structure: ChainStructure | None = None) -> StabilityResult:
    """Flag each delta-component whose forward chain-reachable set stays
    within ``eps`` of it.  Reachability is taken in the ``probe_delta``
    graph (default: ``delta`` itself)."""
    if eps < delta:
        warnings.warn(f"eps={eps} < delta={delta}: stability is only meaningful for eps >= delta", stacklevel=2)
    if structure is None:
        structure = delta_components(build_delta_graph(system, delta))
    probe = delta if probe_delta is None else probe_delta
    probe_graph = structure.graph if probe == structure.delta else build_delta_graph(system, probe)
    flags, escape = [], []
    for comp in structure.components:
        reached = np.flatnonzero(forward_reach(probe_graph.edges, comp))
        far = _distance_to_set(system, comp, reached)
        escape.append(far)
        flags.append(far <= eps + EDGE_TOL)
    stamped = tuple(((probe, eps),) if f else () for f in flags)
    structure = ChainStructure(
        structure.delta, structure.graph, structure.cr_set, structure.components,
        structure.comp_of, structure.periods, structure.order, stamped,
    )
    return StabilityResult(structure, eps, probe, tuple(flags), tuple(escape))


def verify_every_point_reaches_stable(system: FiniteSystem, delta: float, eps: float,
                                      probe_delta: float | None = None):
    """Return ``(ok, witness)`` where ``witness[v]`` is the index of a stable
    component reachable from ``v`` (the nearest in path length), or ``None``."""
    res = chain_stable_components(system, delta, eps, probe_delta)
    graph = res.structure.graph
    rev = graph.reverse()
    witness: list = [None] * graph.n
    queue = deque()
    for k in res.stable:
        for v in res.structure.components[k]:
            if witness[v] is None:
                witness[v] = k
                queue.append(v)
    while queue:
        v = queue.popleft()
        for w in rev[v]:
            if witness[w] is None:
                witness[w] = witness[v]
                queue.append(w)
    return all(w is not None for w in witness), tuple(witness)


def component_scan(system: FiniteSystem, deltas: Iterable[float]) -> list:
    """``(delta, component count, recurrent size)`` along a delta scan; the
    finite stand-in for intersecting the chain classes over delta."""
    out = []
    for d in deltas:
        s = delta_components(build_delta_graph(system, d))
        out.append((float(d), len(s.components), len(s.cr_set)))
    return out


def format_structure(res: StabilityResult) -> str:
    s = res.structure
    lines = [f"delta = {s.delta!r}", f"eps = {res.eps!r}", f"probe_delta = {res.probe_delta!r}",
             f"recurrent = {len(s.cr_set)}", f"components = {len(s.components)}",
             "id\tsize\tperiod\tstable\tescape\tfirst"]
    for k, comp in enumerate(s.components):
        first = s.graph.system.labels[comp[0]]
        lines.append(f"{k}\t{len(comp)}\t{s.periods[k]}\t{int(res.flags[k])}\t{res.escape[k]!r}\t{_label(first)}")
    pairs = sorted(p for p in s.order if p[0] != p[1])
    lines.append("order = " + " ".join(f"{a}<{b}" for a, b in pairs))
    return "\n".join(lines) + "\n"


def _label(lab) -> str:
    if isinstance(lab, tuple):
        return ",".join(_label(a) for a in lab)
    from fractions import Fraction

    if isinstance(lab, Fraction):
        from .symbolic import _format_letter

        return _format_letter(lab)
    return repr(lab) if isinstance(lab, float) else str(lab)

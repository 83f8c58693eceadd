"""Pair-level chain analysis on the synchronous square of a delta-graph.

Vertex ``(p, q)`` of the product is stored as ``p * n + q``.  Small products
are materialized as a sparse matrix and analysed with vectorized fixpoint
sweeps; above ``product_cap`` the same questions are answered on implicit
edges with plain graph searches.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import NotAComponent
from .graph import (
    EDGE_TOL,
    TransitionGraph,
    build_delta_graph,
    chain_stable_components,
    component_period,
    forward_reach,
    strongly_connected,
)
from .system import FiniteSystem

PRODUCT_CAP = 4_000_000
EDGE_CAP = 40_000_000
DENSE_CAP = 3000


class ProductGraph:
    def __init__(self, base: TransitionGraph, product_cap: int = PRODUCT_CAP, dense_cap: int = DENSE_CAP):
        self.base = base
        n = self.n = base.n
        self.diag = np.arange(n) * (n + 1)
        degree_sum = sum(len(e) for e in base.edges)
        self.matrix = None
        self._adj = None
        if n * n <= product_cap and degree_sum**2 <= EDGE_CAP:
            rows = np.repeat(np.arange(n), [len(e) for e in base.edges])
            cols = np.fromiter((q for e in base.edges for q in e), dtype=np.int64, count=degree_sum)
            adj = sparse.csr_matrix((np.ones(degree_sum, dtype=np.int8), (rows, cols)), shape=(n, n))
            self.matrix = sparse.kron(adj, adj, format="csr")
        elif n <= dense_cap:
            # too many product edges to store; pair steps become adj @ R @ adj.T
            self._adj = np.zeros((n, n), dtype=np.float32)
            for p, e in enumerate(base.edges):
                self._adj[p, list(e)] = 1.0
        self._dist = None

    @property
    def materialized(self) -> bool:
        return self.matrix is not None

    def dist(self) -> np.ndarray:
        if self._dist is None:
            self._dist = np.asarray(self.base.system.matrix()).ravel()
        return self._dist

    def out(self, v: int) -> list:
        n, e = self.n, self.base.edges
        p, q = divmod(v, n)
        return [a * n + b for a in e[p] for b in e[q]]

    def into(self, v: int) -> list:
        n, r = self.n, self.base.reverse()
        p, q = divmod(v, n)
        return [a * n + b for a in r[p] for b in r[q]]

    # -- generic queries -----------------------------------------------------

    def backward_reach(self, targets: np.ndarray, allowed: np.ndarray | None = None) -> np.ndarray:
        """Mask of vertices with a path (inside ``allowed``) into ``targets``."""
        reach = targets.copy()
        if allowed is not None:
            reach &= allowed
        if self.materialized:
            m = self.matrix
            while True:
                hit = np.maximum.reduceat(reach[m.indices], m.indptr[:-1])
                new = reach | hit
                if allowed is not None:
                    new &= allowed
                if (new == reach).all():
                    return reach
                reach = new
        if self._adj is not None:
            a, n = self._adj, self.n
            while True:
                hit = (a @ reach.reshape(n, n).astype(np.float32) @ a.T).ravel() > 0
                new = reach | hit
                if allowed is not None:
                    new &= allowed
                if (new == reach).all():
                    return reach
                reach = new
        queue = deque(np.flatnonzero(reach).tolist())
        while queue:
            v = queue.popleft()
            for w in self.into(v):
                if not reach[w] and (allowed is None or allowed[w]):
                    reach[w] = True
                    queue.append(w)
        return reach

    def max_reachable(self, values: np.ndarray) -> np.ndarray:
        """``out[v]`` = max of ``values`` over everything reachable from ``v``."""
        if self.materialized:
            m = self.matrix
            cur = values.copy()
            while True:
                new = np.maximum(cur, np.maximum.reduceat(cur[m.indices], m.indptr[:-1]))
                if (new == cur).all():
                    return cur
                cur = new
        best = values.copy()
        # Tarjan emits sinks first, so successors' components are final
        for comp in strongly_connected(self.n * self.n, self.out):
            members = set(comp)
            top = max(best[v] for v in comp)
            for v in comp:
                for w in self.out(v):
                    if w not in members and best[w] > top:
                        top = best[w]
            for v in comp:
                best[v] = top
        return best

    def cyclic_vertices(self, allowed: np.ndarray) -> np.ndarray:
        """Mask of vertices lying on a cycle inside ``allowed``."""
        N = self.n * self.n
        mask = np.zeros(N, dtype=bool)
        idx = np.flatnonzero(allowed)
        if not len(idx):
            return mask
        if self.materialized:
            sub = self.matrix[idx][:, idx]
            _, labels = csgraph.connected_components(sub, directed=True, connection="strong")
            sizes = np.bincount(labels)
            loops = sub.diagonal() > 0
            mask[idx] = (sizes[labels] > 1) | loops
            return mask
        keep = set(idx.tolist())
        lookup = {v: k for k, v in enumerate(idx.tolist())}
        comps = strongly_connected(len(idx), lambda k: [lookup[w] for w in self.out(int(idx[k])) if w in keep])
        for comp in comps:
            verts = [int(idx[k]) for k in comp]
            if len(verts) > 1 or verts[0] in self.out(verts[0]):
                mask[verts] = True
        return mask

    def find_cycle(self, allowed: np.ndarray, start: int) -> list:
        """A cycle through ``start`` inside ``allowed`` (start must be cyclic)."""
        parent = {start: None}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self.out(v):
                if w == start:
                    path = [v]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1]
                if allowed[w] and w not in parent:
                    parent[w] = v
                    queue.append(w)
        return []


def _product(system: FiniteSystem, delta: float, product_cap: int) -> ProductGraph:
    return ProductGraph(build_delta_graph(system, delta), product_cap)


def chain_proximal_at(system: FiniteSystem, delta: float, product_cap: int = PRODUCT_CAP) -> bool:
    """Every ordered pair admits equal-length delta-chains ending at a common point."""
    pg = _product(system, delta, product_cap)
    target = np.zeros(pg.n * pg.n, dtype=bool)
    target[pg.diag] = True
    return bool(pg.backward_reach(target).all())


def chain_proximal_structural(system: FiniteSystem, delta: float, eps: float, probe_delta=None) -> bool:
    res = chain_stable_components(system, delta, eps, probe_delta)
    if len(res.stable) != 1:
        return False
    k = res.stable[0]
    if res.structure.periods[k] != 1:
        return False
    graph = res.structure.graph
    comp = res.structure.components[k]
    seen = np.zeros(graph.n, dtype=bool)
    seen[list(comp)] = True
    rev = graph.reverse()
    back = forward_reach(rev, comp)
    return bool(back.all())


@dataclass(frozen=True)
class SensitivityResult:
    per_vertex: tuple
    global_e: float


def chain_sensitivity_radius(system: FiniteSystem, delta: float, product_cap: int = PRODUCT_CAP) -> SensitivityResult:
    """For each x the largest separation two equal-length delta-chains from x
    can reach; the global radius is the minimum over x."""
    pg = _product(system, delta, product_cap)
    best = pg.max_reachable(pg.dist().copy())
    per = best[pg.diag]
    return SensitivityResult(tuple(float(v) for v in per), float(per.min()) if len(per) else 0.0)


def property_s_holds(system: FiniteSystem, delta: float, tau: float,
                     product_cap: int = PRODUCT_CAP, _pg: ProductGraph | None = None) -> bool:
    """Every pair can reach a product cycle staying strictly farther apart than ``tau``."""
    pg = _pg or _product(system, delta, product_cap)
    far = pg.dist() > tau + EDGE_TOL
    cyc = pg.cyclic_vertices(far)
    if not cyc.any():
        return False
    return bool(pg.backward_reach(cyc).all())


def property_s_radius(system: FiniteSystem, delta: float, product_cap: int = PRODUCT_CAP) -> float:
    """Largest realized pairwise distance at which :func:`property_s_holds`,
    or 0.0 when it holds at none."""
    pg = _product(system, delta, product_cap)
    levels = np.unique(pg.dist())
    levels = levels[levels > 0]
    lo, hi, found = 0, len(levels) - 1, 0.0
    while lo <= hi:
        mid = (lo + hi) // 2
        if property_s_holds(system, delta, float(levels[mid]), _pg=pg):
            found = float(levels[mid])
            lo = mid + 1
        else:
            hi = mid - 1
    return found


@dataclass(frozen=True)
class DistalWitness:
    pair: tuple          # (x index, y index)
    cycle: tuple         # pairs visited, ending where it started (multivalued) or the orbit (single-valued)
    min_distance: float


def _orbit_pair_min(system: FiniteSystem, a: int, b: int):
    seen = {}
    path = []
    state = (a, b)
    while state not in seen:
        seen[state] = len(path)
        path.append(state)
        state = (system.succ[state[0]][0], system.succ[state[1]][0])
    return min(system.dist(p, q) for p, q in path), path


def distal_pair_in_component(system: FiniteSystem, C, threshold: float, delta: float = 0.0,
                             structure=None, product_cap: int = PRODUCT_CAP):
    """A pair of ``C`` whose synchronized evolution stays farther apart than
    ``threshold``, or ``None``.

    Single-valued systems follow exact orbits (whose pair orbit is eventually
    periodic); multivalued ones look for a delta-product cycle inside
    ``C x C`` avoiding the closed ``threshold``-neighbourhood of the diagonal.
    """
    C = tuple(sorted(C))
    if not C:
        raise NotAComponent("empty component")
    if structure is not None and C not in structure.components:
        raise NotAComponent(f"{C[:5]}... is not a component of the structure")
    if len(C) == 1:
        return None
    if system.is_single_valued:
        for a in C:
            for b in C:
                if a == b:
                    continue
                m, path = _orbit_pair_min(system, a, b)
                if m > threshold + EDGE_TOL:
                    return DistalWitness((a, b), tuple(path), m)
        return None
    pg = _product(system, delta, product_cap)
    n = pg.n
    inside = np.zeros(n, dtype=bool)
    inside[list(C)] = True
    allowed = np.outer(inside, inside).ravel() & (pg.dist() > threshold + EDGE_TOL)
    cyc = pg.cyclic_vertices(allowed)
    hits = np.flatnonzero(cyc)
    if not len(hits):
        return None
    start = int(hits[0])
    cycle = pg.find_cycle(allowed, start)
    pairs = tuple(divmod(v, n) for v in cycle)
    m = min(system.dist(p, q) for p, q in pairs)
    return DistalWitness(pairs[0], pairs, m)


def replay_witness(system: FiniteSystem, w: DistalWitness, threshold: float, delta: float = 0.0) -> bool:
    """Re-check a witness edge by edge."""
    if any(system.dist(p, q) <= threshold + EDGE_TOL for p, q in w.cycle):
        return False
    if system.is_single_valued:
        nxt = [(system.succ[p][0], system.succ[q][0]) for p, q in w.cycle]
        return nxt[:-1] == list(w.cycle[1:]) and nxt[-1] in w.cycle
    g = build_delta_graph(system, delta)
    ring = list(w.cycle) + [w.cycle[0]]
    return all(b[0] in g.edges[a[0]] and b[1] in g.edges[a[1]] for a, b in zip(ring, ring[1:]))


# --- verdicts --------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    delta: float
    eps: float
    tau: float
    chain_proximal: bool
    unique_stable: bool
    stable_singleton: bool
    stable_mixing: bool
    sensitivity_e: float
    property_s_e: float
    property_s_at_tau: bool
    distal_pair_found: bool
    distal_witness: DistalWitness | None
    thm11_route1: bool
    thm11_route2: bool
    thm11_class: str
    thm12_route1: bool
    thm12_route2: bool
    thm12_class: str
    discrepancies: tuple = field(default=())


def _classify(proximal: bool, r1: bool, r2: bool, yes: str, no: str) -> str:
    if not proximal:
        return "no-chaos"
    if r1 != r2:
        return "discrepancy"
    return yes if r1 else no


def theorem_verdict(system: FiniteSystem, delta: float, eps: float, tau: float | None = None,
                    probe_delta: float | None = None, product_cap: int = PRODUCT_CAP) -> Verdict:
    """Evaluate both routes of each characterization at one finite scale.

    ``tau`` is the separation a distal cycle must keep (default: half the
    diameter); sensitivity counts only when it beats ``2 * eps``, the
    resolution of the stability probe.
    """
    if tau is None:
        tau = system.diam / 2
    res = chain_stable_components(system, delta, eps, probe_delta)
    stable = res.stable
    unique = len(stable) == 1
    comp = res.structure.components[stable[0]] if unique else ()
    singleton = unique and len(comp) == 1
    mixing = unique and res.structure.periods[stable[0]] == 1
    proximal = chain_proximal_at(system, delta, product_cap)
    sens = chain_sensitivity_radius(system, delta, product_cap).global_e
    ps_e = property_s_radius(system, delta, product_cap)
    ps_tau = property_s_holds(system, delta, tau, product_cap)
    witness = distal_pair_in_component(system, comp, tau, delta, product_cap=product_cap) if unique else None

    t11_1 = proximal and sens > 2 * eps
    t11_2 = proximal and unique and not singleton
    t12_1 = proximal and ps_tau
    t12_2 = proximal and unique and witness is not None
    notes = []
    if t11_1 != t11_2:
        notes.append(f"thm11 routes differ: sensitivity_e={sens!r} vs stable component size {len(comp)}")
    if t12_1 != t12_2:
        notes.append(f"thm12 routes differ: property S at tau={tau!r} is {ps_tau}, distal witness {witness is not None}")
    return Verdict(
        float(delta), float(eps), float(tau), proximal, unique, singleton, mixing, sens, ps_e, ps_tau,
        witness is not None, witness, t11_1, t11_2, _classify(proximal, t11_1, t11_2, "guC-predicted", "gC-fails"),
        t12_1, t12_2, _classify(proximal, t12_1, t12_2, "guDC1-predicted", "gDC1-fails"), tuple(notes),
    )


VERDICT_FIELDS = (
    "delta", "eps", "tau", "chain_proximal", "unique_stable", "stable_singleton", "stable_mixing",
    "sensitivity_e", "property_s_e", "property_s_at_tau", "distal_pair_found",
    "thm11_route1", "thm11_route2", "thm11_class", "thm12_route1", "thm12_route2", "thm12_class",
)


def format_verdict(v: Verdict, system: FiniteSystem | None = None) -> str:
    lines = [f"{name} = {getattr(v, name)!r}" for name in VERDICT_FIELDS]
    if v.distal_witness is not None:
        w = v.distal_witness
        lines.append("[distal_witness]")
        lines.append(f"min_distance = {w.min_distance!r}")
        for p, q in w.cycle:
            if system is not None:
                lines.append(f"{_word(system.labels[p])} ~ {_word(system.labels[q])}")
            else:
                lines.append(f"{p} ~ {q}")
    if v.discrepancies:
        lines.append("[discrepancies]")
        lines.extend(v.discrepancies)
    return "\n".join(lines) + "\n"


def _word(label) -> str:
    from .graph import _label

    return _label(label)


def restrict(system: FiniteSystem, vertices) -> FiniteSystem:
    """Induced subsystem on ``vertices`` (successors outside are dropped)."""
    from .system import DenseMetric, make_finite_system

    verts = sorted(vertices)
    pos = {v: k for k, v in enumerate(verts)}
    succ = [[pos[w] for w in system.succ[v] if w in pos] for v in verts]
    mat = np.asarray(system.matrix())[np.ix_(verts, verts)]
    return make_finite_system([system.labels[v] for v in verts], DenseMetric(mat), succ,
                              name=f"{system.name}|{len(verts)}")


# --- transitive, aperiodic, proximal three-way check -------------------------

@dataclass(frozen=True)
class TransitiveReport:
    applicable: bool
    aperiodic: bool = False
    product_transitive: bool = False
    proximal: bool = False

    @property
    def coincide(self) -> bool:
        return self.aperiodic == self.product_transitive == self.proximal


def lemma_3_1_equivalence_check(system: FiniteSystem, delta: float,
                                product_cap: int = PRODUCT_CAP) -> TransitiveReport:
    """For a chain transitive graph compare aperiodicity, transitivity of the
    square, and chain proximality.  ``applicable`` is False otherwise."""
    g = build_delta_graph(system, delta)
    if not forward_reach(g.edges, [0]).all() or not forward_reach(g.reverse(), [0]).all():
        return TransitiveReport(False)
    aperiodic = component_period(g, range(g.n)) == 1
    pg = ProductGraph(g, product_cap)
    N = pg.n * pg.n
    if pg.materialized:
        ncomp, _ = csgraph.connected_components(pg.matrix, directed=True, connection="strong")
        transitive = ncomp == 1
    else:
        transitive = len(strongly_connected(N, pg.out)) == 1
    target = np.zeros(N, dtype=bool)
    target[pg.diag] = True
    proximal = bool(pg.backward_reach(target).all())
    return TransitiveReport(True, aperiodic, bool(transitive), proximal)


# --- finite probes for regional proximality and sensitivity -------------------

def sensitivity_probe(system: FiniteSystem, x: int, e: float, delta: float = 0.0, horizon: int | None = None) -> bool:
    """Two equal-length delta-chains from ``x`` reach separation > ``e``."""
    g = build_delta_graph(system, delta)
    horizon = horizon or system.n * system.n
    frontier = {(x, x)}
    seen = set(frontier)
    for _ in range(horizon):
        nxt = set()
        for p, q in frontier:
            for a in g.edges[p]:
                for b in g.edges[q]:
                    if (a, b) not in seen:
                        if system.dist(a, b) > e:
                            return True
                        seen.add((a, b))
                        nxt.add((a, b))
        if not nxt:
            return False
        frontier = nxt
    return False


def regional_proximality_probe(system: FiniteSystem, x: int, y: int, eps: float, horizon: int = 64) -> bool:
    """Points ``z, w`` within ``eps`` of ``x, y`` and a time ``i`` with the
    exact orbits of ``z`` and ``w`` within ``eps`` of each other."""
    near_x = np.flatnonzero(system.row(x) <= eps + EDGE_TOL)
    near_y = np.flatnonzero(system.row(y) <= eps + EDGE_TOL)
    for z in near_x:
        for w in near_y:
            frontier = {(int(z), int(w))}
            seen = set()
            for _ in range(horizon):
                if any(system.dist(p, q) <= eps + EDGE_TOL for p, q in frontier):
                    return True
                seen |= frontier
                frontier = {(a, b) for p, q in frontier for a in system.succ[p] for b in system.succ[q]} - seen
                if not frontier:
                    break
    return False

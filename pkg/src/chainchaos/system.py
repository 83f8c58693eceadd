"""Finite discretized dynamical systems and the discretizers producing them.

A :class:`FiniteSystem` is a finite point set with a metric and a
*successor-set* map.  Single-valued maps have singleton successor sets;
truncating a shift space to a window of ``L`` letters produces genuinely
multivalued successors, since the letter that scrolls into view is unknown.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateGrid,
    EmptyShift,
    EmptySuccessor,
    ExplodedStateSpace,
    MetricViolation,
    ParamFlavorMismatch,
)
from .symbolic import as_letter, membership

METRIC_TOL = 1e-12
DENSE_LIMIT = 6000


class DenseMetric:
    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        m.setflags(write=False)
        self.matrix = m

    def row(self, i):
        return self.matrix[i]

    def pairs(self, I, J):
        return self.matrix[I, J]

    def diameter(self):
        return float(self.matrix.max()) if self.matrix.size else 0.0


class WeightedSupMetric:
    """``d(p, q) = max_c weights[c] * |coords[p, c] - coords[q, c]|``.

    Covers the windowed shift metric (weights ``base^-i``), grids on [0, 1]
    (one coordinate of weight 1) and max-products of both.
    """

    def __init__(self, coords, weights):
        self.coords = np.array(coords, dtype=float)
        self.weights = np.array(weights, dtype=float)
        self.coords.setflags(write=False)
        self.weights.setflags(write=False)

    def row(self, i):
        return (np.abs(self.coords - self.coords[i]) * self.weights).max(axis=1)

    def pairs(self, I, J):
        return (np.abs(self.coords[I] - self.coords[J]) * self.weights).max(axis=1)

    def diameter(self):
        if not len(self.coords):
            return 0.0
        spread = self.coords.max(axis=0) - self.coords.min(axis=0)
        return float((spread * self.weights).max())


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    labels: tuple
    succ: tuple
    metric: object
    diam: float
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.labels)

    def dist(self, i: int, j: int) -> float:
        return float(self.metric.pairs(np.array([i]), np.array([j]))[0])

    def row(self, i: int) -> np.ndarray:
        return self.metric.row(i)

    def matrix(self) -> np.ndarray:
        if isinstance(self.metric, DenseMetric):
            return self.metric.matrix
        if self.n > DENSE_LIMIT:
            raise MemoryError(f"{self.n} points is too many for a dense distance matrix")
        cached = self.__dict__.get("_matrix")
        if cached is None:
            cached = np.vstack([self.row(i) for i in range(self.n)]) if self.n else np.zeros((0, 0))
            cached.setflags(write=False)
            object.__setattr__(self, "_matrix", cached)
        return cached

    @property
    def is_single_valued(self) -> bool:
        return all(len(s) == 1 for s in self.succ)

    def index(self, label) -> int:
        lookup = self.__dict__.get("_index")
        if lookup is None:
            lookup = {lab: i for i, lab in enumerate(self.labels)}
            object.__setattr__(self, "_index", lookup)
        return lookup[label]

    def __repr__(self):
        return f"FiniteSystem({self.name or 'anonymous'}, n={self.n}, diam={self.diam:g})"


def _check_metric(metric, n, tol, seed):
    if n == 0:
        return
    if n <= DENSE_LIMIT:
        # symmetry and the zero diagonal are cheap to check in full
        rows = np.vstack([metric.row(i) for i in range(n)]) if not isinstance(metric, DenseMetric) else metric.matrix
        if rows.shape != (n, n):
            raise MetricViolation(f"distance table has shape {rows.shape}, expected {(n, n)}")
        if (rows < 0).any():
            i, j = np.argwhere(rows < 0)[0]
            raise MetricViolation(f"negative distance d({i},{j})", (int(i), int(j), int(j)))
        diag = np.abs(np.diag(rows))
        if (diag > tol).any():
            i = int(np.argmax(diag))
            raise MetricViolation(f"d({i},{i}) = {diag[i]} != 0", (i, i, i))
        asym = np.abs(rows - rows.T)
        if (asym > tol).any():
            i, j = np.unravel_index(np.argmax(asym), asym.shape)
            raise MetricViolation(f"d({i},{j}) != d({j},{i})", (int(i), int(j), int(i)))
    if n**3 <= 100_000:
        m = rows
        # slack[i, k, j] = d(i,k) + d(k,j) - d(i,j)
        slack = m[:, :, None] + m[None, :, :] - m[:, None, :]
        bad = np.argwhere(slack < -tol)
        if len(bad):
            i, k, j = (int(v) for v in bad[0])
            raise MetricViolation(f"triangle inequality fails for ({i}, {j}) via {k}", (i, j, k))
        return
    rng = np.random.default_rng(seed)
    count = 100_000
    I, J, K = (rng.integers(0, n, count) for _ in range(3))
    dij = metric.pairs(I, J)
    dik = metric.pairs(I, K)
    dkj = metric.pairs(K, J)
    bad = np.nonzero(dij > dik + dkj + tol)[0]
    if len(bad):
        b = bad[0]
        raise MetricViolation(
            f"triangle inequality fails for ({I[b]}, {J[b]}) via {K[b]}", (int(I[b]), int(J[b]), int(K[b]))
        )


def make_finite_system(labels, dist_oracle, succ_table, *, name="", tol=METRIC_TOL, seed=0) -> FiniteSystem:
    """Validate and freeze a finite system.

    ``dist_oracle`` may be a callable ``(i, j) -> float``, a square matrix, or
    an already built metric object.  The triangle inequality is checked
    exhaustively when ``n**3 <= 1e5`` and on 1e5 seeded random triples
    otherwise.
    """
    labels = tuple(labels)
    n = len(labels)
    succ = []
    for i, s in enumerate(succ_table):
        s = tuple(sorted(set(int(v) for v in s)))
        if not s:
            raise EmptySuccessor(f"point {i} ({labels[i] if i < n else '?'}) has no successor")
        if s[0] < 0 or s[-1] >= n:
            raise EmptySuccessor(f"point {i} has out-of-range successors {s}")
        succ.append(s)
    if len(succ) != n:
        raise EmptySuccessor(f"successor table has {len(succ)} rows for {n} points")

    if isinstance(dist_oracle, (DenseMetric, WeightedSupMetric)):
        metric = dist_oracle
    elif callable(dist_oracle):
        metric = DenseMetric([[dist_oracle(i, j) for j in range(n)] for i in range(n)])
    else:
        metric = DenseMetric(dist_oracle)
    _check_metric(metric, n, tol, seed)
    return FiniteSystem(labels, tuple(succ), metric, metric.diameter(), name)


# --- interval maps ---------------------------------------------------------

INTERVAL_MAPS: dict[str, Callable[[float], float]] = {
    "identity": lambda t: t,
    "square": lambda t: t * t,
    "zero": lambda t: 0.0,
    "tent": lambda t: 1.0 - abs(2.0 * t - 1.0),
    "logistic": lambda t: 4.0 * t * (1.0 - t),
}


def snap_to_grid(value: float, grid_n: int) -> int:
    """Nearest index of the uniform grid ``k/(grid_n-1)``; ties go down."""
    v = min(max(value, 0.0), 1.0) * (grid_n - 1)
    return int(min(max(math.ceil(v - 0.5), 0), grid_n - 1))


def discretize_interval_map(map_descriptor, grid_n: int) -> FiniteSystem:
    if grid_n < 2:
        raise DegenerateGrid(f"grid_n={grid_n} < 2")
    f = INTERVAL_MAPS[map_descriptor] if isinstance(map_descriptor, str) else map_descriptor
    pts = [k / (grid_n - 1) for k in range(grid_n)]
    succ = [(snap_to_grid(f(t), grid_n),) for t in pts]
    metric = WeightedSupMetric(np.array(pts)[:, None], [1.0])
    name = map_descriptor if isinstance(map_descriptor, str) else getattr(f, "__name__", "map")
    return make_finite_system(pts, metric, succ, name=f"interval:{name}:{grid_n}")


def discretize_skew_product(base: FiniteSystem, fiber, grid_n: int, name="") -> FiniteSystem:
    """Max-product of ``base`` with a grid on [0, 1].

    ``fiber(label, t)`` returns the candidate fiber images of ``t`` over the
    base point ``label``; each is snapped to the grid and paired with every
    base successor.
    """
    if grid_n < 2:
        raise DegenerateGrid(f"grid_n={grid_n} < 2")
    if not isinstance(base.metric, WeightedSupMetric):
        raise TypeError("skew products need a coordinate metric on the base")
    grid = [k / (grid_n - 1) for k in range(grid_n)]
    labels, coords, succ = [], [], []
    for b, lab in enumerate(base.labels):
        for k, t in enumerate(grid):
            labels.append((lab, t))
            coords.append(np.append(base.metric.coords[b], t))
            ks = sorted({snap_to_grid(v, grid_n) for v in fiber(lab, t)})
            succ.append([b2 * grid_n + k2 for b2 in base.succ[b] for k2 in ks])
    metric = WeightedSupMetric(np.array(coords), np.append(base.metric.weights, 1.0))
    return make_finite_system(labels, metric, succ, name=name or f"{base.name}x[0,1]:{grid_n}")


# --- subshifts ---------------------------------------------------------------

@dataclass(frozen=True)
class SubshiftRule:
    alphabet: tuple
    order: int
    admissible: Callable[[tuple], bool]
    weight_base: int = 2
    name: str = ""

    def __post_init__(self):
        alpha = tuple(as_letter(a) for a in self.alphabet)
        if len(set(alpha)) != len(alpha):
            raise ValueError("alphabet values must be pairwise distinct")
        if any(abs(a) > 1 for a in alpha):
            raise ValueError("alphabet values must lie in [-1, 1]")
        object.__setattr__(self, "alphabet", alpha)


@dataclass(frozen=True)
class ExampleParams:
    s: tuple = ()
    k_max: int = 0
    window: int = 3
    delta_seq: tuple = ()
    eps_seq: tuple = ()
    grid_n: int = 11

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(as_letter(v) for v in self.s))
        for seq_name in ("delta_seq", "eps_seq"):
            seq = getattr(self, seq_name)
            if any(a <= 0 for a in seq) or any(b >= a for a, b in zip(seq, seq[1:])):
                raise ParamFlavorMismatch(f"{seq_name} must be positive and strictly decreasing")

    @property
    def s_trunc(self) -> tuple:
        return self.s[: self.k_max] if self.k_max else self.s

    def check_flavor(self, flavor: str):
        s = self.s_trunc
        if any(not 0 < v < 1 for v in s):
            raise ParamFlavorMismatch("s_k must lie in (0, 1)")
        pairs = list(zip(s, s[1:]))
        if flavor == "increasing" and not all(a < b for a, b in pairs):
            raise ParamFlavorMismatch("this example needs 0 < s_1 < s_2 < ... < 1")
        if flavor == "decreasing" and not all(a > b for a, b in pairs):
            raise ParamFlavorMismatch("this example needs 1 > s_1 > s_2 > ... > 0")


def rule_for(example_id: str, s: Sequence = ()) -> SubshiftRule:
    """Windowed admissibility rule of a catalog subshift."""
    s = tuple(as_letter(v) for v in s)
    one, zero = Fraction(1), Fraction(0)
    if example_id in ("fullshift", "ex41"):
        alphabet, order = (zero, one), 1
    elif example_id == "ex41-xinf":
        alphabet, order = (zero, one), 2
    elif example_id in ("ex43", "ex44"):
        alphabet = tuple(sorted({-one, one} | set(s) | {-v for v in s}))
        order = len(s) + 1
    elif example_id == "ex45":
        alphabet = tuple(sorted({zero} | set(s) | {-v for v in s}))
        order = 2
    else:
        from .errors import UnknownExample

        raise UnknownExample(example_id)
    return SubshiftRule(alphabet, order, lambda w, _id=example_id, _s=s: membership(w, _id, _s), 2, example_id)


def admissible_words(rule: SubshiftRule, length: int, cap: int = 2_000_000) -> list:
    """All admissible words of ``length``, in lexicographic alphabet order.

    Relies on admissibility being closed under prefixes, so inadmissible
    prefixes are pruned.
    """
    words = [()]
    for _ in range(length):
        nxt = []
        for w in words:
            for a in rule.alphabet:
                v = w + (a,)
                if rule.admissible(v):
                    nxt.append(v)
                    if len(nxt) > cap:
                        raise ExplodedStateSpace(f"more than {cap} admissible words of length {length}")
        words = nxt
    return words


def discretize_subshift(rule: SubshiftRule, window: int, cap: int = 2_000_000) -> FiniteSystem:
    if window < rule.order:
        raise ValueError(f"window {window} shorter than the rule order {rule.order}")
    words = admissible_words(rule, window, cap)
    if not words:
        raise EmptyShift(f"no admissible word of length {window}")
    index = {w: i for i, w in enumerate(words)}
    succ = []
    for w in words:
        tail = w[1:]
        succ.append([index[tail + (a,)] for a in rule.alphabet if tail + (a,) in index])
    coords = np.array([[float(a) for a in w] for w in words])
    weights = [float(rule.weight_base) ** -(i + 1) for i in range(window)]
    return make_finite_system(words, WeightedSupMetric(coords, weights), succ, name=f"{rule.name}:L{window}")


# --- plain-text formats ------------------------------------------------------

def export_edge_list(system: FiniteSystem) -> str:
    """``i j dist`` for every unordered pair, then ``i -> j`` successor lines."""
    lines = [f"# {system.name} n={system.n} diam={float(system.diam)!r}"]
    for i in range(system.n):
        row = system.row(i)
        lines.extend(f"{i} {j} {float(row[j])!r}" for j in range(i + 1, system.n))
    for i, s in enumerate(system.succ):
        lines.extend(f"{i} -> {j}" for j in s)
    return "\n".join(lines) + "\n"


def load_edge_list(text: str) -> FiniteSystem:
    entries, succ_pairs, n = {}, [], 0
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "->" in line:
            a, b = (int(v) for v in line.split("->"))
            succ_pairs.append((a, b))
            n = max(n, a + 1, b + 1)
        else:
            a, b, d = line.split()
            entries[int(a), int(b)] = float(d)
            n = max(n, int(a) + 1, int(b) + 1)
    m = np.zeros((n, n))
    for (a, b), d in entries.items():
        m[a, b] = m[b, a] = d
    succ = [[] for _ in range(n)]
    for a, b in succ_pairs:
        succ[a].append(b)
    return make_finite_system(range(n), m, succ)


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; lists are comma separated."""
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out

"""The example systems with their default parameters, samplers and the
structural facts each one is expected to exhibit at finite scale."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ParamFlavorMismatch, UnknownExample
from .symbolic import SkewState, SymbolicPoint, as_letter, membership
from .system import (
    ExampleParams,
    FiniteSystem,
    WeightedSupMetric,
    admissible_words,
    discretize_skew_product,
    discretize_subshift,
    make_finite_system,
    rule_for,
)

EXAMPLE_IDS = ("ex41", "ex42", "ex43", "ex44", "ex45", "fullshift")

_INCREASING = tuple(Fraction(2**k - 1, 2**k) for k in range(1, 9))   # 1/2, 3/4, 7/8, ...
_DECREASING = tuple(Fraction(1, 2**k) for k in range(1, 9))           # 1/2, 1/4, 1/8, ...

DEFAULTS = {
    "ex41": ExampleParams(window=5),
    "ex42": ExampleParams(window=4, grid_n=11),
    "ex43": ExampleParams(s=_INCREASING[:3], k_max=3, window=6),
    "ex44": ExampleParams(s=_INCREASING[:3], k_max=3, window=5),
    "ex45": ExampleParams(s=_DECREASING[:3], k_max=3, window=4),
    "fullshift": ExampleParams(window=3),
}
FLAVOR = {"ex43": "increasing", "ex44": "increasing", "ex45": "decreasing"}

# probe scale (delta, eps) of the chain analysis and the scramble separation
PROBES = {
    "ex41": (0.0, 2.0**-6, 0.125),
    "ex42": (0.1, 0.2, 0.125),
    "ex43": (0.0, 2.0**-7, 0.0625),
    "ex44": (0.0, 2.0**-6, 0.25),
    "ex45": (0.0, 2.0**-6, 0.0625),
    "fullshift": (0.0, 2.0**-4, 0.25),
}


# --- the letter-doubling map on windows ------------------------------------------

def ex41_window_system(L: int, xinf: bool = False) -> FiniteSystem:
    """Length-``L`` windows of ``sigma o pi``.  A window holding a one fixes
    the image window; ``0^L`` may be followed by either letter."""
    words = list(itertools.product((0, 1), repeat=L))
    if xinf:
        words = [w for w in words if sum(w) <= 1]
    index = {w: i for i, w in enumerate(words)}
    succ = []
    for w in words:
        doubled = tuple(b for a in w for b in ((1, 0) if a else (0,)))[1:]
        if len(doubled) >= L:
            cands = [doubled[:L]]
        else:
            cands = [doubled + (a,) for a in (0, 1)]
        succ.append([index[c] for c in cands if c in index])
    coords = np.array(words, dtype=float)
    weights = [2.0 ** -(i + 1) for i in range(L)]
    labels = [tuple(Fraction(a) for a in w) for w in words]
    name = f"ex41{'-xinf' if xinf else ''}:L{L}"
    return make_finite_system(labels, WeightedSupMetric(coords, weights), succ, name=name)


def ex42_system(L: int, grid_n: int) -> FiniteSystem:
    base = ex41_window_system(L)

    def fiber(word, t):
        lo = 1 + sum(float(a) * 2.0 ** -(i + 1) for i, a in enumerate(word))
        return (t**lo, t ** (lo + 2.0**-L))

    return discretize_skew_product(base, fiber, grid_n, name=f"ex42:L{L}:g{grid_n}")


# --- bundles ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExampleBundle:
    id: str
    params: ExampleParams
    system: FiniteSystem | None
    map_id: str
    probe_delta: float
    probe_eps: float
    scramble_delta: float
    prefix_len: int = 4

    @property
    def s(self) -> tuple:
        return self.params.s_trunc

    def member(self, word) -> bool:
        if self.id in ("ex41", "ex42", "fullshift"):
            return all(a in (0, 1) for a in word)
        return membership(word, self.id, self.s)

    @property
    def alphabet(self) -> tuple:
        if self.id in ("ex41", "ex42", "fullshift"):
            return (Fraction(0), Fraction(1))
        return rule_for(self.id, self.s).alphabet

    def sample(self, rng: np.random.Generator, kind: str = "uniform", N: int = 1000):
        """A random pair of points.

        ``uniform``: independent uniform admissible prefixes of length
        ``prefix_len`` with an absorbing tail.  ``zk``: uniform prefixes
        followed by alternating far/near blocks inside the innermost
        ``Y_k`` analog, the pattern that makes a pair distributionally
        scrambled.  Examples without a distal block pattern fall back to
        ``uniform``.
        """
        if kind == "uniform" or (kind == "zk" and self.id in ("ex41", "ex42")):
            x, y = self._uniform(rng), self._uniform(rng)
            if self.id == "ex42":
                return SkewState(x, float(rng.random())), SkewState(y, float(rng.random()))
            return x, y
        if kind == "zk":
            return self._blocks(rng, N)
        raise ValueError(f"unknown sampler {kind!r}")

    # -- samplers ---------------------------------------------------------------

    def _tail_letter(self, word):
        if self.id in ("ex41", "ex42", "fullshift"):
            return Fraction(0)
        if self.id == "ex43":
            return Fraction(-1)
        return word[-1]

    def _uniform(self, rng) -> SymbolicPoint:
        words = _prefixes(self, self.prefix_len)
        order = self.params.k_max + 2
        for _ in range(1000):
            w = words[rng.integers(len(words))]
            tail = self._tail_letter(w)
            if self.member(w + (tail,) * order):
                return SymbolicPoint(w, (tail,))
        raise RuntimeError("no admissible prefix found")

    def _block_units(self):
        """(x far, y far, x near, y near) letter units."""
        if self.id == "fullshift":
            z, o = Fraction(0), Fraction(1)
            return (z,), (o,), (z,), (z,)
        K = self.params.k_max
        if self.id == "ex43":
            c = self.s[-1]
            return (-c,), (c,) + (-c,) * K, (-c,), (-c,)
        if self.id == "ex44":
            c = self.s[-1]
            return (-c,), (c,), (c,), (c,)
        if self.id == "ex45":
            c = self.s[-1]
            return (-c,), (c,), (c,), (c,)
        raise ValueError(f"no block pattern for {self.id}")

    def _blocks(self, rng, N: int):
        from .scramble import block_schedule

        xf, yf, xn, yn = self._block_units()
        m = self.prefix_len
        check = self.params.k_max + 2
        xs = _compatible_prefixes(self, m, xf[:1] * check)
        ys = _compatible_prefixes(self, m, yf * check)
        px, py = xs[rng.integers(len(xs))], ys[rng.integers(len(ys))]
        cuts = block_schedule(N, m)
        total = N + 64
        xl, yl = list(px), list(py)
        start, far = m, True
        for end in cuts:
            ux, uy = (xf, yf) if far else (xn, yn)
            span = end - start
            xl += (ux * (span // len(ux) + 1))[:span]
            yl += (uy * (span // len(uy) + 1))[:span]
            start, far = end, not far
            if start >= total:
                break
        x = SymbolicPoint(tuple(xl[:total]), xn)
        y = SymbolicPoint(tuple(yl[:total]), yn)
        return x, y


def _prefixes(bundle: ExampleBundle, m: int) -> list:
    return _prefix_cache(bundle.id, bundle.s, m)


@lru_cache(maxsize=None)
def _prefix_cache(example_id: str, s: tuple, m: int) -> list:
    if example_id in ("ex41", "ex42", "fullshift"):
        return [tuple(Fraction(a) for a in w) for w in itertools.product((0, 1), repeat=m)]
    return admissible_words(rule_for(example_id, s), m)


def _compatible_prefixes(bundle: ExampleBundle, m: int, follow: tuple) -> list:
    out = [w for w in _prefixes(bundle, m) if bundle.member(w + follow)]
    if not out:
        raise RuntimeError(f"no prefix of length {m} can precede the block pattern")
    return out


def build_example(example_id: str, params: ExampleParams | None = None, with_system: bool = True) -> ExampleBundle:
    if example_id not in EXAMPLE_IDS:
        raise UnknownExample(example_id)
    params = DEFAULTS[example_id] if params is None else params
    if example_id in FLAVOR:
        if not params.s_trunc:
            raise ParamFlavorMismatch(f"{example_id} needs a nonempty s sequence")
        params.check_flavor(FLAVOR[example_id])
    system = None
    if with_system:
        system = _system_cache(example_id, params.s_trunc, params.window, params.grid_n)
    map_id = {"ex41": "ex41", "ex42": "ex42"}.get(example_id, "shift")
    d, e, sd = PROBES[example_id]
    return ExampleBundle(example_id, params, system, map_id, d, e, sd)


@lru_cache(maxsize=32)
def _system_cache(example_id, s, window, grid_n) -> FiniteSystem:
    if example_id == "ex41":
        return ex41_window_system(window)
    if example_id == "ex42":
        return ex42_system(window, grid_n)
    return discretize_subshift(rule_for(example_id, s), window)


def params_from_config(example_id: str, cfg: dict) -> ExampleParams:
    """Override the defaults with ``k_max``, ``window``, ``s_k``, ``grid_n`` keys."""
    base = DEFAULTS[example_id]
    kw = {}
    if "s_k" in cfg or "s" in cfg:
        raw = cfg.get("s_k", cfg.get("s"))
        kw["s"] = tuple(as_letter(v) for v in (raw.split(",") if isinstance(raw, str) else raw))
    for key in ("k_max", "window", "grid_n"):
        if key in cfg:
            kw[key] = int(cfg[key])
    if "k_max" in kw and "s" not in kw and FLAVOR.get(example_id):
        pool = _INCREASING if FLAVOR[example_id] == "increasing" else _DECREASING
        kw["s"] = pool[: kw["k_max"]]
    return replace(base, **kw)


# --- golden facts ---------------------------------------------------------------------

@dataclass(frozen=True)
class Fact:
    claim: str
    statement: str
    expected: object


@dataclass(frozen=True)
class FactResult:
    claim: str
    expected: object
    observed: object

    @property
    def ok(self) -> bool:
        return self.expected == self.observed


_FACTS = {
    "ex41": (
        Fact("chain_proximal", "every pair is chain proximal (the map is proximal)", True),
        Fact("thm11_class", "generic uniform Li-Yorke chaos predicted by both routes", "guC-predicted"),
        Fact("property_s_at_half_diam", "no pair keeps a half-diameter separation along chains", False),
        Fact("xinf_chain_proximal", "the windowed limit set is chain proximal at delta = 2^(1-L)", True),
        Fact("dc2_fraction_le_eta", "sampled DC2 density stays at most eta (no DC2 pairs)", True),
    ),
    "ex42": (
        Fact("fixed_fiber", "the map fixes (0^inf, t) for every t on a grid", True),
        Fact("single_component", "one chain class at the probe scale", True),
        Fact("thm11_class", "generic uniform Li-Yorke chaos predicted by both routes", "guC-predicted"),
        Fact("dc1_fraction_zero", "no sampled pair is DC1", True),
    ),
    "ex43": (
        Fact("components", "k_max + 1 chain classes: the X_k analogs and the limit class", 4),
        Fact("unique_stable_nonsingleton", "exactly one stable class and it is not a point", True),
        Fact("every_point_reaches_stable", "every point chain-reaches a stable class", True),
        Fact("chain_proximal", "every pair is chain proximal", True),
        Fact("thm11_class", "generic uniform Li-Yorke chaos predicted by both routes", "guC-predicted"),
        Fact("thm12_class", "generic DC1 fails at half-diameter separation", "gDC1-fails"),
        Fact("xinf_distal_absent", "the limit class carries no distal pair at half-diameter separation", True),
        Fact("xk_thm12_class", "each X_k analog alone is guDC1 by both routes", "guDC1-predicted"),
        Fact("dc1_fraction_ge_quarter", "sampled Z_k pairs are DC1 with density at least 1/4", True),
        Fact("limit_shadow_consistent", "a snapped limit-pseudo-orbit is tracked ever more closely", True),
    ),
    "ex44": (
        Fact("components", "k_max + 1 chain classes", 4),
        Fact("unique_stable_nonsingleton", "exactly one stable class and it is not a point", True),
        Fact("every_point_reaches_stable", "every point chain-reaches a stable class", True),
        Fact("chain_proximal", "every pair is chain proximal", True),
        Fact("thm11_class", "generic uniform Li-Yorke chaos predicted by both routes", "guC-predicted"),
        Fact("thm12_class", "generic uniform DC1 predicted by both routes", "guDC1-predicted"),
        Fact("distal_witness_constant", "the distal witness is the pair of constant words -1 and 1", True),
    ),
    "ex45": (
        Fact("components", "k_max + 1 chain classes", 4),
        Fact("stable_singleton", "the unique stable class is the all-zero point", True),
        Fact("every_point_reaches_stable", "every point chain-reaches a stable class", True),
        Fact("chain_proximal", "every pair is chain proximal", True),
        Fact("thm11_class", "generic Li-Yorke chaos fails", "gC-fails"),
        Fact("dc1_fraction_ge_quarter", "sampled Z_k pairs are DC1 with density at least 1/4", True),
    ),
    "fullshift": (
        Fact("components", "a single chain class", 1),
        Fact("period", "the class is chain mixing (period 1)", 1),
        Fact("transitive_equivalence", "aperiodic, square transitive and chain proximal all hold", (True, True, True)),
        Fact("thm12_class", "generic uniform DC1 predicted by both routes", "guDC1-predicted"),
        Fact("shadow_4delta", "100/100 random pseudo-orbits are shadowed at 4 delta", True),
        Fact("block_pair_dc1", "the alternating-block pair is DC1", True),
    ),
}


def golden_facts(example_id: str) -> tuple:
    if example_id not in _FACTS:
        raise UnknownExample(example_id)
    return _FACTS[example_id]


class _Context:
    """Lazily computed analyses shared between the facts of one example."""

    def __init__(self, bundle: ExampleBundle, seed: int):
        self.b, self.seed = bundle, seed
        self._cache: dict = {}

    def get(self, key, fn: Callable):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def stability(self):
        from .graph import chain_stable_components

        b = self.b
        return self.get("stab", lambda: chain_stable_components(b.system, b.probe_delta, b.probe_eps))

    @property
    def verdict(self):
        from .chaos import theorem_verdict

        b = self.b
        return self.get("verdict", lambda: theorem_verdict(b.system, b.probe_delta, b.probe_eps))


def xk_subsystems(bundle: ExampleBundle) -> list:
    """``(k, subsystem, tau)`` for each X_k analog of ex43: the induced
    system on the component whose words use only ``+-s_k``, with ``tau``
    just below the separation ``s_k 2^-k`` of the distal pair
    ``((-s_k)^inf, (s_k (-s_k)^k)^inf)``."""
    from .chaos import restrict

    st = bundle_structure(bundle)
    out = []
    for k, sk in enumerate(bundle.s, start=1):
        comp = next(c for c in st.components if abs(bundle.system.labels[c[0]][0]) == sk)
        tau = float(sk) * 2.0**-k * (1 - 2.0**-4)
        out.append((k, restrict(bundle.system, comp), tau))
    return out


def bundle_structure(bundle: ExampleBundle):
    from .graph import build_delta_graph, delta_components

    return delta_components(build_delta_graph(bundle.system, bundle.probe_delta))


def _fact_value(claim: str, ctx: _Context):
    from . import chaos, graph, scramble, shadowing

    b = ctx.b
    v = lambda: ctx.verdict
    if claim == "components":
        return len(ctx.stability.structure.components)
    if claim == "unique_stable_nonsingleton":
        st = ctx.stability
        return len(st.stable) == 1 and len(st.structure.components[st.stable[0]]) > 1
    if claim == "stable_singleton":
        return v().unique_stable and v().stable_singleton
    if claim == "every_point_reaches_stable":
        return graph.verify_every_point_reaches_stable(b.system, b.probe_delta, b.probe_eps)[0]
    if claim == "chain_proximal":
        return v().chain_proximal
    if claim == "thm11_class":
        return v().thm11_class
    if claim == "thm12_class":
        return v().thm12_class
    if claim == "property_s_at_half_diam":
        return v().property_s_at_tau
    if claim == "xinf_chain_proximal":
        L = b.params.window
        return chaos.chain_proximal_at(ex41_window_system(L, xinf=True), 2.0 ** (1 - L))
    if claim == "xinf_distal_absent":
        st = ctx.stability
        comp = st.structure.components[st.stable[0]]
        return chaos.distal_pair_in_component(b.system, comp, b.system.diam / 2, b.probe_delta) is None
    if claim == "xk_thm12_class":
        classes = {chaos.theorem_verdict(sub, 0.0, 2.0**-8, tau=tau).thm12_class for _, sub, tau in xk_subsystems(b)}
        return classes.pop() if len(classes) == 1 else "mixed:" + ",".join(sorted(classes))
    if claim == "distal_witness_constant":
        w = v().distal_witness
        if w is None:
            return False
        words = {tuple(b.system.labels[i]) for i in w.pair}
        L = b.params.window
        return words == {(Fraction(-1),) * L, (Fraction(1),) * L}
    if claim == "dc2_fraction_le_eta":
        rep = scramble.sample_pair_density(b.id, b.params, "uniform", 100, 10**5, b.scramble_delta, seed=ctx.seed)
        return rep.fractions["DC2"] <= 0.05
    if claim == "dc1_fraction_ge_quarter":
        rep = scramble.sample_pair_density(b.id, b.params, "zk", 200, 5000, b.scramble_delta, seed=ctx.seed)
        return rep.fractions["DC1"] >= 0.25
    if claim == "dc1_fraction_zero":
        rep = scramble.sample_pair_density(b.id, b.params, "uniform", 20, 2000, b.scramble_delta, seed=ctx.seed)
        return rep.fractions["DC1"] == 0.0
    if claim == "fixed_fiber":
        from .symbolic import skew_step

        z = SymbolicPoint.constant(0)
        return all(skew_step(SkewState(z, k / 20)).t == k / 20 and skew_step(SkewState(z, k / 20)).x == z
                   for k in range(21))
    if claim == "single_component":
        return len(ctx.stability.structure.components) == 1
    if claim == "period":
        return ctx.stability.structure.periods[0]
    if claim == "transitive_equivalence":
        r = chaos.lemma_3_1_equivalence_check(b.system, b.probe_delta)
        return (r.aperiodic, r.product_transitive, r.proximal)
    if claim == "shadow_4delta":
        rows = shadowing.shadow_batch(2.0**-8, 500, 100, ctx.seed)
        return all(ok for _, ok, _ in rows)
    if claim == "block_pair_dc1":
        x, y = scramble.alternating_block_pair(10**4)
        return scramble.profile(x, y, "shift", 10**4, delta=0.25).is_dc1
    if claim == "limit_shadow_consistent":
        pos = tuple(itertools.islice(shadowing.gap_positions("triangular"), 300))
        x = shadowing.limit_candidate(pos, 10**4 + 200)
        rep = shadowing.limit_shadow_check(x, shadowing.SnappedOrbit(pos), (10**2, 10**3, 10**4))
        decreasing = all(a > c for a, c in zip(rep.deviations, rep.deviations[1:]))
        return rep.consistent and decreasing
    raise KeyError(claim)


def evaluate_facts(example_id: str, params: ExampleParams | None = None, seed: int = 1) -> list:
    bundle = build_example(example_id, params)
    ctx = _Context(bundle, seed)
    return [FactResult(f.claim, f.expected, _fact_value(f.claim, ctx)) for f in golden_facts(example_id)]

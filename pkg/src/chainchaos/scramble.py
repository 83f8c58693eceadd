"""Finite-horizon statistics of orbit distances and scrambled-pair verdicts.

For a pair ``(x, y)`` the series ``d_i = d(f^i x, f^i y)`` is computed for
``i < N``.  The lower and upper densities of ``{i : d_i < t}`` are estimated
by the minimum and maximum of the running fractions over ``n`` in
``[B, N]``.
"""
from __future__ import annotations

import contextlib
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadThresholds, UnknownMap
from .symbolic import SkewState, SymbolicPoint, ex41_map, shift, skew_step, sym_distance

MAP_IDS = ("shift", "ex41", "ex42")


@dataclass(frozen=True)
class DistanceSeries:
    values: np.ndarray
    exact: bool  # the pair orbit was seen to close up, so all limits are known


def _float_letters(p: SymbolicPoint, n: int) -> np.ndarray:
    pre = np.array([float(a) for a in p.pre[:n]], dtype=float)
    if len(pre) >= n:
        return pre
    per = np.array([float(a) for a in p.period], dtype=float)
    reps = -(-(n - len(pre)) // len(per))
    return np.concatenate([pre, np.tile(per, reps)[: n - len(pre)]])


def _shift_series(x: SymbolicPoint, y: SymbolicPoint, N: int) -> DistanceSeries:
    # d_i = max(|x_{i+1} - y_{i+1}|, d_{i+1}) / 2, anchored at the exact d_N
    tail = float(sym_distance(shift(x, N), shift(y, N)))
    gaps = np.abs(_float_letters(x, N) - _float_letters(y, N))
    back = list(itertools.accumulate(gaps[::-1].tolist(), lambda acc, g: max(g, acc) * 0.5, initial=tail))
    values = np.array(back[::-1][:N])
    settle = max(len(x.pre), len(y.pre)) + math.lcm(len(x.period), len(y.period))
    return DistanceSeries(values, settle <= N)


def _ones(p: SymbolicPoint) -> tuple:
    return tuple(i + 1 for i, a in enumerate(p.pre) if a == 1)


def _ex41_ones_step(ones: tuple) -> tuple:
    # the k-th one (0-based) gains k letters from the doubling, then loses one to the shift
    return tuple(q for q in (p + k - 1 for k, p in enumerate(ones)) if q >= 1)


def _ones_distance(a: tuple, b: tuple) -> float:
    diff = set(a).symmetric_difference(b)
    return 2.0 ** -min(diff) if diff else 0.0


def _ex41_series(x: SymbolicPoint, y: SymbolicPoint, N: int) -> DistanceSeries:
    if x.is_finitely_supported and y.is_finitely_supported:
        a, b = _ones(x), _ones(y)
        out = np.zeros(N)
        for i in range(N):
            if not a and not b:
                return DistanceSeries(out, True)
            out[i] = _ones_distance(a, b)
            a, b = _ex41_ones_step(a), _ex41_ones_step(b)
        return DistanceSeries(out, not a and not b)
    out = np.zeros(N)
    seen = set()
    exact = False
    for i in range(N):
        if (x, y) in seen:
            exact = True
        seen.add((x, y))
        out[i] = float(sym_distance(x, y))
        x, y = ex41_map(x), ex41_map(y)
    return DistanceSeries(out, exact)


def _ex42_series(x: SkewState, y: SkewState, N: int) -> DistanceSeries:
    out = np.zeros(N)
    zero = SymbolicPoint.constant(0)
    for i in range(N):
        dx = float(sym_distance(x.x, y.x))
        out[i] = max(dx, abs(x.t - y.t))
        if x.x == zero and y.x == zero:
            out[i + 1:] = out[i]
            return DistanceSeries(out, True)
        x, y = skew_step(x), skew_step(y)
    return DistanceSeries(out, False)


def distance_series(x, y, map_id: str, N: int) -> DistanceSeries:
    if N < 1:
        raise ValueError("N must be at least 1")
    if map_id == "shift":
        return _shift_series(x, y, N)
    if map_id == "ex41":
        return _ex41_series(x, y, N)
    if map_id == "ex42":
        return _ex42_series(x, y, N)
    raise UnknownMap(map_id)


# --- profiles ------------------------------------------------------------------

@dataclass(frozen=True)
class ScrambleProfile:
    N: int
    burn_in: int
    delta: float
    eta: float
    t_list: tuple
    fhat: tuple
    fstar: tuple
    fhat_delta: float
    fstar_delta: float
    liminf_hat: float
    limsup_hat: float
    exact: bool
    is_c: bool
    is_dc1: bool
    is_dc2: bool


_observers: list = []


@contextlib.contextmanager
def observe_profiles():
    """Collect every profile built inside the block."""
    seen: list = []
    _observers.append(seen)
    try:
        yield seen
    finally:
        _observers.remove(seen)


def burn_in(N: int) -> int:
    return max(1, N // 100)


def check_thresholds(t_list: Sequence[float], eta: float, delta: float):
    if not 0 < eta < 1 / 3:
        raise BadThresholds(f"eta={eta} must lie in (0, 1/3)")
    if not delta > 0:
        raise BadThresholds(f"delta={delta} must be positive")
    t = list(t_list)
    if not t or any(v <= 0 for v in t) or any(b <= a for a, b in zip(t, t[1:])):
        raise BadThresholds("t_list must be nonempty, positive and strictly ascending")
    if t[0] > eta * delta:
        raise BadThresholds(f"smallest threshold {t[0]} exceeds eta*delta = {eta * delta}")


def default_thresholds(delta: float, eta: float) -> tuple:
    return (eta * delta / 2, eta * delta)


def running_fractions(d: np.ndarray, t: float) -> np.ndarray:
    """``out[n-1] = #{i < n : d_i < t} / n``."""
    return np.cumsum(d < t) / np.arange(1, len(d) + 1)


def profile_series(series: DistanceSeries, delta: float, t_list: Sequence[float] | None = None,
                   eta: float = 0.05) -> ScrambleProfile:
    t_list = tuple(default_thresholds(delta, eta) if t_list is None else t_list)
    check_thresholds(t_list, eta, delta)
    d = series.values
    N = len(d)
    B = burn_in(N)

    def extremes(t):
        f = running_fractions(d, t)[B - 1:]
        return float(f.min()), float(f.max())

    lo_hi = [extremes(t) for t in t_list]
    fhat_delta, fstar_delta = extremes(delta)
    tail = d[int(eta * B):]
    liminf_hat, limsup_hat = float(tail.min()), float(tail.max())
    upper_ok = all(hi >= 1 - eta for _, hi in lo_hi)
    prof = ScrambleProfile(
        N, B, float(delta), float(eta), t_list,
        tuple(lo for lo, _ in lo_hi), tuple(hi for _, hi in lo_hi), fhat_delta, fstar_delta,
        liminf_hat, limsup_hat, series.exact,
        is_c=limsup_hat >= delta and liminf_hat <= eta * delta,
        is_dc1=fhat_delta <= eta and upper_ok,
        is_dc2=fhat_delta <= 1 - 2 * eta and upper_ok,
    )
    for obs in _observers:
        obs.append(prof)
    return prof


def profile(x, y, map_id: str, N: int, t_list: Sequence[float] | None = None, eta: float = 0.05,
            *, delta: float) -> ScrambleProfile:
    return profile_series(distance_series(x, y, map_id, N), delta, t_list, eta)


def proximal_estimate(x, y, map_id: str, N: int, eta: float = 0.05, diam: float = 1.0):
    """``("proximal" | "distal" | "inconclusive", exact)``."""
    s = distance_series(x, y, map_id, N)
    d = s.values
    tail = d[int(eta * burn_in(N)):]
    if tail.min() <= eta * diam:
        return "proximal", s.exact
    if d.min() > eta * diam:
        return "distal", s.exact
    return "inconclusive", s.exact


# --- constructed pairs -----------------------------------------------------------

def block_schedule(N: int, lead: int = 0, ratio: int = 32) -> list:
    """Switch times ``b_1 < b_2 < ...`` (past ``N``) for far/near alternation.

    The first far block must outlast both the burn-in and the ``lead``
    letters spent before it; each later block is ``ratio`` times longer so
    the running fractions swing to within ``1/ratio`` of 0 and 1.
    """
    b = max(24 * (lead + 1), math.ceil(2 * math.sqrt(N)), 2 * burn_in(N))
    out = [b]
    while out[-1] <= N + 64:
        out.append(out[-1] * ratio)
    return out


def alternating_block_pair(N: int, ratio: int = 32):
    """``(0^inf, y)`` on ``{0,1}`` where ``y`` is 1 on far blocks and 0 on
    near blocks of :func:`block_schedule`."""
    cuts = block_schedule(N, 0, ratio)
    letters = []
    start, far = 0, True
    for end in cuts:
        letters.extend([1 if far else 0] * (end - start))
        start, far = end, not far
        if start > N + 64:
            break
    return SymbolicPoint.constant(0), SymbolicPoint.finite(letters[: N + 64])


# --- sampled densities -------------------------------------------------------------

@dataclass(frozen=True)
class DensityReport:
    example_id: str
    sampler: str
    count: int
    N: int
    delta: float
    eta: float
    t_list: tuple
    seed: int
    fractions: dict
    rows: tuple
    witnesses: dict


def pair_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def sample_pair_density(example_id: str, params=None, sampler: str = "uniform", count: int = 100,
                        N: int = 5000, delta: float | None = None, t_list=None, eta: float = 0.05,
                        seed: int = 0) -> DensityReport:
    from .catalog import build_example

    if count < 1:
        raise ValueError("count must be at least 1")
    bundle = build_example(example_id, params, with_system=False)
    delta = bundle.scramble_delta if delta is None else delta
    t_list = tuple(default_thresholds(delta, eta) if t_list is None else t_list)
    check_thresholds(t_list, eta, delta)
    rows, tallies = [], {"C": 0, "DC1": 0, "DC2": 0}
    witnesses: dict = {}
    for k in range(count):
        x, y = bundle.sample(pair_rng(seed, k), sampler, N)
        p = profile(x, y, bundle.map_id, N, t_list, eta, delta=delta)
        for name, flag in (("C", p.is_c), ("DC1", p.is_dc1), ("DC2", p.is_dc2)):
            if flag:
                tallies[name] += 1
                witnesses.setdefault(name, k)
        rows.append((k, f"{seed}:{k}", int(p.is_c), int(p.is_dc1), int(p.is_dc2), p.fhat, p.fstar, int(p.exact)))
    fractions = {name: v / count for name, v in tallies.items()}
    return DensityReport(example_id, sampler, count, N, float(delta), float(eta), t_list, seed,
                         fractions, tuple(rows), witnesses)


def format_density(rep: DensityReport, sep: str = "\t") -> str:
    head = [
        f"example = {rep.example_id}", f"sampler = {rep.sampler}", f"pairs = {rep.count}", f"N = {rep.N}",
        f"burn_in = {burn_in(rep.N)}", f"delta = {rep.delta!r}", f"eta = {rep.eta!r}",
        "t_list = " + ",".join(repr(t) for t in rep.t_list), f"seed = {rep.seed}",
    ]
    head += [f"fraction_{k} = {v!r}" for k, v in rep.fractions.items()]
    head += [f"witness_{k} = {v}" for k, v in sorted(rep.witnesses.items())]
    cols = ["pair", "seed", "C", "DC1", "DC2"]
    cols += [f"fhat@{t!r}" for t in rep.t_list] + [f"fstar@{t!r}" for t in rep.t_list] + ["exact"]
    lines = head + [sep.join(cols)]
    for k, s, c, d1, d2, lo, hi, ex in rep.rows:
        vals = [str(k), s, str(c), str(d1), str(d2)] + [f"{v:.6f}" for v in lo] + [f"{v:.6f}" for v in hi] + [str(ex)]
        lines.append(sep.join(vals))
    return "\n".join(lines) + "\n"

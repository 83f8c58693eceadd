"""Pseudo-orbits, shadow points and finite-horizon limit-shadowing evidence."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator

import numpy as np

from .errors import BadDelta, NoAdmissibleNeighbor, UnknownMap
from .symbolic import SymbolicPoint, ex41_map, format_point, parse_point, shift, sym_distance
from .system import FiniteSystem

SYMBOLIC_MAPS: dict[str, Callable] = {"fullshift": shift, "shift": shift, "ex41": ex41_map}
TOL = 1e-12


@dataclass(frozen=True)
class PseudoOrbit:
    points: tuple
    delta: float
    map_id: str
    system: FiniteSystem | None = None

    def __len__(self):
        return len(self.points)


def _step(po: PseudoOrbit, p):
    if po.map_id == "system":
        return po.system.succ[p]
    try:
        return (SYMBOLIC_MAPS[po.map_id](p),)
    except KeyError:
        raise UnknownMap(po.map_id) from None


def _dist(po: PseudoOrbit, a, b) -> float:
    if po.map_id == "system":
        return po.system.dist(a, b)
    return float(sym_distance(a, b))


def is_pseudo_orbit(po: PseudoOrbit):
    """``(ok, first failing index)``; index ``i`` means ``x_i -> x_{i+1}`` fails."""
    for i, (a, b) in enumerate(zip(po.points, po.points[1:])):
        if min(_dist(po, r, b) for r in _step(po, a)) > po.delta + TOL:
            return False, i
    return True, None


def forced_depth(delta: float) -> int:
    """Largest ``r`` with ``2^-r > delta``: a binary point within ``delta`` of
    another must share its first ``r`` letters."""
    r = 0
    while 2.0 ** -(r + 1) > delta:
        r += 1
    return r


def perturb_orbit(x0, map_id: str, length: int, delta: float, seed: int,
                  system: FiniteSystem | None = None, noise: int = 8) -> PseudoOrbit:
    """Seeded delta-pseudo-orbit: after every step the image is replaced by
    a random point within ``delta`` of it."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    rng = np.random.default_rng(seed)
    if map_id == "system":
        from .graph import build_delta_graph

        g = build_delta_graph(system, delta)
        pts = [int(x0)]
        for _ in range(length - 1):
            out = g.edges[pts[-1]]
            if not out:
                raise NoAdmissibleNeighbor(f"vertex {pts[-1]} has no delta-neighbour")
            pts.append(int(out[rng.integers(len(out))]))
        return PseudoOrbit(tuple(pts), delta, map_id, system)
    if map_id not in SYMBOLIC_MAPS:
        raise UnknownMap(map_id)
    f = SYMBOLIC_MAPS[map_id]
    pts = [x0]
    # a change at position >= r+1 costs at most 2^-(r+1) <= delta on {0,1}
    r = forced_depth(delta) if delta > 0 else None
    for _ in range(length - 1):
        img = f(pts[-1])
        if r is not None:
            head = img.prefix(r)
            bits = tuple(int(b) for b in rng.integers(0, 2, noise))
            img = SymbolicPoint(head + bits, (0,))
        pts.append(img)
    return PseudoOrbit(tuple(pts), delta, map_id)


@dataclass(frozen=True)
class ShadowCheck:
    ok: bool
    max_deviation: float
    index: int


def verify_shadow(x, po: PseudoOrbit, eps: float) -> ShadowCheck:
    """Compare the true orbit of ``x`` with ``po`` step by step."""
    worst, at = -1.0, 0
    cur = x
    for i, p in enumerate(po.points):
        d = _dist(po, cur, p)
        if d > worst:
            worst, at = d, i
        if po.map_id == "system":
            cur = po.system.succ[cur][0]
        else:
            cur = SYMBOLIC_MAPS[po.map_id](cur)
    worst = max(worst, 0.0)
    return ShadowCheck(worst <= eps + TOL, worst, at)


def full_shift_shadow(po: PseudoOrbit, tail_rule: str = "orbit") -> SymbolicPoint:
    """Concatenate the first letters of the pseudo-orbit points.

    With ``delta <= 2^-m`` consecutive points agree on ``m - 1`` shifted
    letters, so the shadow stays within ``delta / 2`` of every point.  The
    tail is the last point itself (``"orbit"``) or ``0^inf`` (``"zero"``).
    """
    if po.delta > 0.25:
        raise BadDelta(f"delta={po.delta} > 1/4 does not force letter agreement")
    if not po.points:
        raise ValueError("empty pseudo-orbit")
    head = tuple(p.letter(1) for p in po.points[:-1])
    last = po.points[-1]
    if tail_rule == "orbit":
        return SymbolicPoint(head + last.pre, last.period)
    if tail_rule == "zero":
        return SymbolicPoint(head + (last.letter(1),), (0,))
    raise ValueError(f"unknown tail rule {tail_rule!r}")


def shadow_batch(delta: float, length: int, trials: int, seed: int, eps_factor: float = 4.0, word: int = 12):
    """Random full-shift pseudo-orbits shadowed by :func:`full_shift_shadow`.
    Returns per-trial ``(trial, ok, max deviation)`` rows."""
    rows = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        x0 = SymbolicPoint.finite(int(b) for b in rng.integers(0, 2, word))
        po = perturb_orbit(x0, "fullshift", length, delta, int(rng.integers(2**31)))
        z = full_shift_shadow(po)
        chk = verify_shadow(z, po, eps_factor * delta)
        rows.append((t, chk.ok, chk.max_deviation))
    return rows


def format_pseudo_orbit(po: PseudoOrbit) -> str:
    lines = [f"delta={po.delta!r} map={po.map_id}"]
    lines += [format_point(p) if isinstance(p, SymbolicPoint) else str(p) for p in po.points]
    return "\n".join(lines) + "\n"


def parse_pseudo_orbit(text: str, system: FiniteSystem | None = None) -> PseudoOrbit:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    map_id = header["map"]
    if map_id == "system":
        pts = tuple(int(ln) for ln in lines[1:])
    else:
        pts = tuple(parse_point(ln) for ln in lines[1:])
    return PseudoOrbit(pts, float(header["delta"]), map_id, system)


# --- gap rules ---------------------------------------------------------------------

def gap_positions(rule) -> Iterator[int]:
    """Increasing 1-based positions of the letter 1."""
    if rule == "triangular":
        return (j * (j + 1) // 2 for j in itertools.count(1))
    if rule == "squares":
        return (j * j for j in itertools.count(1))
    if rule == "none":
        return iter(())
    if rule == "all":
        return itertools.count(1)
    if isinstance(rule, str):
        raise ValueError(f"unknown gap rule {rule!r}")
    return iter(sorted(rule))


def lemma41_density(rule, N: int, eps: float) -> float:
    """Fraction of ``i < N`` with ``d(sigma^i x, 0^inf) < eps`` for the
    binary ``x`` whose ones sit at ``gap_positions(rule)``.

    ``d(sigma^i x, 0^inf) = 2^-p`` where ``p`` is the offset of the first
    one after ``i``; it fails the bound iff ``p <= R`` with ``R`` the largest
    integer having ``2^-R >= eps``, so each one blocks the interval
    ``[i_j - R, i_j - 1]``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    R = 0
    while 2.0 ** -(R + 1) >= eps:
        R += 1
    if R == 0:
        return 1.0
    failing = 0
    covered_to = 0  # first index not yet counted
    for pos in gap_positions(rule):
        lo, hi = max(pos - R, covered_to, 0), min(pos, N)
        if pos - R >= N:
            break
        if hi > lo:
            failing += hi - lo
        covered_to = max(covered_to, pos)
    return 1.0 - failing / N


# --- limit shadowing near the all-(-1) component ------------------------------------

@dataclass(frozen=True)
class SnappedOrbit:
    """Limit-pseudo-orbit ``y_i`` = the point of ``X_inf`` nearest to
    ``sigma^i z`` where ``z`` in ``{-1, 1}^N`` has ones at ``positions``:
    keep the first one, turn every later one into -1."""

    positions: tuple

    def point(self, i: int) -> SymbolicPoint:
        nxt = next((p for p in self.positions if p > i), None)
        if nxt is None:
            return SymbolicPoint.constant(-1)
        return SymbolicPoint((-1,) * (nxt - i - 1) + (1,), (-1,))

    def tolerance(self, i: int) -> float:
        """Bound on the snapping error from step ``i`` on: the second one
        after ``i`` sits at least one gap further."""
        later = [p for p in self.positions if p > i][:2]
        if len(later) < 2:
            return 0.0
        return 4.0 * 2.0 ** -(later[1] - later[0])


def limit_candidate(positions: Iterable[int], horizon: int) -> SymbolicPoint:
    """A point of the example subshift tracking ``z``: the ``j``-th one is
    replaced by ``s_k`` with ``k`` the gap to the next one minus 1 and
    ``s_k = 1 - 2^-k``, followed by ``-s_k`` until the next one."""
    pos = [p for p in positions if p <= horizon + 1]
    if len(pos) < 2:
        raise ValueError("need at least two ones inside the horizon")
    letters = []
    k0 = max(pos[1] - pos[0] - 1, 1)
    s0 = 1 - Fraction(1, 2**k0)
    letters += [-s0] * (pos[0] - 1)
    for a, b in zip(pos, pos[1:]):
        k = max(b - a - 1, 1)
        s = 1 - Fraction(1, 2**k)
        letters += [s] + [-s] * (b - a - 1)
    k = k + 1
    s = 1 - Fraction(1, 2**k)
    letters += [s]
    return SymbolicPoint(tuple(letters), (-s,))


@dataclass(frozen=True)
class LimitShadowReport:
    checkpoints: tuple
    deviations: tuple
    tolerances: tuple
    consistent: bool
    note: str = "finite-horizon evidence, not a proof"


def limit_shadow_check(x: SymbolicPoint, po, checkpoints: Iterable[int], map_id: str = "shift") -> LimitShadowReport:
    """Deviations ``d(f^i x, x_i)`` at the checkpoints; consistent when the
    last one is within the pseudo-orbit's tolerance there."""
    f = SYMBOLIC_MAPS.get(map_id)
    if f is None:
        raise UnknownMap(map_id)
    cps = tuple(sorted(checkpoints))
    devs, tols = [], []
    for i in cps:
        img = shift(x, i) if f is shift else _iterate(f, x, i)
        devs.append(float(sym_distance(img, po.point(i))))
        tols.append(float(po.tolerance(i)))
    return LimitShadowReport(cps, tuple(devs), tuple(tols), devs[-1] <= tols[-1] + TOL)


def _iterate(f, x, n):
    for _ in range(n):
        x = f(x)
    return x

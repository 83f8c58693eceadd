"""Exact arithmetic on eventually periodic points of one-sided shift spaces.

A point ``u w w w ...`` is stored as the pair ``(pre, period) = (u, w)`` of
finite letter tuples.  Letters are :class:`fractions.Fraction` values in
``[-1, 1]`` so that distances stay exact whenever the alphabet is rational.

Besides the shift itself this module carries the concrete maps used by the
example catalog: the letter-doubling map ``sigma o pi`` on ``{0,1}^N``, the
skew product over it, and the admissibility predicates of the windowed
subshifts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import UnknownExample

__all__ = [
    "SymbolicPoint",
    "SkewState",
    "as_letter",
    "format_point",
    "parse_point",
    "shift",
    "sym_distance",
    "ex41_map",
    "phi",
    "skew_step",
    "skew_limit_estimate",
    "membership",
    "MEMBERSHIP_IDS",
]


def as_letter(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class SymbolicPoint:
    """Eventually periodic sequence ``pre + period + period + ...``.

    The constructor canonicalizes: the period is reduced to its primitive
    root and the preperiod is shortened while its last letter can be folded
    into a rotation of the period.  Two points are equal iff their canonical
    forms are equal.
    """

    pre: tuple
    period: tuple
    alphabet: frozenset | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        pre = tuple(as_letter(a) for a in self.pre)
        period = tuple(as_letter(a) for a in self.period)
        if not period:
            raise ValueError("period must be nonempty")
        period = _primitive_root(period)
        while pre and pre[-1] == period[-1]:
            pre = pre[:-1]
            period = (period[-1],) + period[:-1]
        if self.alphabet is not None:
            alpha = frozenset(as_letter(a) for a in self.alphabet)
            bad = [a for a in pre + period if a not in alpha]
            if bad:
                raise ValueError(f"letters {bad} not in alphabet")
            object.__setattr__(self, "alphabet", alpha)
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "period", period)

    @classmethod
    def _raw(cls, pre: tuple, period: tuple, alphabet=None) -> "SymbolicPoint":
        # caller guarantees canonical form and valid letters
        obj = object.__new__(cls)
        object.__setattr__(obj, "pre", pre)
        object.__setattr__(obj, "period", period)
        object.__setattr__(obj, "alphabet", alphabet)
        return obj

    @classmethod
    def constant(cls, letter, alphabet=None) -> "SymbolicPoint":
        return cls((), (letter,), alphabet)

    @classmethod
    def finite(cls, letters: Iterable, tail=0, alphabet=None) -> "SymbolicPoint":
        """``letters`` followed by the constant tail ``tail^inf``."""
        return cls(tuple(letters), (tail,), alphabet)

    def letter(self, i: int) -> Fraction:
        """The ``i``-th letter, 1-indexed."""
        if i < 1:
            raise IndexError(i)
        m = len(self.pre)
        if i <= m:
            return self.pre[i - 1]
        return self.period[(i - m - 1) % len(self.period)]

    def prefix(self, n: int) -> tuple:
        if n <= len(self.pre):
            return self.pre[:n]
        rest = n - len(self.pre)
        reps = -(-rest // len(self.period))
        return self.pre + (self.period * reps)[:rest]

    def letters(self):
        """Infinite iterator over the letters."""
        yield from self.pre
        while True:
            yield from self.period

    @property
    def is_finitely_supported(self) -> bool:
        return self.period == (Fraction(0),)

    def __str__(self):
        return format_point(self)


def _format_letter(a: Fraction) -> str:
    if a.denominator == 1:
        return str(a.numerator)
    den = a.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{a.numerator}/{a.denominator}"
    digits = max(twos, fives)
    scaled = a * 10**digits
    assert scaled.denominator == 1
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def format_point(p: SymbolicPoint) -> str:
    """Text form ``pre|period`` with comma-separated decimal letters."""
    pre = ",".join(_format_letter(a) for a in p.pre)
    per = ",".join(_format_letter(a) for a in p.period)
    return f"{pre}|{per}"


def parse_point(text: str, alphabet=None) -> SymbolicPoint:
    try:
        pre_s, per_s = text.strip().split("|")
    except ValueError:
        raise ValueError(f"expected 'pre|period', got {text!r}") from None
    pre = [as_letter(t) for t in pre_s.split(",") if t.strip()]
    per = [as_letter(t) for t in per_s.split(",") if t.strip()]
    return SymbolicPoint(tuple(pre), tuple(per), alphabet)


def shift(p: SymbolicPoint, times: int = 1) -> SymbolicPoint:
    # dropping letters from a canonical point keeps it canonical
    if times <= len(p.pre):
        return SymbolicPoint._raw(p.pre[times:], p.period, p.alphabet)
    r = (times - len(p.pre)) % len(p.period)
    return SymbolicPoint._raw((), p.period[r:] + p.period[:r], p.alphabet)


def sym_distance(x: SymbolicPoint, y: SymbolicPoint, base: int = 2) -> Fraction:
    """``sup_{i>=1} base^-i |x_i - y_i|``, computed exactly.

    Past ``max(len(pre)) + lcm(periods)`` positions the difference pattern
    repeats with smaller weights, so the scan can stop there; it also stops
    once the remaining weight times the largest possible letter gap (2, as
    letters lie in [-1, 1]) cannot beat the running maximum.
    """
    span = 2  # letters lie in [-1, 1]
    horizon = max(len(x.pre), len(y.pre)) + math.lcm(len(x.period), len(y.period))
    best = Fraction(0)
    weight = Fraction(1)
    xs, ys = x.letters(), y.letters()
    for _ in range(horizon):
        weight /= base
        if best and weight * span <= best:
            break
        diff = abs(next(xs) - next(ys))
        if weight * diff > best:
            best = weight * diff
    return best


_ZERO, _ONE = Fraction(0), Fraction(1)


def _hat(word: Sequence[Fraction]) -> tuple:
    out = []
    for a in word:
        if a == _ONE:
            out += [_ONE, _ZERO]
        elif a == _ZERO:
            out.append(_ZERO)
        else:
            raise ValueError(f"letter {a} is not binary")
    return tuple(out)


def ex41_map(p: SymbolicPoint) -> SymbolicPoint:
    """Substitute ``1 -> 10``, ``0 -> 0`` letterwise, then shift once."""
    return shift(SymbolicPoint(_hat(p.pre), _hat(p.period), p.alphabet))


def phi(x: SymbolicPoint) -> Fraction:
    """``1 + sum_i 2^-i x_i`` in closed form; lies in ``[1, 2]``."""
    m, per = len(x.pre), x.period
    head = sum((a / 2 ** (i + 1) for i, a in enumerate(x.pre)), Fraction(0))
    block = sum((a / 2 ** (j + 1) for j, a in enumerate(per)), Fraction(0))
    tail = block / (1 - Fraction(1, 2 ** len(per))) / 2**m
    return 1 + head + tail


@dataclass(frozen=True)
class SkewState:
    """A point ``(x, t)`` of the skew product; ``log_exponent`` accumulates
    ``log phi`` along the orbit so that ``t_n = t_0 ** exp(log_exponent)``."""

    x: SymbolicPoint
    t: float
    log_exponent: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t={self.t} outside [0, 1]")


def skew_step(s: SkewState) -> SkewState:
    ph = phi(s.x)
    return SkewState(ex41_map(s.x), s.t ** float(ph), s.log_exponent + math.log(ph))


def skew_limit_estimate(s: SkewState, steps: int) -> tuple[float, float]:
    """Bracket ``[t_N - tol, t_N]`` for the limiting fiber coordinate, where
    ``tol`` is the last decrement of the (nonincreasing) t-coordinate."""
    prev = s.t
    for _ in range(steps):
        prev = s.t
        s = skew_step(s)
    tol = max(prev - s.t, 0.0)
    return max(s.t - tol, 0.0), s.t


# --- admissibility predicates of the catalog subshifts -------------------

def _index_of(s_values: Sequence[Fraction]) -> dict:
    return {as_letter(v): k for k, v in enumerate(s_values, start=1)}


def _mem_ex43(w, s):
    idx = _index_of(s)
    allowed = set(idx) | {-a for a in idx} | {_ONE, -_ONE}
    n = len(w)
    for i, a in enumerate(w):
        if a not in allowed:
            return False
        if i + 1 < n and abs(a) > abs(w[i + 1]):
            return False
        if a in idx:
            k = idx[a]
            if any(w[i + j] != -a for j in range(1, k + 1) if i + j < n):
                return False
        if a == _ONE and any(w[j] != -_ONE for j in range(i + 1, n)):
            return False
    return True


def _mem_ex44(w, s):
    idx = _index_of(s)
    allowed = set(idx) | {-a for a in idx} | {_ONE, -_ONE}
    n = len(w)
    for i, a in enumerate(w):
        if a not in allowed:
            return False
        if i + 1 >= n:
            continue
        b = w[i + 1]
        if abs(a) > abs(b):
            return False
        if a < 0 < b:
            if b == _ONE:
                if any(w[j] != _ONE for j in range(i + 1, n)):
                    return False
            elif any(w[i + j] != b for j in range(1, idx[b] + 1) if i + j < n):
                return False
        if b < 0 < a:
            if b == -_ONE:
                if any(w[j] != -_ONE for j in range(i + 1, n)):
                    return False
            elif any(w[i + j] != b for j in range(1, idx[-b] + 1) if i + j < n):
                return False
    return True


def _mem_ex45(w, s):
    allowed = {as_letter(v) for v in s} | {-as_letter(v) for v in s} | {_ZERO}
    if any(a not in allowed for a in w):
        return False
    return all(abs(w[i]) >= abs(w[i + 1]) for i in range(len(w) - 1))


def _mem_binary(w, s):
    return all(a in (_ZERO, _ONE) for a in w)


def _mem_ex41_xinf(w, s):
    return _mem_binary(w, s) and sum(1 for a in w if a == _ONE) <= 1


_MEMBERSHIP = {
    "ex43": _mem_ex43,
    "ex44": _mem_ex44,
    "ex45": _mem_ex45,
    "fullshift": _mem_binary,
    "ex41": _mem_binary,
    "ex41-xinf": _mem_ex41_xinf,
}
MEMBERSHIP_IDS = tuple(_MEMBERSHIP)


def membership(word: Sequence, example_id: str, s: Sequence = ()) -> bool:
    """Evaluate an example's admissibility clauses on a finite word.

    ``s`` is the truncated parameter sequence ``(s_1, ..., s_kmax)``.
    Clauses that refer to positions past the end of ``word`` hold vacuously.
    """
    try:
        pred = _MEMBERSHIP[example_id]
    except KeyError:
        raise UnknownExample(example_id) from None
    return pred(tuple(as_letter(a) for a in word), tuple(as_letter(v) for v in s))

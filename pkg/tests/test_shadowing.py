import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from chainchaos.catalog import build_example
from chainchaos.errors import BadDelta, UnknownMap
from chainchaos.shadowing import (
    PseudoOrbit,
    SnappedOrbit,
    forced_depth,
    format_pseudo_orbit,
    full_shift_shadow,
    gap_positions,
    is_pseudo_orbit,
    lemma41_density,
    limit_candidate,
    limit_shadow_check,
    parse_pseudo_orbit,
    perturb_orbit,
    shadow_batch,
    verify_shadow,
)
from chainchaos.symbolic import SymbolicPoint, shift, sym_distance

P = SymbolicPoint


def true_orbit(x, n):
    pts = [x]
    for _ in range(n - 1):
        pts.append(shift(pts[-1]))
    return pts


def flip_first(p):
    return P((1 - p.letter(1),) + p.pre[1:], p.period) if p.pre else P((1 - p.letter(1),), p.period)


def pseudo_orbits(m, length):
    """Every delta = 2^-m pseudo-orbit of the given length over binary words
    of length m + 1 followed by zeros."""
    words = [P.finite(w) for w in itertools.product((0, 1), repeat=m + 1)]
    delta = 2.0**-m
    nxt = {w: [v for v in words if sym_distance(shift(w), v) <= delta] for w in words}

    def extend(seq):
        if len(seq) == length:
            yield seq
            return
        for v in nxt[seq[-1]]:
            yield from extend(seq + [v])

    for w in words:
        yield from extend([w])


class TestPseudoOrbit:
    def test_true_orbit(self):
        po = PseudoOrbit(tuple(true_orbit(P((1, 0, 1), (0, 1)), 10)), 0.0, "shift")
        assert is_pseudo_orbit(po) == (True, None)

    def test_flip_reported(self):
        pts = true_orbit(P((1, 1, 0, 1), (0,)), 6)
        pts[3] = flip_first(pts[3])
        ok, idx = is_pseudo_orbit(PseudoOrbit(tuple(pts), 0.2, "shift"))
        assert not ok and idx == 2

    def test_large_delta(self):
        pts = (P.constant(0), P.constant(1), P((1,), (0,)))
        assert is_pseudo_orbit(PseudoOrbit(pts, 1.0, "shift"))[0]

    def test_unknown_map(self):
        with pytest.raises(UnknownMap):
            is_pseudo_orbit(PseudoOrbit((P.constant(0), P.constant(0)), 0.0, "tent"))

    def test_forced_depth(self):
        assert forced_depth(2.0**-4) == 3 and forced_depth(0.3) == 1


class TestPerturb:
    def test_zero_delta_is_orbit(self):
        x = P((1, 0, 1), (0,))
        po = perturb_orbit(x, "fullshift", 8, 0.0, seed=1)
        assert list(po.points) == true_orbit(x, 8)

    def test_seeded(self):
        x = P.finite((1, 0, 1, 1))
        a = perturb_orbit(x, "fullshift", 100, 2.0**-5, 7)
        assert a == perturb_orbit(x, "fullshift", 100, 2.0**-5, 7)
        assert a != perturb_orbit(x, "fullshift", 100, 2.0**-5, 8)

    @given(st.integers(0, 10**6), st.integers(2, 10), st.integers(2, 60))
    @settings(max_examples=40, deadline=None)
    def test_generated_orbits_valid(self, seed, m, length):
        po = perturb_orbit(P.finite((1, 1, 0, 1)), "fullshift", length, 2.0**-m, seed)
        assert is_pseudo_orbit(po)[0]

    def test_letter_doubling_valid(self):
        po = perturb_orbit(P.finite((1, 1, 0, 1)), "ex41", 30, 2.0**-4, 2)
        assert is_pseudo_orbit(po)[0]

    def test_monotone_moduli_drift(self):
        b = build_example("ex45")
        start = b.system.index((F(-1, 2),) * 4)
        po = perturb_orbit(start, "system", 200, 2.0**-4, 3, system=b.system)
        assert is_pseudo_orbit(po)[0]
        tail = [abs(b.system.labels[p][0]) for p in po.points[100:]]
        assert max(tail) < F(1, 2)

    def test_unknown(self):
        with pytest.raises(UnknownMap):
            perturb_orbit(P.constant(0), "tent", 3, 0.1, 0)


class TestShadow:
    def test_true_orbit(self):
        x = P((1, 0, 1), (0, 1))
        po = PseudoOrbit(tuple(true_orbit(x, 12)), 2.0**-6, "shift")
        assert full_shift_shadow(po) == x
        assert verify_shadow(x, po, 0.0).ok

    def test_mismatched_start(self):
        x = P.finite((1, 0, 1, 1))
        po = PseudoOrbit(tuple(true_orbit(x, 5)), 0.0, "shift")
        chk = verify_shadow(flip_first(x), po, 0.25)
        assert not chk.ok and chk.max_deviation >= 0.5 and chk.index == 0

    def test_bad_delta(self):
        with pytest.raises(BadDelta):
            full_shift_shadow(PseudoOrbit((P.constant(0),), 0.3, "fullshift"))

    def test_deep_flip(self):
        pts = true_orbit(P.finite((1, 0, 1, 1, 0, 1)), 3)
        w = list(pts[1].prefix(8))
        w[5] = 1 - w[5]
        pts[1] = P.finite(w)
        po = PseudoOrbit(tuple(pts), 2.0**-4, "fullshift")
        assert is_pseudo_orbit(po)[0]
        assert verify_shadow(full_shift_shadow(po), po, 2.0**-2).ok

    def test_zero_tail(self):
        po = PseudoOrbit(tuple(true_orbit(P.finite((1, 1)), 2)), 2.0**-3, "fullshift")
        assert full_shift_shadow(po, "zero") == P.finite((1, 1))

    def test_batch(self):
        rows = shadow_batch(2.0**-8, 500, 100, 3)
        assert all(ok for _, ok, _ in rows)
        assert max(dev for _, _, dev in rows) <= 2.0**-9

    @pytest.mark.parametrize("m", [2, 3])
    def test_exhaustive_small(self, m):
        for length in range(1, 6):
            for seq in pseudo_orbits(m, length):
                po = PseudoOrbit(tuple(seq), 2.0**-m, "fullshift")
                chk = verify_shadow(full_shift_shadow(po), po, 4 * po.delta)
                assert chk.ok and chk.max_deviation <= po.delta / 2

    @given(st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_eps(self, seed, e1, e2):
        po = perturb_orbit(P.finite((1, 0, 1)), "fullshift", 20, 2.0**-3, seed)
        x = P.finite((0, 1))
        lo, hi = sorted((e1, e2))
        assert verify_shadow(x, po, lo).ok <= verify_shadow(x, po, hi).ok

    def test_text_round_trip(self):
        po = perturb_orbit(P.finite((1, 0, 1)), "fullshift", 6, 2.0**-4, 5)
        text = format_pseudo_orbit(po)
        assert text.splitlines()[0] == "delta=0.0625 map=fullshift"
        assert parse_pseudo_orbit(text) == po


class TestDensity:
    def naive(self, rule, N, eps, extra=40):
        pos = set(itertools.takewhile(lambda p: p <= N + extra, gap_positions(rule)))
        letters = [1 if i in pos else 0 for i in range(1, N + extra + 1)]
        good = 0
        for i in range(N):
            d = max((2.0 ** -(k + 1) for k, a in enumerate(letters[i:i + extra]) if a), default=0.0)
            good += d < eps
        return good / N

    def test_zero_point(self):
        assert lemma41_density("none", 1000, 1e-6) == 1.0

    def test_all_ones(self):
        assert lemma41_density("all", 1000, 0.5) == 0.0

    def test_triangular(self):
        assert lemma41_density("triangular", 10**5, 0.25) >= 0.95

    @pytest.mark.parametrize("rule", ["triangular", "squares", (3, 4, 9, 30)])
    @pytest.mark.parametrize("eps", [0.5, 0.25, 0.1, 0.01])
    def test_against_letters(self, rule, eps):
        assert lemma41_density(rule, 800, eps) == pytest.approx(self.naive(rule, 800, eps))

    def test_monotone(self):
        eps = [0.01, 0.05, 0.25, 0.5, 0.9]
        vals = [lemma41_density("triangular", 10**4, e) for e in eps]
        assert vals == sorted(vals)
        along = [lemma41_density("triangular", n, 0.25) for n in (10**3, 10**4, 10**5)]
        assert along == sorted(along)


class TestLimitShadow:
    class Exact:
        def __init__(self, x):
            self.x = x

        def point(self, i):
            return shift(self.x, i)

        def tolerance(self, i):
            return 0.0

    def test_true_orbit(self):
        x = P((1, 0, 1), (0, 1, 1))
        rep = limit_shadow_check(x, self.Exact(x), (10, 100, 1000))
        assert rep.deviations == (0.0, 0.0, 0.0) and rep.consistent

    def test_snapped_orbit(self):
        pos = tuple(itertools.islice(gap_positions("triangular"), 300))
        x = limit_candidate(pos, 10**4 + 200)
        rep = limit_shadow_check(x, SnappedOrbit(pos), (10**2, 10**3, 10**4))
        assert rep.consistent
        assert rep.deviations[0] > rep.deviations[1] > rep.deviations[2]

    def test_wrong_candidate(self):
        pos = tuple(itertools.islice(gap_positions("triangular"), 300))
        rep = limit_shadow_check(P.constant(F(-1, 2)), SnappedOrbit(pos), (10**2, 10**3, 10**4))
        assert not rep.consistent and min(rep.deviations) >= 0.25

    def test_candidate_letters_admissible(self):
        from chainchaos.symbolic import membership

        pos = tuple(itertools.islice(gap_positions("triangular"), 12))
        x = limit_candidate(pos, 60)
        s = tuple(sorted({abs(a) for a in x.prefix(80)} - {1}))
        assert membership(x.prefix(80), "ex43", s)

    def test_needs_two_ones(self):
        with pytest.raises(ValueError):
            limit_candidate((5,), 10)

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from chainchaos.errors import UnknownExample
from chainchaos.symbolic import (
    SkewState,
    SymbolicPoint,
    ex41_map,
    format_point,
    membership,
    parse_point,
    phi,
    shift,
    skew_limit_estimate,
    skew_step,
    sym_distance,
)

P = SymbolicPoint
S1, S2 = F(1, 2), F(3, 4)

binary = st.sampled_from([0, 1])
letters = st.sampled_from([F(-1), F(-3, 4), F(-1, 2), F(0), F(1, 2), F(3, 4), F(1)])


@st.composite
def points(draw, alphabet=letters, max_pre=6, max_period=4):
    pre = draw(st.lists(alphabet, max_size=max_pre))
    per = draw(st.lists(alphabet, min_size=1, max_size=max_period))
    return P(tuple(pre), tuple(per))


def naive_distance(x, y, n=80):
    return max(F(abs(x.letter(i) - y.letter(i)), 2**i) for i in range(1, n + 1))


class TestCanonicalForm:
    def test_primitive_period(self):
        assert P((), (0, 1, 0, 1)).period == (F(0), F(1))

    def test_preperiod_folds_into_rotation(self):
        p = P((1, 0), (1, 0))
        assert p.pre == () and p.period == (F(1), F(0))

    def test_equality_uses_canonical_form(self):
        assert P((0, 0), (0,)) == P((), (0,))
        assert P((1,), (0, 1)) == P((), (1, 0))

    def test_alphabet_checked(self):
        with pytest.raises(ValueError):
            P((2,), (0,), alphabet={0, 1})

    @given(points())
    def test_idempotent(self, p):
        assert P(p.pre, p.period) == p
        assert P(p.pre, p.period).pre == p.pre

    @given(points(), st.integers(0, 12))
    def test_shift_stays_canonical(self, p, k):
        q = shift(p, k)
        again = P(q.pre, q.period)
        assert (again.pre, again.period) == (q.pre, q.period)
        assert all(q.letter(i) == p.letter(i + k) for i in range(1, 20))


class TestShift:
    def test_drops_single_one(self):
        assert shift(P((1,), (0,))) == P.constant(0)

    def test_rotates_period(self):
        assert shift(P((), (0, 1))) == P((), (1, 0))

    def test_preperiod_shrinks(self):
        assert shift(P((0, 1, 1), (0,))) == P((1, 1), (0,))


class TestDistance:
    def test_identical(self):
        assert sym_distance(P((1, 0), (1,)), P((1, 0), (1,))) == 0

    def test_leading_one(self):
        assert sym_distance(P.constant(0), P((1,), (0,))) == F(1, 2)

    def test_opposite_constants(self):
        assert sym_distance(P.constant(S1), P.constant(-S1)) == F(1, 2)

    @given(points(), points())
    def test_matches_naive_scan(self, x, y):
        assert sym_distance(x, y) == naive_distance(x, y)

    @given(points(), points(), points())
    def test_metric_axioms(self, x, y, z):
        assert sym_distance(x, y) == sym_distance(y, x)
        assert sym_distance(x, z) <= sym_distance(x, y) + sym_distance(y, z)
        assert (sym_distance(x, y) == 0) == (x == y)


class TestLetterDoubling:
    def test_fixed_point(self):
        assert ex41_map(P.constant(0)) == P.constant(0)

    def test_single_one_vanishes(self):
        assert ex41_map(P((1,), (0,))) == P.constant(0)

    def test_all_ones(self):
        assert ex41_map(P.constant(1)) == P((), (0, 1))

    @given(points(binary))
    def test_literal_substitution_prefix(self, x):
        doubled = [b for a in x.prefix(70) for b in ((1, 0) if a == 1 else (0,))]
        assert list(ex41_map(x).prefix(64)) == [F(b) for b in doubled[1:65]]


class TestSkew:
    def test_phi_values(self):
        assert phi(P.constant(0)) == 1
        assert phi(P.constant(1)) == 2
        assert phi(P((1,), (0,))) == F(3, 2)

    @given(points(binary))
    def test_phi_range(self, x):
        assert 1 <= phi(x) <= 2
        assert phi(x) == 1 + sum(F(x.letter(i), 2**i) for i in range(1, 200)) + (phi(shift(x, 199)) - 1) / 2**199

    @pytest.mark.parametrize("t", [0.0, 0.3, 0.5, 1.0])
    def test_zero_fiber_fixed(self, t):
        s = skew_step(SkewState(P.constant(0), t))
        assert s.x == P.constant(0) and s.t == t

    @given(points(binary))
    def test_endpoints(self, x):
        assert skew_step(SkewState(x, 1.0)).t == 1.0
        assert skew_step(SkewState(x, 0.0)).t == 0.0
        assert skew_step(SkewState(x, 1.0)).x == ex41_map(x)

    @given(points(binary), st.floats(0, 1))
    @settings(max_examples=40)
    def test_fiber_nonincreasing(self, x, t):
        s = SkewState(x, t)
        for _ in range(12):
            nxt = skew_step(s)
            assert nxt.t <= s.t
            assert nxt.log_exponent >= s.log_exponent
            s = nxt

    def test_limit_bracket(self):
        lo, hi = skew_limit_estimate(SkewState(P((1, 1), (0,)), 0.5), 10)
        assert lo <= hi <= 0.5

    def test_rejects_bad_t(self):
        with pytest.raises(ValueError):
            SkewState(P.constant(0), 1.5)


class TestTextForm:
    def test_examples(self):
        assert format_point(P((1,), (0,))) == "1|0"
        assert format_point(P((F(-3, 4),), (F(1, 3),))) == "-0.75|1/3"

    @given(points())
    def test_round_trip(self, p):
        assert parse_point(format_point(p)) == p

    def test_malformed(self):
        with pytest.raises(ValueError):
            parse_point("0,1,0")


class TestMembership:
    def test_monotone_moduli_example(self):
        assert membership((F(1, 2), F(1, 4), 0), "ex45", (F(1, 2), F(1, 4)))

    def test_increasing_moduli_violated(self):
        assert not membership((S2, S1), "ex43", (S1, S2))

    def test_sign_switch_needs_run(self):
        s = (S1, S2)
        assert not membership((-S2, S2, -S2), "ex44", s)
        assert membership((-S2, S2, S2), "ex44", s)

    def test_plus_one_absorbs(self):
        s = (S1, S2)
        assert membership((1, -1, -1), "ex43", s)
        assert not membership((1, -1, 1), "ex43", s)

    def test_s_k_followed_by_k_negatives(self):
        s = (S1, S2)
        assert membership((S2, -S2, -S2, S2), "ex43", s)
        assert not membership((S2, -S2, S2), "ex43", s)

    def test_limit_words(self):
        assert membership((0, 1, 0), "ex41-xinf")
        assert not membership((1, 0, 1), "ex41-xinf")

    def test_unknown(self):
        with pytest.raises(UnknownExample):
            membership((0,), "ex99")

    @pytest.mark.parametrize("ex,s", [("ex43", (S1, S2)), ("ex44", (S1, S2)), ("ex45", (F(1, 2), F(1, 4)))])
    def test_subword_closed(self, ex, s):
        from chainchaos.system import admissible_words, rule_for

        rule = rule_for(ex, s)
        words = admissible_words(rule, 5)
        shorter = set(admissible_words(rule, 4))
        for w in words:
            assert w[1:] in shorter and w[:-1] in shorter

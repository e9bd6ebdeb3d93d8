import math

import numpy as np
import pytest

from sigstream.errors import DimensionMismatchError, DomainError, OutOfDepthError
from sigstream.tensor_algebra import (
    EMPTY_WORD,
    TruncatedTensor,
    Word,
    coeff_map,
    from_json_dict,
    grade_norms,
    inner,
    shuffle,
    shuffle_inner,
    tensor_exp,
    tensor_log,
    tensor_mul,
    to_json_dict,
    words_of_degree,
)

from oracles import riemann_iterated_integrals, shuffle_by_interleaving


def letter(i, d, depth):
    vec = np.zeros(d)
    vec[i - 1] = 1.0
    return TruncatedTensor.from_level1(vec, depth)


def random_tensor(rng, d, depth, scale=1.0):
    levels = [scale * rng.standard_normal(d**k) for k in range(depth + 1)]
    return TruncatedTensor(d, depth, levels)


def max_abs_diff(a, b):
    return max(float(np.abs(x - y).max()) for x, y in zip(a.levels, b.levels))


class TestProduct:
    def test_unit_plus_letter_bilinearity(self):
        d, n = 2, 2
        one = TruncatedTensor.unit(d, n)
        a = one + letter(1, d, n)
        b = one + letter(2, d, n)
        prod = tensor_mul(a, b)
        assert inner(EMPTY_WORD, prod) == 1.0
        assert inner(Word((1,)), prod) == 1.0
        assert inner(Word((2,)), prod) == 1.0
        assert inner(Word((1, 2)), prod) == 1.0
        assert inner(Word((2, 1)), prod) == 0.0
        assert inner(Word((1, 1)), prod) == 0.0

    def test_identity_law(self):
        rng = np.random.default_rng(0)
        a = random_tensor(rng, 3, 4)
        one = TruncatedTensor.unit(3, 4)
        assert max_abs_diff(tensor_mul(one, a), a) == 0.0
        assert max_abs_diff(tensor_mul(a, one), a) == 0.0

    def test_two_segment_exponentials(self):
        # exp(e1) exp(e2) at N=2, hand expansion
        s = tensor_mul(tensor_exp(letter(1, 2, 2)), tensor_exp(letter(2, 2, 2)))
        assert inner(Word((1, 2)), s) == pytest.approx(1.0, abs=1e-15)
        assert inner(Word((2, 1)), s) == pytest.approx(0.0, abs=1e-15)
        assert inner(Word((1, 1)), s) == pytest.approx(0.5, abs=1e-15)
        assert inner(Word((2, 2)), s) == pytest.approx(0.5, abs=1e-15)

    def test_two_segment_vs_riemann_oracle(self):
        # brute-force iterated integrals of the path 0 -> e1 -> e1+e2
        oracle = riemann_iterated_integrals(
            [[0, 0], [1, 0], [1, 1]], depth=3, substeps=10_000
        )
        s = tensor_mul(tensor_exp(letter(1, 2, 3)), tensor_exp(letter(2, 2, 3)))
        for k in range(4):
            assert np.abs(s.levels[k] - oracle[k]).max() < 1e-8

    def test_associativity_random(self):
        rng = np.random.default_rng(7)
        for d, n in [(2, 6), (3, 4), (4, 3)]:
            a, b, c = (random_tensor(rng, d, n) for _ in range(3))
            left = tensor_mul(tensor_mul(a, b), c)
            right = tensor_mul(a, tensor_mul(b, c))
            scale = max(np.abs(x).max() for x in left.levels)
            assert max_abs_diff(left, right) <= 1e-12 * scale

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            tensor_mul(TruncatedTensor.unit(2, 3), TruncatedTensor.unit(3, 3))

    def test_mixed_depth_promotes_to_minimum(self):
        rng = np.random.default_rng(1)
        a = random_tensor(rng, 2, 5)
        b = random_tensor(rng, 2, 3)
        prod = tensor_mul(a, b)
        assert prod.depth == 3


class TestExpLog:
    def test_exp_zero(self):
        z = TruncatedTensor.zeros(2, 4)
        e = tensor_exp(z)
        assert max_abs_diff(e, TruncatedTensor.unit(2, 4)) == 0.0

    def test_exp_scalar_series(self):
        c = 0.7
        e = tensor_exp(TruncatedTensor.from_level1([c], 6))
        for k in range(7):
            assert e.levels[k][0] == pytest.approx(
                c**k / math.factorial(k), rel=1e-14
            )

    def test_exp_bracket_truncates(self):
        # exp([e1,e2]) at N=2: the bracket squared exceeds depth 2
        bracket = TruncatedTensor(2, 2, [[0.0], [0.0, 0.0], [0.0, 1.0, -1.0, 0.0]])
        e = tensor_exp(bracket)
        assert inner(EMPTY_WORD, e) == 1.0
        assert np.allclose(e.levels[1], 0.0)
        assert np.allclose(e.levels[2], [0.0, 1.0, -1.0, 0.0])

    def test_exp_requires_zero_scalar(self):
        with pytest.raises(DomainError):
            tensor_exp(TruncatedTensor.unit(2, 2))

    def test_log_identity(self):
        out = tensor_log(TruncatedTensor.unit(3, 4))
        assert all(not lvl.any() for lvl in out.levels)

    def test_log_scalar_inverse(self):
        c = -1.3
        for depth in (2, 5, 8):
            log = tensor_log(tensor_exp(TruncatedTensor.from_level1([c], depth)))
            assert log.levels[1][0] == pytest.approx(c, rel=1e-13)
            for k in range(2, depth + 1):
                assert abs(log.levels[k][0]) < 1e-12

    def test_log_two_segment_level2(self):
        s = tensor_mul(tensor_exp(letter(1, 2, 2)), tensor_exp(letter(2, 2, 2)))
        log = tensor_log(s)
        assert np.allclose(log.levels[2], [0.0, 0.5, -0.5, 0.0], atol=1e-15)

    def test_log_requires_unit_scalar(self):
        with pytest.raises(DomainError):
            tensor_log(TruncatedTensor.zeros(2, 2))

    def test_round_trips_random(self):
        rng = np.random.default_rng(11)
        for d, n in [(2, 6), (3, 4), (4, 3)]:
            b = TruncatedTensor(
                d, n, [[0.0]] + [0.5 * rng.standard_normal(d**k) for k in range(1, n + 1)]
            )
            back = tensor_log(tensor_exp(b))
            scale = max(1e-30, max(np.abs(x).max() for x in b.levels))
            assert max_abs_diff(back, b) <= 1e-10 * scale

            a = TruncatedTensor(
                d, n, [[1.0]] + [0.3 * rng.standard_normal(d**k) for k in range(1, n + 1)]
            )
            back2 = tensor_exp(tensor_log(a))
            scale2 = max(np.abs(x).max() for x in a.levels)
            assert max_abs_diff(back2, a) <= 1e-10 * scale2


class TestInner:
    def test_empty_word_of_signature(self):
        e = tensor_exp(letter(1, 2, 3))
        assert inner(EMPTY_WORD, e) == 1.0

    def test_single_letter(self):
        c = 2.25
        e = tensor_exp(TruncatedTensor.from_level1([c, 0.0], 3))
        assert inner(Word((1,)), e) == pytest.approx(c)

    def test_out_of_depth(self):
        with pytest.raises(OutOfDepthError):
            inner(Word((1, 1, 1)), TruncatedTensor.unit(2, 2))


class TestShuffle:
    def test_base_case(self):
        out = shuffle(Word((1,)), Word((2,)))
        assert out == {Word((1, 2)): 1, Word((2, 1)): 1}

    def test_unit_law(self):
        assert shuffle(Word((1,)), EMPTY_WORD) == {Word((1,)): 1}

    def test_multiplicity(self):
        assert shuffle(Word((1, 1)), Word((1,))) == {Word((1, 1, 1)): 3}

    def test_against_interleaving_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            u = tuple(rng.integers(1, 4, size=rng.integers(0, 4)))
            v = tuple(rng.integers(1, 4, size=rng.integers(1, 4)))
            got = {w.letters: m for w, m in shuffle(Word(u), Word(v)).items()}
            assert got == shuffle_by_interleaving(u, v)

    def test_commutative_exact(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            u = Word(tuple(rng.integers(1, 4, size=3)))
            v = Word(tuple(rng.integers(1, 4, size=2)))
            assert shuffle(u, v) == shuffle(v, u)

    def test_associative_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            u = Word(tuple(rng.integers(1, 3, size=2)))
            v = Word(tuple(rng.integers(1, 3, size=2)))
            w = Word(tuple(rng.integers(1, 3, size=1)))

            def fold(first: dict, other: Word):
                acc = {}
                for word, mult in first.items():
                    for w2, m2 in shuffle(word, other).items():
                        acc[w2] = acc.get(w2, 0) + mult * m2
                return acc

            assert fold(shuffle(u, v), w) == fold(shuffle(v, w), u)

    def test_term_count(self):
        from math import comb

        for m, n in [(1, 1), (2, 3), (3, 3)]:
            u = Word(tuple([1] * m))
            v = Word(tuple([2] * n))
            total = sum(shuffle(u, v).values())
            assert total == comb(m + n, m)

    def test_grouplike_identity_on_product_of_exponentials(self):
        s = tensor_mul(tensor_exp(letter(1, 2, 4)), tensor_exp(letter(2, 2, 4)))
        for u_deg in range(0, 3):
            for v_deg in range(0, 3):
                for u in words_of_degree(2, u_deg):
                    for v in words_of_degree(2, v_deg):
                        lhs = inner(u, s) * inner(v, s)
                        rhs = shuffle_inner(u, v, s)
                        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestGradeNorms:
    def test_zero(self):
        norms = grade_norms(TruncatedTensor.zeros(2, 3))
        assert np.all(norms.values == 0.0)

    def test_exponential_l1(self):
        c = -1.5
        e = tensor_exp(TruncatedTensor.from_level1([c], 5))
        norms = grade_norms(e, "l1")
        for k in range(6):
            assert norms.values[k] == pytest.approx(abs(c) ** k / math.factorial(k))

    def test_flavors(self):
        t = TruncatedTensor(2, 1, [[0.0], [3.0, -4.0]])
        assert grade_norms(t, "l1").values[1] == 7.0
        assert grade_norms(t, "l2").values[1] == 5.0
        assert grade_norms(t, "linf").values[1] == 4.0
        with pytest.raises(DomainError):
            grade_norms(t, "operator")


class TestJson:
    def test_round_trip(self):
        rng = np.random.default_rng(8)
        a = random_tensor(rng, 3, 3)
        b = from_json_dict(to_json_dict(a))
        assert max_abs_diff(a, b) == 0.0

    def test_word_rendering(self):
        a = tensor_exp(letter(1, 2, 2))
        cmap = coeff_map(a)
        assert cmap[""] == 1.0
        assert cmap["1"] == 1.0
        assert cmap["1,1"] == 0.5
        assert cmap["1,2"] == 0.0
        assert Word.from_string("1,2,2").letters == (1, 2, 2)

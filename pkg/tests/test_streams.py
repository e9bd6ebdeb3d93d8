import io
import math

import numpy as np
import pytest

from sigstream.errors import DimensionMismatchError, DomainError, StreamParseError
from sigstream.streams import (
    Stream,
    concat,
    dp_distance_estimate,
    ingest_csv,
    lead_lag,
    log_signature,
    restrict,
    reverse,
    signature,
    time_augment,
    write_csv,
)
from sigstream.tensor_algebra import (
    Word,
    grade_norms,
    inner,
    shuffle_inner,
    tensor_mul,
    words_of_degree,
)

from oracles import (
    p1_distance_exhaustive,
    riemann_iterated_integrals,
    shoelace_area,
)


def random_stream(rng, d, n_samples, scale=1.0):
    times = np.linspace(0.0, 1.0, n_samples)
    points = scale * rng.standard_normal((n_samples, d)).cumsum(axis=0)
    return Stream(times, points)


UNIT_SQUARE = Stream([0, 1, 2, 3, 4], [[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]])


class TestIngest:
    def test_small_file(self):
        s = ingest_csv(io.StringIO("t,x1\n0,0\n1,3\n"))
        assert s.dimension == 1
        assert s.increments()[0, 0] == 3.0

    def test_duplicate_timestamp_names_row(self):
        with pytest.raises(StreamParseError, match="row 3"):
            ingest_csv(io.StringIO("t,x1\n0,0\n0,1\n"))

    def test_ragged_row(self):
        with pytest.raises(StreamParseError, match="row 3"):
            ingest_csv(io.StringIO("t,x1,x2\n0,0,0\n1,2\n"))

    def test_non_numeric_cell(self):
        with pytest.raises(StreamParseError, match="row 2"):
            ingest_csv(io.StringIO("t,x1\n0,zero\n"))

    def test_bad_header(self):
        with pytest.raises(StreamParseError, match="row 1"):
            ingest_csv(io.StringIO("time,x1\n0,0\n"))

    def test_round_trip_500_rows(self, tmp_path):
        rng = np.random.default_rng(0)
        s = random_stream(rng, 4, 500)
        path = tmp_path / "stream.csv"
        write_csv(s, path)
        back = ingest_csv(path)
        assert back.dimension == 4
        assert back.n_samples == 500
        assert np.array_equal(back.times, s.times)
        assert np.array_equal(back.points, s.points)


class TestTransforms:
    def test_time_augment_constant_stream(self):
        s = Stream([0.0, 1.0, 2.0], [[5.0], [5.0], [5.0]])
        aug = time_augment(s)
        sig = signature(aug, 2)
        level1 = sig.levels[1]
        assert level1[0] == pytest.approx(2.0)  # time coordinate is dimension 0
        assert level1[1] == 0.0

    def test_lead_lag_levy_area(self):
        s = Stream([0.0, 1.0], [[0.0], [1.0]])
        ll = lead_lag(s)
        assert ll.dimension == 2
        assert ll.n_samples == 3
        # brute-force integration of the explicit 3-vertex path
        oracle = riemann_iterated_integrals(ll.points, depth=2, substeps=4000)
        sig = signature(ll, 2)
        assert np.abs(sig.levels[2] - oracle[2]).max() < 1e-6
        area = 0.5 * (inner(Word((1, 2)), sig) - inner(Word((2, 1)), sig))
        assert area == pytest.approx(0.5 * 1.0**2, abs=1e-12)

    def test_lead_lag_sample_doubling(self):
        rng = np.random.default_rng(1)
        s = random_stream(rng, 2, 7)
        ll = lead_lag(s)
        assert ll.n_samples == 2 * 7 - 1
        assert ll.dimension == 4

    def test_empty_increment_stream(self):
        s = Stream([0.0, 1.0], [[2.0], [2.0]])
        for transform in (time_augment, lead_lag):
            out = transform(s)
            sig = signature(out, 3)
            if transform is lead_lag:
                assert all(not lvl.any() for lvl in sig.levels[1:])
                assert inner(Word(()), sig) == 1.0


class TestSignature:
    def test_one_dimensional_series(self):
        c = 1.75
        s = Stream([0.0, 0.4, 1.0], [[0.0], [0.3 * c], [c]])
        sig = signature(s, 6)
        for k in range(7):
            assert sig.levels[k][0] == pytest.approx(c**k / math.factorial(k))

    def test_single_point_is_identity(self):
        s = Stream([0.0], [[1.0, 2.0]])
        sig = signature(s, 3)
        assert inner(Word(()), sig) == 1.0
        assert all(not lvl.any() for lvl in sig.levels[1:])
        assert sig.grouplike

    def test_two_segment_words(self):
        s = Stream([0, 1, 2], [[0, 0], [1, 0], [1, 1]])
        sig = signature(s, 2)
        assert inner(Word((1, 2)), sig) == pytest.approx(1.0, abs=1e-14)
        assert inner(Word((2, 1)), sig) == pytest.approx(0.0, abs=1e-14)

    def test_against_riemann_oracle(self):
        s = Stream([0, 1, 2], [[0, 0], [1, 0], [1, 1]])
        oracle = riemann_iterated_integrals(s.points, depth=4, substeps=10_000)
        sig = signature(s, 4)
        for k in range(5):
            assert np.abs(sig.levels[k] - oracle[k]).max() < 1e-8

    def test_unit_square(self):
        sig = signature(UNIT_SQUARE, 2)
        assert np.abs(sig.levels[1]).max() < 1e-14
        area = 0.5 * (inner(Word((1, 2)), sig) - inner(Word((2, 1)), sig))
        assert area == pytest.approx(shoelace_area(UNIT_SQUARE.points), abs=1e-13)

    def test_prefix_matches_stepwise(self):
        from sigstream.streams import _signature_prefix, _signature_stepwise

        rng = np.random.default_rng(2)
        inc = rng.standard_normal((13, 3)) * 0.4
        fast = _signature_prefix(inc, 4)
        slow = _signature_stepwise(inc, 4)
        for a, b in zip(fast, slow):
            assert np.abs(a - b).max() < 1e-13

    def test_chen_identity_random(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = int(rng.integers(2, 5))
            n = int(rng.integers(2, 7))
            a = random_stream(rng, d, int(rng.integers(2, 12)), scale=0.5)
            b = random_stream(rng, d, int(rng.integers(2, 12)), scale=0.5)
            joint = signature(concat(a, b), n)
            product = tensor_mul(signature(a, n), signature(b, n))
            scale = max(np.abs(lvl).max() for lvl in joint.levels)
            err = max(
                np.abs(x - y).max() for x, y in zip(joint.levels, product.levels)
            )
            assert err <= 1e-12 * max(scale, 1.0)

    def test_reparameterisation_invariance(self):
        rng = np.random.default_rng(4)
        s = random_stream(rng, 3, 9, scale=0.7)
        # insert interpolated sample points: same image, different parameterisation
        mid = 0.5 * (s.times[:-1] + s.times[1:])
        times = np.sort(np.concatenate([s.times, mid]))
        points = np.vstack([s.value_at(t) for t in times])
        refined = Stream(np.linspace(0, 2, times.size), points)
        sig_a = signature(s, 5)
        sig_b = signature(refined, 5)
        scale = max(np.abs(lvl).max() for lvl in sig_a.levels)
        err = max(np.abs(x - y).max() for x, y in zip(sig_a.levels, sig_b.levels))
        assert err <= 1e-12 * max(scale, 1.0)

    def test_inverse(self):
        rng = np.random.default_rng(5)
        s = random_stream(rng, 3, 8, scale=0.6)
        prod = tensor_mul(signature(s, 4), signature(reverse(s), 4))
        assert abs(prod.levels[0][0] - 1.0) < 1e-12
        assert max(np.abs(lvl).max() for lvl in prod.levels[1:]) <= 1e-10

    def test_factorial_decay(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            s = random_stream(rng, 3, 10, scale=0.5)
            sig = signature(s, 6)
            length = s.total_variation("l1")
            norms = grade_norms(sig, "l1")
            for k in range(7):
                bound = length**k / math.factorial(k)
                assert norms.values[k] <= bound * (1 + 1e-12)

    def test_grouplike_shuffle_identity(self):
        rng = np.random.default_rng(7)
        s = random_stream(rng, 2, 6, scale=0.8)
        sig = signature(s, 4)
        for u_deg in range(0, 3):
            for v_deg in range(0, 3):
                for u in words_of_degree(2, u_deg):
                    for v in words_of_degree(2, v_deg):
                        lhs = inner(u, sig) * inner(v, sig)
                        rhs = shuffle_inner(u, v, sig)
                        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestLogSignature:
    def test_straight_segment(self):
        s = Stream([0.0, 2.0], [[0.0, 0.0, 0.0], [0.5, -1.0, 2.0]])
        coords = log_signature(s, 3)
        assert coords.coeff("1") == pytest.approx(0.5)
        assert coords.coeff("2") == pytest.approx(-1.0)
        assert coords.coeff("3") == pytest.approx(2.0)
        higher = [v for b, v in zip(coords.basis, coords.values) if b.degree > 1]
        assert np.abs(higher).max() < 1e-14

    def test_unit_square(self):
        coords = log_signature(UNIT_SQUARE, 2)
        assert coords.coeff("[1,2]") == pytest.approx(1.0, abs=1e-12)
        assert abs(coords.coeff("1")) < 1e-13
        assert abs(coords.coeff("2")) < 1e-13

    def test_path_times_reversal_vanishes(self):
        rng = np.random.default_rng(8)
        s = random_stream(rng, 2, 7, scale=0.5)
        loop = concat(s, reverse(s))
        coords = log_signature(loop, 4)
        assert np.abs(coords.values).max() < 1e-10


class TestDpDistance:
    def test_zero_for_identical(self):
        rng = np.random.default_rng(9)
        s = random_stream(rng, 2, 9)
        report = dp_distance_estimate(s, s, p=1.5, max_level=4)
        assert np.all(report.estimates == 0.0)

    def test_monotone_estimates(self):
        rng = np.random.default_rng(10)
        a = random_stream(rng, 2, 9)
        b = random_stream(rng, 2, 9)
        for p in (1.0, 1.5, 2.0):
            report = dp_distance_estimate(a, b, p=p, max_level=5)
            assert np.all(np.diff(report.estimates) >= 0.0)

    def test_p1_matches_exhaustive_oracle(self):
        # vertices at dyadic times so that the level-6 dyadic partition refines them
        times = np.array([0.0, 1 / 8, 2 / 8, 4 / 8, 5 / 8, 6 / 8, 1.0])
        rng = np.random.default_rng(11)
        pts_a = rng.standard_normal((7, 2))
        pts_b = rng.standard_normal((7, 2))
        a, b = Stream(times, pts_a), Stream(times, pts_b)
        report = dp_distance_estimate(a, b, p=1.0, max_level=6)
        exact = p1_distance_exhaustive(times, pts_a, times, pts_b)
        assert report.estimates[-1] == pytest.approx(exact, abs=1e-9)

    def test_p_below_one_rejected(self):
        s = Stream([0.0, 1.0], [[0.0], [1.0]])
        with pytest.raises(DomainError):
            dp_distance_estimate(s, s, p=0.5, max_level=2)

    def test_dimension_mismatch(self):
        a = Stream([0.0, 1.0], [[0.0], [1.0]])
        b = Stream([0.0, 1.0], [[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DimensionMismatchError):
            dp_distance_estimate(a, b, p=1.0, max_level=2)


class TestSurgery:
    def test_restrict_interpolates(self):
        s = Stream([0.0, 1.0], [[0.0, 0.0], [2.0, 4.0]])
        sub = restrict(s, 0.25, 0.75)
        assert np.allclose(sub.points[0], [0.5, 1.0])
        assert np.allclose(sub.points[-1], [1.5, 3.0])

    def test_concat_translates(self):
        a = Stream([0.0, 1.0], [[0.0], [1.0]])
        b = Stream([5.0, 6.0], [[7.0], [9.0]])
        joined = concat(a, b)
        assert joined.n_samples == 3
        assert np.allclose(joined.points[:, 0], [0.0, 1.0, 3.0])
        assert np.all(np.diff(joined.times) > 0)

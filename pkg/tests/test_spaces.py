import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcplab import spaces as sp


class TestNorms:
    def test_lp_cube_root(self):
        assert sp.norm_of(sp.lp(2, 3), [1.0, 1.0]) == pytest.approx(2 ** (1 / 3), abs=1e-15)

    def test_sup_grid_max(self):
        assert sp.norm_of(sp.sup_grid(3), [0.2, -0.9, 0.5]) == 0.9

    def test_linf_sum_of_blocks(self):
        space = sp.linf_sum([sp.lp(2, 2), sp.lp(2, 2)])
        assert sp.norm_of(space, [3.0, 4.0, 1.0, 0.0]) == 5.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            sp.norm_of(sp.lp(3, 2), [1.0, 2.0])

    def test_zero_iff_zero(self):
        space = sp.lp(4, 1.7)
        assert sp.norm_of(space, np.zeros(4)) == 0.0
        assert sp.norm_of(space, [0, 0, 1e-30, 0]) > 0.0

    @pytest.mark.parametrize("space", [
        sp.lp(4, 1.0), sp.lp(4, 1.7), sp.lp(4, 2.0), sp.lp(4, 3.0),
        sp.lp(4, math.inf), sp.sup_grid(4),
        sp.linf_sum([sp.lp(2, 2), sp.lp(2, 1)]),
    ])
    def test_triangle_and_homogeneity_batch(self, space):
        rng = np.random.default_rng(101)
        n = sp.dim(space)
        X = rng.standard_normal((100_000, n))
        Y = rng.standard_normal((100_000, n))
        t = rng.uniform(-3, 3, size=100_000)
        nx = sp.norms_rows(space, X)
        ny = sp.norms_rows(space, Y)
        nxy = sp.norms_rows(space, X + Y)
        assert np.all(nxy <= nx + ny + 1e-12)
        assert np.all(np.abs(sp.norms_rows(space, t[:, None] * X)
                             - np.abs(t) * nx) <= 1e-11)

    def test_triangle_operator_kind_batched(self):
        rng = np.random.default_rng(103)
        X = rng.standard_normal((100_000, 2, 2))
        Y = rng.standard_normal((100_000, 2, 2))
        nx = np.linalg.svd(X, compute_uv=False)[:, 0]
        ny = np.linalg.svd(Y, compute_uv=False)[:, 0]
        nxy = np.linalg.svd(X + Y, compute_uv=False)[:, 0]
        assert np.all(nxy <= nx + ny + 1e-12)
        # spot-check the batched oracle against the space-model norm
        space = sp.operator_space(sp.lp(2, 2), sp.lp(2, 2))
        for k in range(0, 100_000, 20_000):
            assert sp.norm_of(space, X[k].ravel()) == pytest.approx(nx[k], abs=1e-10)

    def test_norms_rows_matches_scalar(self):
        rng = np.random.default_rng(7)
        for space in (sp.lp(3, 1.3), sp.sup_grid(3),
                      sp.linf_sum([sp.lp(2, 1), sp.lp(1, 2)])):
            X = rng.standard_normal((50, sp.dim(space)))
            batch = sp.norms_rows(space, X)
            for i in range(50):
                assert batch[i] == pytest.approx(sp.norm_of(space, X[i]), abs=1e-14)


class TestSampler:
    @pytest.mark.parametrize("space", [
        sp.lp(4, 1.0), sp.lp(4, 1.7), sp.lp(3, 2.0), sp.lp(5, math.inf),
        sp.sup_grid(6), sp.linf_sum([sp.lp(2, 2), sp.lp(3, 1)]),
    ])
    def test_unit_norm(self, space):
        for seed in (0, 1, 99, 2**63):
            v = sp.sample_sphere(space, seed)
            assert abs(sp.norm_of(space, v) - 1.0) <= 1e-12

    def test_deterministic(self):
        space = sp.lp(4, 2.5)
        assert np.array_equal(sp.sample_sphere(space, 7), sp.sample_sphere(space, 7))
        assert not np.array_equal(sp.sample_sphere(space, 7), sp.sample_sphere(space, 8))

    def test_lipschitz_slope_doubles_at_most(self):
        space = sp.sup_grid(32, "lipschitz", slope=4.0)
        bound = sp.grid_increment_bound(space)
        for seed in range(1000):
            v = sp.sample_sphere(space, seed)
            assert abs(sp.norm_of(space, v) - 1.0) <= 1e-12
            assert np.all(np.abs(np.diff(v)) <= 2 * bound + 1e-12)
            assert sp.is_admissible_grid(space, v, factor=2.0)


class TestClassify:
    def test_single_ball_admissible(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [(np.array([2.0, 0.0]), 1.0)])
        cls = sp.classify_covering(cov)
        assert cls.admissible and cls.origin_gap == pytest.approx(1.0)
        assert cls.label == "UBCP"

    def test_ball_containing_origin_flagged(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [(np.array([0.5, 0.0]), 1.0)])
        cls = sp.classify_covering(cov)
        assert not cls.admissible
        assert cls.label == "inadmissible"

    def test_radius_bound_is_max(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([2, 0], 0.5), ([0, 3], 1.25)])
        assert cov.radius_bound == 1.25
        assert cov.origin_gap == pytest.approx(1.5)


class TestCertify:
    def setup_method(self):
        self.space = sp.lp(2, 2)
        balls = []
        for i in range(2):
            for sign in (1.0, -1.0):
                e = np.zeros(2)
                e[i] = 2.0 * sign
                balls.append((e, 1.5))
        self.cov = sp.make_covering(self.space, balls)

    def test_first_hit_in_list_order(self):
        cert = sp.certify_point(self.cov, [1.0, 0.0])
        assert cert.ball_index == 0
        assert cert.distance == pytest.approx(1.0)
        assert cert.margin == pytest.approx(0.5)

    def test_zero_vector_never_covered(self):
        with pytest.raises(sp.NotCovered) as exc:
            sp.certify_point(self.cov, [0.0, 0.0])
        assert exc.value.min_excess == pytest.approx(0.5)

    def test_not_covered_carries_min_excess(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([3.0, 0.0], 1.0)])
        with pytest.raises(sp.NotCovered) as exc:
            sp.certify_point(cov, [-1.0, 0.0])
        assert exc.value.min_excess == pytest.approx(3.0)
        assert exc.value.nearest_index == 0

    def test_boundary_hit_yields_zero_margin(self):
        space = sp.sup_grid(2)
        cov = sp.make_covering(space, [(np.array([1.2, 0.0]), 1.0)])
        cert = sp.certify_point(cov, [1.0, 1.0])
        assert cert.distance == 1.0
        assert cert.margin == 0.0

    def test_strict_hit_preferred_over_earlier_boundary_graze(self):
        space = sp.sup_grid(2)
        cov = sp.make_covering(space, [(np.array([1.2, 0.0]), 1.0),
                                       (np.array([0.0, 1.2]), 1.0)])
        # node 1 carries the peak: ball 0 only grazes, ball 1 holds strictly
        cert = sp.certify_point(cov, [0.4, 1.0])
        assert cert.ball_index == 1
        assert cert.margin > 0.5

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(11)
        pts = np.stack([sp.sample_sphere(self.space, s) for s in range(64)])
        batch = sp.certify_points(self.cov, pts)
        for i in range(64):
            one = sp.certify_point(self.cov, pts[i])
            assert batch[i] is not None
            assert batch[i].ball_index == one.ball_index
            assert batch[i].distance == pytest.approx(one.distance, abs=1e-12)

    def test_batch_reports_misses(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([3.0, 0.0], 1.0)])
        out = sp.certify_points(cov, [[-1.0, 0.0], [3.5, 0.0]])
        assert out[0] is None
        assert out[1] is not None


class TestScalingMargin:
    def test_collinear_equality(self):
        first, second = sp.scaling_margin([1, 0], [0.5, 0], 1.0, 2.0, sp.lp(2, 2))
        assert first == pytest.approx(0.5)
        assert second == pytest.approx(0.5)

    def test_orthogonal_example(self):
        first, second = sp.scaling_margin([1, 0], [0, 1], 1.0, 2.0, sp.lp(2, 2))
        assert first == pytest.approx(1 - math.sqrt(2), abs=1e-12)
        assert second == pytest.approx(2 - math.sqrt(5), abs=1e-12)
        assert first <= second + 1e-12

    def test_rejects_bad_factors(self):
        with pytest.raises(ValueError):
            sp.scaling_margin([1, 0], [0, 1], 2.0, 1.0, sp.lp(2, 2))
        with pytest.raises(ValueError):
            sp.scaling_margin([0, 0], [0, 1], 1.0, 2.0, sp.lp(2, 2))

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32 - 1),
           st.sampled_from([1.0, 1.7, 2.0, math.inf]))
    def test_monotone_everywhere(self, seed, p):
        rng = np.random.default_rng(seed)
        space = sp.lp(3, p)
        x = rng.standard_normal(3)
        if not np.any(x):
            x = np.array([1.0, 0, 0])
        y = rng.standard_normal(3) * rng.uniform(0, 4)
        s = rng.uniform(0.01, 3.0)
        t = s + rng.uniform(1e-9, 3.0)
        first, second = sp.scaling_margin(x, y, s, t, space)
        assert first <= second + 1e-12


class TestRescale:
    def test_single_ball_example(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([1.5, 0.0], 1.0)])
        out = sp.rescale_covering(cov, 0.5)
        assert np.allclose(out.balls[0].center, [5.0, 0.0])
        assert out.balls[0].radius == pytest.approx(4.5)
        # every previously covered sphere point stays covered by the same ball
        rng = np.random.default_rng(3)
        hits = 0
        for seed in range(3000):
            v = sp.sample_sphere(space, seed)
            if sp.norm_of(space, v - cov.balls[0].center) <= 1.0:
                hits += 1
                assert sp.norm_of(space, v - out.balls[0].center) <= 4.5 + 1e-12
        assert hits > 100

    def test_fixed_point_input(self):
        # centers already at the target norm with matching radii: r* = 4, M = 1
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([5.0, 0.0], 1.0), ([0.0, 5.0], 1.0)])
        out = sp.rescale_covering(cov, 4.0)
        for bin_, bout in zip(cov.balls, out.balls):
            assert np.allclose(bin_.center, bout.center, atol=1e-12)
            assert bout.radius == pytest.approx(bin_.radius, abs=1e-12)

    def test_zero_r_star_normalizes_radii_only(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([2.0, 0.0], 1.5)])
        out = sp.rescale_covering(cov, 0.0)
        target = 2 + 2 * 1.5 + 1
        assert sp.norm_of(space, out.balls[0].center) == pytest.approx(target, abs=1e-12)
        assert out.balls[0].radius == target

    def test_gap_preserved_exactly(self):
        space = sp.lp(3, 1.5)
        cov = sp.make_covering(space, [([2, 0, 0], 1.0), ([0, 0, 2.5], 1.2)])
        out = sp.rescale_covering(cov, 0.7)
        cls = sp.classify_covering(out)
        assert cls.origin_gap >= 0.7 - 1e-12

    def test_rejects_r_star_above_gap(self):
        space = sp.lp(2, 2)
        cov = sp.make_covering(space, [([2.0, 0.0], 1.5)])
        with pytest.raises(ValueError):
            sp.rescale_covering(cov, 0.75)


class TestSerialization:
    def test_covering_round_trip(self):
        space = sp.linf_sum([sp.lp(2, 2), sp.lp(1, math.inf)])
        cov = sp.make_covering(space, [([2.0, 0.0, 0.1], 1.5), ([0, 2, -1], 1.0)])
        d = sp.covering_to_dict(cov)
        text = json.dumps(d)
        back = sp.covering_from_dict(json.loads(text))
        assert back.origin_gap == cov.origin_gap
        assert back.radius_bound == cov.radius_bound
        for a, b in zip(cov.balls, back.balls):
            assert np.array_equal(a.center, b.center)
            assert a.radius == b.radius

    def test_space_round_trip_infinite_exponent(self):
        space = sp.operator_space(sp.lp(3, math.inf), sp.lp(2, 2))
        back = sp.space_from_dict(sp.space_to_dict(space))
        assert back == space

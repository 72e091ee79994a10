"""Weight laws, admissibility, level isometry, Banach norm, norm limit."""

import math

import numpy as np
import pytest

from horopoisson import bergman as bg
from horopoisson import field as fd
from horopoisson import poisson as po
from horopoisson.builtins import bump, gaussian, random_bandlimited


def wspec(n, lam, alpha):
    return bg.WeightSpec(alpha, "spatial", po.Params(n, lam))


class TestSpatialWeight:
    def test_center_value(self):
        w = wspec(2, 1.0, 1.7)
        ref = (2 * math.pi) ** -1.0 / math.gamma(1.7)
        assert bg.spatial_weight([0.0, 0.0], 1.0, w) == pytest.approx(ref, rel=1e-14)

    def test_vanishes_on_boundary_for_alpha_above_one(self):
        w = wspec(1, 1.0, 1.5)
        assert bg.spatial_weight([1.0], 1.0, w) == 0.0
        assert bg.spatial_weight([2.0], 1.0, w) == 0.0

    @pytest.mark.parametrize("n,alpha", [(1, 1.0), (1, 0.6), (2, 2.0)])
    def test_total_mass_beta_integral(self, n, alpha):
        # int_{|y|<1} w = 2^{-n/2} / Gamma(alpha + n/2)
        w = wspec(n, 1.0, alpha)
        r, wts = bg.ball_radial_rule(n, alpha, 48)
        surface = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        mass = (2 * math.pi) ** (-n / 2.0) / math.gamma(alpha) * surface * np.sum(wts)
        ref = 2.0 ** (-n / 2.0) / math.gamma(alpha + n / 2.0)
        assert mass == pytest.approx(ref, rel=1e-12)


class TestFourierWeight:
    @pytest.mark.parametrize("s,alpha,n", [(0.5, 1.0, 1), (1.0, 1.5, 1), (1.0, 2.0, 2)])
    def test_zero_value_closed_form(self, s, alpha, n):
        w = wspec(n, s, alpha)
        ref = 2.0 ** (2 * s - alpha - n / 2.0 - 1.0) * math.gamma(s) ** 2 / math.gamma(
            alpha + n / 2.0
        )
        assert abs(bg.fourier_weight(0.0, w) - ref) / ref < 1e-10

    def test_small_argument_continuity(self):
        w = wspec(1, 0.75, 1.0)
        w0 = bg.fourier_weight(0.0, w)
        w1 = bg.fourier_weight(1e-6, w)
        assert abs(w1 - w0) / w0 < 1e-3

    def test_tail_slope(self):
        # log-log slope -> -(alpha + (n+1)/2 - 2s)
        for (s, alpha, n) in ((0.5, 1.0, 1), (1.0, 1.5, 1)):
            w = wspec(n, s, alpha)
            r = np.geomspace(50.0, 200.0, 20)
            vals = bg.fourier_weight(r, w)
            slope = np.polyfit(np.log(r), np.log(vals), 1)[0]
            assert abs(slope + (alpha + (n + 1) / 2.0 - 2 * s)) < 0.05

    def test_monotone_decreasing_when_admissible(self):
        for (s, alpha, n) in ((0.5, 1.0, 1), (1.0, 1.5, 1), (1.0, 2.0, 2)):
            w = wspec(n, s, alpha)
            r = np.geomspace(1e-3, 200.0, 200)
            vals = bg.fourier_weight(r, w)
            assert np.all(np.diff(vals) < 0)

    def test_monotonicity_failure_detected_below_threshold(self):
        # alpha far below 2s - (n+1)/2: the tail grows, and the scan sees it
        w = wspec(1, 2.0, 0.2)
        r = np.geomspace(1e-3, 200.0, 200)
        vals = bg.fourier_weight(r, w)
        assert np.any(np.diff(vals) > 0)  # recorded as detection, not a theorem

    def test_complex_parameter_uses_modulus(self):
        w = wspec(1, 1 + 0.8j, 1.0)
        val = bg.fourier_weight(2.0, w)
        assert np.isfinite(val) and val > 0


class TestWConstant:
    def test_examples(self):
        w = wspec(1, 1.0, 1.0)
        ref = math.sqrt(2.0**-0.5 / math.gamma(1.5))
        assert bg.w_constant(w) == pytest.approx(ref, rel=1e-12)
        w2 = wspec(2, 1.0, 2.0)
        assert bg.w_constant(w2) == pytest.approx(0.5, rel=1e-12)

    def test_quadrature_matches_closed_form(self):
        for (n, alpha) in ((1, 0.7), (2, 1.3), (3, 2.0)):
            w = wspec(n, 1.0, alpha)
            assert abs(bg.w_constant(w) - bg.w_constant_closed_form(w)) < 1e-8


class TestAdmissibility:
    def test_finite_above_threshold(self):
        rep = bg.admissibility(wspec(1, 1.0, 1.5))
        assert rep.values["verdict"] == "finite"

    def test_divergent_below_threshold_with_tenfold_growth(self):
        rep = bg.admissibility(wspec(1, 1.0, 0.5))
        assert rep.values["verdict"] == "divergent"
        assert rep.values["last_over_first"] > 10.0

    def test_small_s_finite_and_dominates_weight_mass(self):
        w = wspec(1, 0.25, 1.0)
        rep = bg.admissibility(w)
        assert rep.values["verdict"] == "finite"
        # d(lam) >= w_const^2 because the delta L1 norms are >= 1
        assert rep.values["d_lambda"] >= bg.w_constant(w) ** 2

    @pytest.mark.parametrize("s", [0.75, 1.5])
    def test_threshold_bisection(self, s):
        thr = bg.admissibility_threshold(po.Params(1, s), iterations=6)
        assert abs(thr - (2 * s - 1.0)) < 0.1


class TestLevelIsometry:
    def test_zero_input(self, grid1):
        w = wspec(1, 0.75, 1.0)
        z = fd.field_from_values(grid1, np.zeros(grid1.shape))
        assert bg.bergman_norm(z, 1.0, w, method="tube-quadrature").value == 0.0
        assert bg.bergman_norm(z, 1.0, w, method="fourier-side").value == 0.0

    def test_tube_equals_fourier_with_frozen_constant(self, grid1, gauss1):
        w = wspec(1, 0.75, 1.0)
        const = bg.level_isometry_constant(w)
        for a in (0.5, 1.0, 2.0):
            tube = bg.bergman_norm(gauss1, a, w, method="tube-quadrature").value
            four = bg.bergman_norm(gauss1, a, w, method="fourier-side").value
            assert abs(tube - four) / tube < 1e-5
        assert const == pytest.approx(bg.level_isometry_constant_candidate(w), rel=1e-6)

    def test_constant_independent_of_input_and_level(self, grid1):
        w = wspec(1, 1.25, 1.0)
        ratios = []
        for f in (gaussian(grid1, 0.7), bump(grid1, 2.5), random_bandlimited(grid1, 3.0, 4)):
            for a in (0.5, 2.0):
                tube = bg.bergman_norm(f, a, w, method="tube-quadrature").value
                ratios.append(tube / bg.fourier_side_raw(f, a, w))
        ratios = np.asarray(ratios)
        assert (ratios.max() - ratios.min()) / np.median(ratios) < 1e-5

    def test_unnormalized_convention_scaling(self, grid1, gauss1):
        p = po.Params(1, 0.75)
        w = bg.WeightSpec(1.0, "spatial", p)
        va = bg.bergman_norm(gauss1, 1.0, w, convention="normalized").value
        vb = bg.bergman_norm(gauss1, 1.0, w, convention="unnormalized").value
        assert vb / va == pytest.approx(abs(po.c_function(p)) ** 2, rel=1e-12)


class TestBanachNorm:
    def test_two_sided_bounds_and_monotone_trace(self, grid1):
        w = wspec(1, 0.75, 1.0)
        a_grid = list(np.geomspace(0.02, 4.0, 12))
        ratios = []
        for f in (gaussian(grid1, 0.8), gaussian(grid1, 1.3), bump(grid1, 2.0)):
            rep = bg.banach_norm(f, w, a_grid)
            trace = np.asarray(rep.values["trace"])
            # real lam, admissible alpha: trace increases toward a -> 0
            assert np.all(np.diff(trace) < 1e-12)
            assert rep.values["sup_attained_at"] == a_grid[0]
            ratios.append(rep.values["sup"] / rep.values["input_l2"])
        ratios = np.asarray(ratios)
        assert np.all(ratios > 0) and ratios.max() / ratios.min() < 1.01

    def test_requires_two_decades(self, grid1, gauss1):
        with pytest.raises(ValueError):
            bg.banach_norm(gauss1, wspec(1, 0.75, 1.0), [0.5, 1.0, 2.0])


class TestNormLimit:
    def test_gaussian_converges_to_l2(self, grid1_fine, gauss1_fine):
        w = wspec(1, 0.75, 1.0)
        rep = bg.norm_limit(gauss1_fine, w, [1.0, 0.5, 0.25, 0.12, 0.09, 0.07, 0.05])
        assert rep.passed
        dev = rep.values["deviation"]
        assert dev[-1] < 2e-2

    def test_norm_sup_equals_limit_for_real_parameter(self, grid1_fine, gauss1_fine):
        w = wspec(1, 0.75, 1.0)
        rep = bg.norm_limit(gauss1_fine, w, [1.0, 0.5, 0.25, 0.12, 0.09, 0.07, 0.05])
        assert rep.values["sup_vs_limit_gap"] == pytest.approx(0.0, abs=1e-12)

    def test_complex_parameter_gap_reported(self, grid1_fine):
        # for complex lam the sup/limit gap is measured, not asserted
        f = gaussian(grid1_fine)
        w = wspec(1, 0.75 + 0.5j, 1.0)
        rep = bg.norm_limit(f, w, [1.0, 0.5, 0.25, 0.12, 0.09, 0.07, 0.05])
        assert "sup_vs_limit_gap" in rep.values
        assert np.isfinite(rep.values["sup_vs_limit_gap"])

import numpy as np
import pytest

from fairthresh.bias import ShiftSpec
from fairthresh.distributions import Empirical
from fairthresh.errors import SolverUnavailable, UnsupportedCriterion
from fairthresh.policy import FairnessSpec, solve_fair, solve_mu
from fairthresh.population import GroupModel, Population, gaussian_population, synthetic_population
from fairthresh.sensitivity import (
    compare_dp_tpr,
    profile_slope,
    relative_error,
    sensitivity_feature_bias,
    sensitivity_label_bias,
)
from fairthresh.sensitivity import with_alpha_b


@pytest.mark.parametrize("crit", ["DP", "TPR"])
def test_label_bias_matches_finite_difference(synthetic, crit):
    rep = sensitivity_label_bias(synthetic, crit)
    assert rep.relative_error.b <= 0.01
    assert rep.relative_error.a <= 0.01
    assert rep.d_theta_b_d_beta < 0 and rep.d_theta_a_d_beta < 0


@pytest.mark.parametrize("crit,measure", [("DP", "pdf"), ("TPR", "qualified")])
def test_coupling_ratio_is_density_ratio(synthetic, crit, measure):
    rep = sensitivity_label_bias(synthetic, crit)
    ta, tb = rep.thresholds
    a, b = synthetic.group_a, synthetic.group_b
    if measure == "pdf":
        ratio = b.pdf(tb) / a.pdf(ta)
    else:
        ratio = b.dist_qualified.pdf(tb) / a.dist_qualified.pdf(ta)
    assert rep.coupling_ratio == pytest.approx(float(ratio), abs=1e-6)


def test_identical_groups_dp_sensitivity():
    pop = gaussian_population(0.6, 0.5, 0.5, 65.0, 50.0, 10.0)
    theta = solve_mu(pop).theta_b
    g = pop.group_b
    h = 1e-5
    slope = (g.gamma(theta + h) - g.gamma(theta - h)) / (2 * h)
    expected = -g.gamma(theta) / ((0.6 / 0.4 + 1) * slope)
    rep = sensitivity_label_bias(pop, "DP")
    assert rep.d_theta_b_d_beta == pytest.approx(float(expected), rel=1e-6)


@pytest.mark.parametrize("crit", ["TPR", "FPR"])
@pytest.mark.parametrize("target", ["qualified", "unqualified"])
def test_feature_bias_matches_finite_difference(synthetic, crit, target):
    rep = sensitivity_feature_bias(synthetic, crit, ShiftSpec("constant", 7.0, target=target))
    assert rep.relative_error.b <= 0.02
    assert rep.relative_error.a <= 0.02


def test_default_shift_is_mean_drop(synthetic):
    a = sensitivity_feature_bias(synthetic, "TPR")
    b = sensitivity_feature_bias(synthetic, "TPR", ShiftSpec("constant", 70.0))
    assert a.d_theta_b_d_beta == pytest.approx(b.d_theta_b_d_beta, rel=1e-12)


@pytest.mark.parametrize("crit", ["TPR", "FPR"])
def test_zero_shift(synthetic, crit):
    rep = sensitivity_feature_bias(synthetic, crit, ShiftSpec("constant", 0.0))
    for analytic, fd in zip((rep.d_theta_a_d_beta, rep.d_theta_b_d_beta), rep.finite_difference):
        assert np.isfinite(analytic)
        assert abs(analytic - fd) <= 1e-6


def test_fpr_more_sensitive_at_high_common_threshold():
    # identical class densities across groups; a 1000:1 loss ratio pushes the threshold to ~90
    pop = synthetic_population(u_minus_over_u_plus=1000.0)
    shift = ShiftSpec("constant", 7.0)
    tpr = sensitivity_feature_bias(pop, "TPR", shift)
    fpr = sensitivity_feature_bias(pop, "FPR", shift)
    assert tpr.thresholds.theta_b > 85
    assert abs(tpr.d_theta_b_d_beta) < abs(fpr.d_theta_b_d_beta)
    assert max(tpr.relative_error.b, fpr.relative_error.b) <= 0.02


def test_no_closed_form_for_affine(synthetic):
    with pytest.raises(SolverUnavailable):
        sensitivity_feature_bias(synthetic, "TPR", ShiftSpec("affine", slope=0.1))


@pytest.mark.parametrize("call,crit", [(sensitivity_label_bias, "FPR"), (sensitivity_feature_bias, "DP")])
def test_unsupported_criteria(synthetic, call, crit):
    with pytest.raises(UnsupportedCriterion):
        call(synthetic, crit)


def test_boundary_thresholds_unavailable():
    pop = gaussian_population(0.8, 0.8, 0.3, 70.0, 50.0, 10.0, u_minus=1e-12)
    with pytest.raises(SolverUnavailable):
        sensitivity_label_bias(pop, "DP")


def test_crossover(synthetic):
    grid = np.round(np.arange(0.05, 0.501, 0.05), 2)
    rep = compare_dp_tpr(synthetic, grid)
    assert len(rep.rows()) == grid.size
    assert rep.prefix_length >= 1
    assert np.all(np.isfinite(rep.tpr_sensitivity)) and np.all(np.isfinite(rep.dp_sensitivity))
    for alpha_b in (0.1, 0.4):
        p = with_alpha_b(synthetic, alpha_b)
        i = list(rep.alpha_b).index(alpha_b)
        fd_tpr = abs(sensitivity_label_bias(p, "TPR").finite_difference.b)
        fd_dp = abs(sensitivity_label_bias(p, "DP").finite_difference.b)
        assert rep.tpr_sensitivity[i] == pytest.approx(fd_tpr, rel=0.01)
        assert rep.dp_sensitivity[i] == pytest.approx(fd_dp, rel=0.01)


def test_crossover_single_point(synthetic):
    assert len(compare_dp_tpr(synthetic, [0.3]).rows()) == 1


def test_smoothed_slope_on_tabulated_profile(synthetic):
    grid = np.linspace(*synthetic.bounds, 1801)
    b = synthetic.group_b
    tab = GroupModel("b", b.n, b.alpha, b.dist_qualified.on_grid(grid), b.dist_unqualified.on_grid(grid))
    for x in (60.0, 70.0, 80.0):
        assert profile_slope(tab, x) == pytest.approx(float(b.gamma_prime(x)), rel=0.02)


def test_relative_error_definition():
    assert relative_error(1.01, 1.0) == pytest.approx(0.01)
    assert relative_error(0.0, 0.0) == 0.0


def test_report_rows(synthetic):
    rows = sensitivity_label_bias(synthetic, "DP").rows()
    assert [r[:2] for r in rows] == [("DP", "a"), ("DP", "b")]

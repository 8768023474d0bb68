"""How exactly-fair thresholds move as data bias sets in.

Closed-form derivatives are evaluated at the unbiased (``beta = 1``)
thresholds and paired with central finite differences that re-solve the
biased problem at ``beta = 1 +/- h``.

Label bias (group b's qualified agents relabelled with probability
``1 - beta``)::

    DP : dtheta_b = -g_b / ((n_a/n_b) g'_a f_b/f_a + g'_b)
    TPR: dtheta_b = -(1 + u+/u-) / ((n_a/n_b)(alpha_a/alpha_b)(f1_b/f1_a) g'_a/g_a^2 + g'_b/g_b^2)

with ``dtheta_a = (f_b/f_a) dtheta_b`` for DP and ``(f1_b/f1_a) dtheta_b`` for
TPR.  Feature bias uses a constant shift ``s(beta) = (1 - beta) D`` of the
targeted class densities of group b and differentiates the likelihood-ratio
form of the first-order condition together with the constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .bias import ShiftSpec, apply_feature_shift_b, apply_underestimate_b
from .distributions import Empirical
from .errors import SolverUnavailable, UnsupportedCriterion
from .policy import FairnessSpec, GroupPair, ThresholdPair, solve_fair
from .population import GroupModel, Population

FD_STEP = 1e-3
SMOOTHING_STEPS = 2.0


@dataclass(frozen=True)
class SensitivityReport:
    criterion: str
    d_theta_b_d_beta: float
    d_theta_a_d_beta: float
    finite_difference: GroupPair
    relative_error: GroupPair
    family: str = "underestimate_b"
    thresholds: ThresholdPair | None = None

    @property
    def coupling_ratio(self) -> float:
        return self.d_theta_a_d_beta / self.d_theta_b_d_beta

    def rows(self) -> list[tuple]:
        return [
            (self.criterion, "a", self.d_theta_a_d_beta, self.finite_difference.a, self.relative_error.a),
            (self.criterion, "b", self.d_theta_b_d_beta, self.finite_difference.b, self.relative_error.b),
        ]


def relative_error(analytic: float, fd: float) -> float:
    return abs(analytic - fd) / max(abs(fd), 1e-12)


def _grid_of(g: GroupModel) -> np.ndarray | None:
    for d in (g.dist_qualified, g.dist_unqualified):
        if isinstance(d, Empirical):
            return d.grid
    return None


def profile_slope(g: GroupModel, x: float, smooth: bool | None = None) -> float:
    """``d gamma / dx``; analytic for smooth densities.

    Tabulated profiles are smoothed with a Gaussian kernel two grid steps
    wide before central differencing.
    """
    grid = _grid_of(g)
    if grid is None or smooth is False:
        return float(g.gamma_prime(x))
    gam = g.gamma(grid)
    gam = np.where(np.isfinite(gam), gam, np.interp(grid, grid[np.isfinite(gam)], gam[np.isfinite(gam)]))
    smoothed = gaussian_filter1d(gam, SMOOTHING_STEPS, mode="nearest")
    return float(np.interp(x, grid, np.gradient(smoothed, grid)))


def _fair_thresholds(pop: Population, criterion: str) -> ThresholdPair:
    pair = solve_fair(pop, FairnessSpec(criterion, 0.0))
    if pair.flags:
        raise SolverUnavailable(f"unbiased {criterion} thresholds sit on the boundary: {pair.flags}")
    return pair


def label_bias_derivatives(pop: Population, criterion: str, pair: ThresholdPair) -> tuple[float, float]:
    """Closed-form ``(dtheta_a, dtheta_b)`` per unit beta under label bias."""
    a, b = pop.group_a, pop.group_b
    ta, tb = pair.theta_a, pair.theta_b
    ga, gb = float(a.gamma(ta)), float(b.gamma(tb))
    dga, dgb = profile_slope(a, ta), profile_slope(b, tb)
    ratio_n = a.n / b.n
    if criterion == "DP":
        density_ratio = float(b.pdf(tb) / a.pdf(ta))
        d_b = -gb / (ratio_n * dga * density_ratio + dgb)
    elif criterion == "TPR":
        density_ratio = float(b.dist_qualified.pdf(tb) / a.dist_qualified.pdf(ta))
        denom = ratio_n * (a.alpha / b.alpha) * density_ratio * dga / ga**2 + dgb / gb**2
        d_b = -(1.0 + pop.u_plus / pop.u_minus) / denom
    else:
        raise UnsupportedCriterion(f"label-bias sensitivity covers DP and TPR, not {criterion}")
    return density_ratio * d_b, d_b


def finite_difference(solve_at, h: float = FD_STEP) -> GroupPair:
    """Central difference of a ``beta -> ThresholdPair`` map at ``beta = 1``."""
    hi, lo = solve_at(1.0 + h), solve_at(1.0 - h)
    return GroupPair((hi.theta_a - lo.theta_a) / (2 * h), (hi.theta_b - lo.theta_b) / (2 * h))


def _report(criterion, family, analytic, fd, pair) -> SensitivityReport:
    d_a, d_b = analytic
    return SensitivityReport(
        criterion=criterion,
        d_theta_b_d_beta=float(d_b),
        d_theta_a_d_beta=float(d_a),
        finite_difference=fd,
        relative_error=GroupPair(relative_error(d_a, fd.a), relative_error(d_b, fd.b)),
        family=family,
        thresholds=pair,
    )


def sensitivity_label_bias(pop: Population, criterion: str, h: float = FD_STEP) -> SensitivityReport:
    criterion = criterion.upper()
    if criterion not in ("DP", "TPR"):
        raise UnsupportedCriterion(f"label-bias sensitivity covers DP and TPR, not {criterion}")
    pair = _fair_thresholds(pop, criterion)
    analytic = label_bias_derivatives(pop, criterion, pair)

    def solve_at(beta):
        biased = apply_underestimate_b(pop, beta, _slack=2 * h).biased
        return solve_fair(biased, FairnessSpec(criterion, 0.0))

    return _report(criterion, "underestimate_b", analytic, finite_difference(solve_at, h), pair)


def _shift_rates(pop: Population, shift: ShiftSpec, theta_b: float):
    """``(d f1, d f0, d T1, d T0)`` of group b per unit beta at ``theta_b``."""
    if shift.kind not in ("mean_drop", "constant"):
        raise SolverUnavailable(f"no closed form for {shift.kind} shifts; use finite differences")
    g = pop.group_b
    out = []
    for label, dist in ((1, g.dist_qualified), (0, g.dist_unqualified)):
        depth = shift.amount_for(dist, 1.0) if shift.targets(label) else 0.0
        # f_hat(x) = f(x + (1 - beta) depth)
        out.append((-depth * float(dist.dpdf(theta_b)), depth * float(dist.pdf(theta_b))))
    (df1, dT1), (df0, dT0) = out
    return df1, df0, dT1, dT0


def feature_bias_derivatives(
    pop: Population, criterion: str, pair: ThresholdPair, shift: ShiftSpec
) -> tuple[float, float]:
    a, b = pop.group_a, pop.group_b
    ta, tb = pair.theta_a, pair.theta_b
    df1, df0, dT1, dT0 = _shift_rates(pop, shift, tb)
    f1a, f0a = float(a.dist_qualified.pdf(ta)), float(a.dist_unqualified.pdf(ta))
    f1b, f0b = float(b.dist_qualified.pdf(tb)), float(b.dist_unqualified.pdf(tb))
    la, lb = f1a / f0a, f1b / f0b
    dla, dlb = float(a.likelihood_ratio_prime(ta)), float(b.likelihood_ratio_prime(tb))
    dl_beta = (df1 * f0b - f1b * df0) / f0b**2
    ratio_n = a.n / b.n
    if criterion == "TPR":
        k = ratio_n * ((1 - a.alpha) / (1 - b.alpha)) * (lb / la) ** 2 * dla
        d_b = (k * dT1 / f1a - dl_beta) / (k * f1b / f1a + dlb)
        d_a = (f1b * d_b - dT1) / f1a
    elif criterion == "FPR":
        k = ratio_n * (a.alpha / b.alpha) * dla
        d_b = (k * dT0 / f0a - dl_beta) / (k * f0b / f0a + dlb)
        d_a = (f0b * d_b - dT0) / f0a
    else:
        raise UnsupportedCriterion(f"feature-bias sensitivity covers TPR and FPR, not {criterion}")
    return d_a, d_b


def sensitivity_feature_bias(
    pop: Population, criterion: str, shift: ShiftSpec | None = None, h: float = FD_STEP
) -> SensitivityReport:
    """Threshold drift under a constant measurement shift of group b.

    ``shift`` gives the full-strength shift; ``beta`` scales it by
    ``1 - beta``.  The default drops the qualified mean by its own value per
    unit ``1 - beta``, so ``beta = 0.9`` is a 10% drop.
    """
    criterion = criterion.upper()
    if criterion not in ("TPR", "FPR"):
        raise UnsupportedCriterion(f"feature-bias sensitivity covers TPR and FPR, not {criterion}")
    shift = ShiftSpec() if shift is None else shift
    pair = _fair_thresholds(pop, criterion)
    analytic = feature_bias_derivatives(pop, criterion, pair, shift)

    def solve_at(beta):
        biased = apply_feature_shift_b(pop, shift, beta, _slack=2 * h).biased
        return solve_fair(biased, FairnessSpec(criterion, 0.0))

    return _report(criterion, "feature_shift_b", analytic, finite_difference(solve_at, h), pair)


@dataclass(frozen=True)
class CrossoverReport:
    alpha_b: tuple[float, ...]
    tpr_sensitivity: tuple[float, ...]
    dp_sensitivity: tuple[float, ...]
    prefix_end: float | None

    @property
    def prefix_length(self) -> int:
        if self.prefix_end is None:
            return 0
        return self.alpha_b.index(self.prefix_end) + 1

    def rows(self):
        return list(zip(self.alpha_b, self.tpr_sensitivity, self.dp_sensitivity))


def with_alpha_b(pop: Population, alpha_b: float) -> Population:
    b = pop.group_b
    return pop.replace_group(GroupModel("b", b.n, alpha_b, b.dist_qualified, b.dist_unqualified))


def compare_dp_tpr(pop: Population, alpha_b_grid) -> CrossoverReport:
    """``|dtheta_b/dbeta|`` for TPR and DP as ``alpha_b`` varies, all else fixed.

    ``prefix_end`` is the last ``alpha_b`` of the leading run where TPR is
    strictly less sensitive than DP, or ``None`` if the first point already
    fails.
    """
    grid = tuple(float(v) for v in np.atleast_1d(alpha_b_grid))
    tpr, dp = [], []
    for alpha_b in grid:
        p = with_alpha_b(pop, alpha_b)
        tpr.append(abs(label_bias_derivatives(p, "TPR", _fair_thresholds(p, "TPR"))[1]))
        dp.append(abs(label_bias_derivatives(p, "DP", _fair_thresholds(p, "DP"))[1]))
    prefix_end = None
    for alpha_b, t, d in zip(grid, tpr, dp):
        if not t < d:
            break
        prefix_end = alpha_b
    return CrossoverReport(grid, tuple(tpr), tuple(dp), prefix_end)


__all__ = [
    "SensitivityReport",
    "CrossoverReport",
    "sensitivity_label_bias",
    "sensitivity_feature_bias",
    "compare_dp_tpr",
    "label_bias_derivatives",
    "feature_bias_derivatives",
    "profile_slope",
    "finite_difference",
    "relative_error",
]

"""Fairness measures, utilities and threshold solvers.

A policy accepts an agent of group ``g`` iff its score is at least
``theta_g``.  Thresholds are found three ways:

* :func:`solve_mu` -- unconstrained, per group, where the qualification
  profile crosses ``u_-/(u_+ + u_-)``.
* :func:`solve_fair` -- under a DP/TPR/FPR/EO constraint.  Exact constraints
  are solved along the equal-measure curve ``theta_a = phi(theta_b)``; soft
  constraints and EO use a lattice search with local refinement.
* :func:`grid_oracle` -- an exhaustive lattice scan kept independent of the
  solvers for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from ._numerics import first_argmax, golden_section_max
from .distributions import Empirical, Mixture, ScoreDistribution
from .errors import InfeasibleConstraint, UnsupportedCriterion
from .population import GroupModel, Population, check_mlr

CRITERIA = ("MU", "DP", "TPR", "FPR", "EO")
MEASURES = ("DP", "TPR", "FPR")
DEFAULT_EPSILON = 0.01
LATTICE_CELLS = 400
CURVE_SCAN_POINTS = 64
FEASIBILITY_MARGIN = 1e-12


@dataclass(frozen=True)
class FairnessSpec:
    criterion: str
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        crit = str(self.criterion).upper()
        if crit not in CRITERIA:
            raise UnsupportedCriterion(f"unknown criterion {self.criterion!r}")
        object.__setattr__(self, "criterion", crit)
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")

    @property
    def measures(self) -> tuple[str, ...]:
        if self.criterion == "EO":
            return ("TPR", "FPR")
        if self.criterion == "MU":
            return ()
        return (self.criterion,)

    @property
    def label(self) -> str:
        if self.criterion == "MU":
            return "MU"
        return f"{self.criterion}@{self.epsilon:g}"


@dataclass(frozen=True)
class ThresholdPair:
    theta_a: float
    theta_b: float
    stationarity_residual: float = 0.0
    solver: str = "rootfind"
    flags: tuple[str, ...] = ()

    def __iter__(self):
        yield self.theta_a
        yield self.theta_b

    def theta(self, g: str) -> float:
        return self.theta_a if g == "a" else self.theta_b


class GroupPair(NamedTuple):
    a: float
    b: float


@dataclass(frozen=True)
class PolicyEvaluation:
    selection_rate: GroupPair
    tpr: GroupPair
    fpr: GroupPair
    utility: GroupPair
    total_utility: float
    fairness_gap: dict = field(default_factory=dict)


# --- measures -----------------------------------------------------------------


def measure_distribution(group: GroupModel, criterion: str) -> ScoreDistribution:
    """The density whose tail is the group's fairness measure."""
    criterion = criterion.upper()
    if criterion == "DP":
        return group.overall
    if criterion == "TPR":
        return group.dist_qualified
    if criterion == "FPR":
        return group.dist_unqualified
    raise UnsupportedCriterion(f"{criterion} is not a per-group measure; use DP, TPR or FPR")


def fairness_measure(pop: Population, g: str, criterion: str, theta):
    return measure_distribution(pop.group(g), criterion).tail(theta)


def fairness_gap(pop: Population, criterion: str, theta_a, theta_b):
    return np.abs(
        fairness_measure(pop, "a", criterion, theta_a) - fairness_measure(pop, "b", criterion, theta_b)
    )


def group_utility(pop: Population, g: str, theta):
    """Per-capita utility from group ``g`` at threshold ``theta`` (vectorised)."""
    grp = pop.group(g)
    return grp.alpha * pop.u_plus * grp.dist_qualified.tail(theta) - (
        1 - grp.alpha
    ) * pop.u_minus * grp.dist_unqualified.tail(theta)


def total_utility(pop: Population, theta_a, theta_b):
    return pop.group_a.n * group_utility(pop, "a", theta_a) + pop.group_b.n * group_utility(
        pop, "b", theta_b
    )


def utility(pop: Population, pair) -> PolicyEvaluation:
    """Rates, utilities and fairness gaps of a threshold pair on ``pop``."""
    ta, tb = (float(t) for t in pair)
    rates = {}
    for crit in MEASURES:
        rates[crit] = GroupPair(
            float(fairness_measure(pop, "a", crit, ta)), float(fairness_measure(pop, "b", crit, tb))
        )
    ua, ub = float(group_utility(pop, "a", ta)), float(group_utility(pop, "b", tb))
    gaps = {crit: abs(r.a - r.b) for crit, r in rates.items()}
    gaps["EO"] = max(gaps["TPR"], gaps["FPR"])
    return PolicyEvaluation(
        selection_rate=rates["DP"],
        tpr=rates["TPR"],
        fpr=rates["FPR"],
        utility=GroupPair(ua, ub),
        total_utility=pop.group_a.n * ua + pop.group_b.n * ub,
        fairness_gap=gaps,
    )


# --- residuals ------------------------------------------------------------------


def stationarity_residual(pop: Population, criterion: str, theta_a: float, theta_b: float) -> float:
    """Left-hand side of the first-order condition for constrained optimality.

    ``sum_g n_g (alpha_g u+ f1_g - (1 - alpha_g) u- f0_g) / C_g'`` evaluated at
    the thresholds, where ``C_g'`` is the density of the group's measure.
    """
    total = 0.0
    for g, theta in (("a", theta_a), ("b", theta_b)):
        grp = pop.group(g)
        gain = grp.alpha * pop.u_plus * grp.dist_qualified.pdf(theta) - (
            1 - grp.alpha
        ) * pop.u_minus * grp.dist_unqualified.pdf(theta)
        slope = measure_distribution(grp, criterion).pdf(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            total += grp.n * float(gain / slope)
    return total


def profile_identity_residual(pop: Population, criterion: str, theta_a: float, theta_b: float) -> float:
    """Residual of the threshold identity written in terms of profiles.

    DP:  n_a g_a + n_b g_b = c
    TPR: n_a alpha_a / g_a + n_b alpha_b / g_b = (n_a alpha_a + n_b alpha_b) / c
    FPR: sum n (1 - alpha) / (1 - g) = sum n (1 - alpha) / (1 - c)
    with ``g = gamma(theta)`` and ``c = u-/(u+ + u-)``.
    """
    c = pop.target_gamma
    a, b = pop.group_a, pop.group_b
    ga, gb = float(a.gamma(theta_a)), float(b.gamma(theta_b))
    criterion = criterion.upper()
    if criterion == "DP":
        return a.n * ga + b.n * gb - c
    if criterion == "TPR":
        return a.n * a.alpha / ga + b.n * b.alpha / gb - (a.n * a.alpha + b.n * b.alpha) / c
    if criterion == "FPR":
        lhs = a.n * (1 - a.alpha) / (1 - ga) + b.n * (1 - b.alpha) / (1 - gb)
        return lhs - (a.n * (1 - a.alpha) + b.n * (1 - b.alpha)) / (1 - c)
    raise UnsupportedCriterion(criterion)


# --- unconstrained ----------------------------------------------------------------


def _is_smooth(pop: Population) -> bool:
    def smooth(d):
        if isinstance(d, Empirical):
            return False
        if isinstance(d, Mixture):
            return all(smooth(c) for c in d.components)
        return True

    return all(smooth(d) for g in pop.groups for d in (g.dist_qualified, g.dist_unqualified))


def _candidate_grid(pop: Population, g: str | None = None) -> np.ndarray:
    """Scores where a piecewise-linear utility can peak, or a dense grid."""
    groups = pop.groups if g is None else (pop.group(g),)
    nodes = []

    def collect(d):
        if isinstance(d, Empirical):
            nodes.append(d.grid)
        elif isinstance(d, Mixture):
            for c in d.components:
                collect(c)

    for grp in groups:
        collect(grp.dist_qualified)
        collect(grp.dist_unqualified)
    lo, hi = pop.bounds
    pts = [np.linspace(lo, hi, 4 * LATTICE_CELLS + 1)] + nodes
    return np.unique(np.concatenate(pts))


def _mu_group(pop: Population, g: str) -> tuple[float, float, str, str | None]:
    grp = pop.group(g)
    lo, hi = pop.bounds
    c = pop.target_gamma
    if check_mlr(grp).holds:
        glo, ghi = float(grp.gamma(lo)), float(grp.gamma(hi))
        if glo >= c:
            return lo, abs(glo - c), "rootfind", f"{g}:accept_all"
        if ghi < c:
            return hi, abs(ghi - c), "rootfind", f"{g}:reject_all"
        theta = optimize.bisect(lambda x: float(grp.gamma(x)) - c, lo, hi, xtol=1e-13, maxiter=400)
        return theta, abs(float(grp.gamma(theta)) - c), "rootfind", None
    xs = _candidate_grid(pop, g)
    us = group_utility(pop, g, xs)
    i = first_argmax(us)
    theta = float(xs[i])
    flag = None
    if i == 0:
        flag = f"{g}:accept_all"
    elif i == xs.size - 1:
        flag = f"{g}:reject_all"
    gam = float(grp.gamma(theta))
    return theta, abs(gam - c) if np.isfinite(gam) else float("nan"), "grid", flag


def solve_mu(pop: Population) -> ThresholdPair:
    """Utility-maximising thresholds without a fairness constraint.

    Each group's threshold solves ``gamma_g(theta) = u-/(u+ + u-)`` by
    bisection when the likelihood ratio is monotone; otherwise the group's
    utility is maximised over a grid.  When the profile never crosses the
    target the boundary threshold is returned with an ``accept_all`` or
    ``reject_all`` flag.
    """
    ta, ra, sa, fa = _mu_group(pop, "a")
    tb, rb, sb, fb = _mu_group(pop, "b")
    solver = "grid" if "grid" in (sa, sb) else "rootfind"
    flags = tuple(f for f in (fa, fb) if f)
    return ThresholdPair(ta, tb, max(ra, rb), solver, flags)


# --- constraint curve --------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintCurve:
    """``theta_a`` as a function of ``theta_b`` on an equal-measure constraint.

    ``theta_b``/``theta_a`` hold a tabulation; calling the curve inverts the
    measures exactly at any ``theta_b``.
    """

    criterion: str
    theta_b: np.ndarray
    theta_a: np.ndarray
    _pop: Population = field(repr=False, compare=False)

    def __call__(self, theta_b: float) -> float:
        return curve_point(self._pop, self.criterion, theta_b)

    def interpolate(self, theta_b):
        return np.interp(theta_b, self.theta_b, self.theta_a)

    def slope(self, theta_b: float) -> float:
        """``d theta_a / d theta_b`` = ratio of measure densities."""
        ta = self(theta_b)
        db = measure_distribution(self._pop.group_b, self.criterion).pdf(theta_b)
        da = measure_distribution(self._pop.group_a, self.criterion).pdf(ta)
        return float(db / da)


def curve_point(pop: Population, criterion: str, theta_b: float) -> float:
    meas_a = measure_distribution(pop.group_a, criterion)
    meas_b = measure_distribution(pop.group_b, criterion)
    target = float(meas_b.tail(theta_b))
    if target > 0.5:
        # match lower tails, which keep their precision there
        return meas_a.inverse_cdf(float(meas_b.cdf(theta_b)))
    return meas_a.inverse_tail(target)


def constraint_curve(pop: Population, criterion: str, points: int = LATTICE_CELLS + 1) -> ConstraintCurve:
    criterion = criterion.upper()
    if criterion not in MEASURES:
        raise UnsupportedCriterion(f"no single equal-measure curve for {criterion}")
    tb = np.linspace(*pop.bounds, points)
    ta = np.array([curve_point(pop, criterion, t) for t in tb])
    tb.setflags(write=False)
    ta.setflags(write=False)
    return ConstraintCurve(criterion, tb, ta, pop)


# --- constrained -----------------------------------------------------------------------


def _flags_for(pop: Population, ta: float, tb: float) -> tuple[str, ...]:
    lo, hi = pop.bounds
    flags = []
    for g, t in (("a", ta), ("b", tb)):
        if t <= lo:
            flags.append(f"{g}:accept_all")
        elif t >= hi:
            flags.append(f"{g}:reject_all")
    return tuple(flags)


def _solve_on_curve(pop: Population, criterion: str, xtol: float = 1e-10) -> ThresholdPair:
    lo, hi = pop.bounds

    def along(tb):
        return float(total_utility(pop, curve_point(pop, criterion, tb), tb))

    mlr = all(check_mlr(g).holds for g in pop.groups)
    if not mlr:
        # piecewise-linear utilities peak at a node of either group's grid
        nodes_b = _candidate_grid(pop, "b")
        meas_a = measure_distribution(pop.group_a, criterion)
        meas_b = measure_distribution(pop.group_b, criterion)
        pre = [meas_b.inverse_tail(float(meas_a.tail(x))) for x in _candidate_grid(pop, "a")]
        cands = np.unique(np.concatenate([nodes_b, pre]))
        vals = [along(t) for t in cands]
        tb = float(cands[first_argmax(vals)])
        ta = curve_point(pop, criterion, tb)
        res = stationarity_residual(pop, criterion, ta, tb)
        return ThresholdPair(ta, tb, res, "grid", _flags_for(pop, ta, tb))

    scan = np.linspace(lo, hi, CURVE_SCAN_POINTS)
    vals = [along(t) for t in scan]
    i = first_argmax(vals)
    left, right = scan[max(i - 1, 0)], scan[min(i + 1, scan.size - 1)]
    tb, best = golden_section_max(along, left, right, xtol=xtol)
    if _is_smooth(pop):
        # sharpen with a root of the first-order condition when it is bracketed
        def h(t):
            return stationarity_residual(pop, criterion, curve_point(pop, criterion, t), t)

        hl, hr = h(left), h(right)
        if np.isfinite(hl) and np.isfinite(hr) and hl * hr < 0:
            root = optimize.brentq(h, left, right, xtol=1e-13, rtol=1e-15)
            if along(root) >= best - 1e-12:
                tb = root
    if i in (0, scan.size - 1) and vals[i] >= best:
        # the optimum is a corner: accept or reject all of group b
        tb = float(scan[i])
    ta = curve_point(pop, criterion, tb)
    res = stationarity_residual(pop, criterion, ta, tb)
    return ThresholdPair(ta, tb, res, "rootfind", _flags_for(pop, ta, tb))


def default_step(pop: Population) -> float:
    lo, hi = pop.bounds
    return (hi - lo) / LATTICE_CELLS


def _lattice(pop: Population, step: float) -> np.ndarray:
    lo, hi = pop.bounds
    n = int(np.floor((hi - lo) / step + 1e-9))
    pts = lo + step * np.arange(n + 1)
    if hi - pts[-1] > 1e-9 * step:
        pts = np.append(pts, hi)
    return pts


def _lattice_search(pop, measures, xs, eps_of: Callable, chunk: int = 256):
    """Best feasible lattice pair under the tie order (theta_b, theta_a).

    ``eps_of(crit, i_a_slice, j_b_slice)`` returns the per-cell tolerance.
    Also returns the smallest achievable max-gap for infeasibility reports.
    """
    ua = pop.group_a.n * group_utility(pop, "a", xs)
    ub = pop.group_b.n * group_utility(pop, "b", xs)
    ca = {m: fairness_measure(pop, "a", m, xs) for m in measures}
    cb = {m: fairness_measure(pop, "b", m, xs) for m in measures}
    best_val, best = -np.inf, None
    min_gap = np.inf
    for j0 in range(0, xs.size, chunk):
        js = slice(j0, min(j0 + chunk, xs.size))
        vals = ua[:, None] + ub[None, js]
        feasible = np.ones(vals.shape, dtype=bool)
        worst = np.zeros(vals.shape)
        for m in measures:
            gap = np.abs(ca[m][:, None] - cb[m][None, js])
            worst = np.maximum(worst, gap)
            feasible &= gap <= eps_of(m, js)
        min_gap = min(min_gap, float(worst.min()))
        vals = np.where(feasible, vals, -np.inf)
        colmax = vals.max(axis=0)
        top = colmax.max()
        if top > best_val:
            j = int(np.flatnonzero(colmax == top)[0])
            i = int(np.flatnonzero(vals[:, j] == top)[0])
            best_val, best = top, (i, j0 + j)
    return best, best_val, min_gap


def _refine(pop, measures, eps, ta, tb, delta, max_iter=2000):
    lo, hi = pop.bounds

    def ok(a, b):
        return all(float(fairness_gap(pop, m, a, b)) <= eps for m in measures)

    cur = float(total_utility(pop, ta, tb))
    for _ in range(max_iter):
        moved = False
        for da, db in ((-delta, 0.0), (delta, 0.0), (0.0, -delta), (0.0, delta)):
            a, b = min(max(ta + da, lo), hi), min(max(tb + db, lo), hi)
            if (a, b) == (ta, tb) or not ok(a, b):
                continue
            val = float(total_utility(pop, a, b))
            if val > cur + 1e-15:
                ta, tb, cur, moved = a, b, val, True
                break
        if not moved:
            break
    return ta, tb


def _solve_soft(pop: Population, spec: FairnessSpec, step: float | None) -> ThresholdPair:
    step = default_step(pop) if step is None else step
    xs = _lattice(pop, step)
    # a hair inside the tolerance so refined pairs stay feasible after rounding
    eps = max(spec.epsilon - FEASIBILITY_MARGIN, 0.0)
    best, _, min_gap = _lattice_search(pop, spec.measures, xs, lambda m, js: eps)
    if best is None:
        raise InfeasibleConstraint(
            f"{spec.criterion} infeasible at epsilon={spec.epsilon:g}; smallest feasible is {min_gap:.6g}",
            min_epsilon=min_gap,
        )
    ta, tb = float(xs[best[0]]), float(xs[best[1]])
    ta, tb = _refine(pop, spec.measures, eps, ta, tb, step / 10)
    res = stationarity_residual(pop, spec.measures[0], ta, tb) if len(spec.measures) == 1 else float("nan")
    return ThresholdPair(ta, tb, res, "grid", _flags_for(pop, ta, tb))


def solve_fair(pop: Population, spec: FairnessSpec, grid_step: float | None = None) -> ThresholdPair:
    """Utility-maximising thresholds subject to ``spec``.

    With ``epsilon == 0`` and a single measure the constraint is an exact
    curve; utility along it is bracketed from a 64-point scan and maximised by
    golden-section search.  Otherwise a lattice of pairs is searched and the
    best feasible pair refined by coordinate moves of one tenth of a step.
    """
    if spec.criterion == "MU":
        return solve_mu(pop)
    if spec.criterion in MEASURES and spec.epsilon == 0:
        return _solve_on_curve(pop, spec.criterion)
    return _solve_soft(pop, spec, grid_step)


# --- oracle ------------------------------------------------------------------------------


def _resolution(values: np.ndarray) -> np.ndarray:
    d = np.abs(np.diff(values))
    left = np.concatenate([[d[0]], d])
    right = np.concatenate([d, [d[-1]]])
    return 0.5 * np.maximum(left, right)


def _tabulated_curve(ca: np.ndarray, cb: np.ndarray, xs: np.ndarray):
    """Fractional lattice position in ``a`` matching each tabulated ``b`` measure.

    Returns ``(k, w)`` so that ``C_a`` interpolated at ``(1 - w) x[k-1] + w x[k]``
    equals ``C_b``; the smallest such score is used on flat stretches.
    """
    k = np.searchsorted(-ca, -cb, side="left")
    k = np.clip(k, 1, xs.size - 1)
    hi, lo = ca[k - 1], ca[k]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(hi > lo, (hi - cb) / (hi - lo), 0.0)
    w = np.clip(w, 0.0, 1.0)
    w = np.where(cb >= ca[0], 0.0, w)
    k = np.where(cb >= ca[0], 1, k)
    return k, w


def grid_oracle(pop: Population, spec: FairnessSpec, step: float | None = None) -> ThresholdPair:
    """Brute-force threshold search on a lattice, independent of the solvers.

    MU takes the per-group lattice argmax.  Exact single-measure constraints
    scan every lattice ``theta_b``; the matching ``theta_a`` and its utility
    come from linear interpolation of group a's measure and utility tables
    between neighbouring lattice nodes.  Otherwise every lattice pair is
    checked and feasible means every required gap is at most
    ``max(epsilon, r)`` with ``r`` half the change of group a's measure across
    one step.  Ties go to the smaller ``theta_b``, then the smaller
    ``theta_a``.
    """
    step = default_step(pop) if step is None else step
    if not step > 0:
        raise ValueError("step must be positive")
    xs = _lattice(pop, step)
    if spec.criterion == "MU":
        ta = float(xs[first_argmax(group_utility(pop, "a", xs))])
        tb = float(xs[first_argmax(group_utility(pop, "b", xs))])
        return ThresholdPair(ta, tb, 0.0, "grid", _flags_for(pop, ta, tb))
    if spec.epsilon == 0 and len(spec.measures) == 1:
        m = spec.measures[0]
        ca = fairness_measure(pop, "a", m, xs)
        cb = fairness_measure(pop, "b", m, xs)
        ua = pop.group_a.n * group_utility(pop, "a", xs)
        ub = pop.group_b.n * group_utility(pop, "b", xs)
        k, w = _tabulated_curve(ca, cb, xs)
        vals = (1 - w) * ua[k - 1] + w * ua[k] + ub
        j = first_argmax(vals)
        ta = float((1 - w[j]) * xs[k[j] - 1] + w[j] * xs[k[j]])
        tb = float(xs[j])
        return ThresholdPair(ta, tb, float("nan"), "grid", _flags_for(pop, ta, tb))
    res_a = {m: _resolution(fairness_measure(pop, "a", m, xs)) for m in spec.measures}

    def eps_of(m, js):
        return np.maximum(spec.epsilon, res_a[m])[:, None]

    best, _, min_gap = _lattice_search(pop, spec.measures, xs, eps_of)
    if best is None:
        raise InfeasibleConstraint(
            f"{spec.criterion} infeasible on the lattice at epsilon={spec.epsilon:g}",
            min_epsilon=min_gap,
        )
    ta, tb = float(xs[best[0]]), float(xs[best[1]])
    return ThresholdPair(ta, tb, float("nan"), "grid", _flags_for(pop, ta, tb))


def smallest_feasible_epsilon(pop: Population, spec: FairnessSpec, step: float | None = None) -> float:
    """Smallest tolerance with a feasible lattice pair for ``spec``'s measures."""
    xs = _lattice(pop, default_step(pop) if step is None else step)
    _, _, min_gap = _lattice_search(pop, spec.measures, xs, lambda m, js: -1.0)
    return min_gap


# --- contour -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ContourResult:
    rates: np.ndarray
    utility: np.ndarray  # [i_a, j_b]
    curves: dict

    def argmax_rates(self) -> tuple[float, float]:
        i, j = np.unravel_index(int(np.argmax(self.utility)), self.utility.shape)
        return float(self.rates[i]), float(self.rates[j])


def utility_contour(
    pop: Population,
    lattice=101,
    epsilon: float = DEFAULT_EPSILON,
    criteria=("DP", "TPR", "FPR", "EO"),
) -> ContourResult:
    """Total utility over a lattice of selection-rate pairs.

    Each selection rate is mapped to the threshold that attains it.  For
    DP/TPR/FPR the exact constraint curve is traced in selection-rate space;
    for EO the lattice cells whose TPR and FPR gaps are both within
    ``epsilon`` are listed.
    """
    rates = np.linspace(0.0, 1.0, lattice) if np.isscalar(lattice) else np.asarray(lattice, float)
    if rates.min() < 0 or rates.max() > 1:
        raise ValueError("selection rates must lie in [0, 1]")
    dist_a, dist_b = pop.group_a.overall, pop.group_b.overall
    th_a = np.array([dist_a.inverse_tail(s) for s in rates])
    th_b = np.array([dist_b.inverse_tail(s) for s in rates])
    ua = pop.group_a.n * group_utility(pop, "a", th_a)
    ub = pop.group_b.n * group_utility(pop, "b", th_b)
    # rates of exactly 0 reject everyone regardless of support edges
    ua = np.where(rates == 0, 0.0, ua)
    ub = np.where(rates == 0, 0.0, ub)
    mat = ua[:, None] + ub[None, :]
    curves = {}
    for crit in criteria:
        crit = crit.upper()
        if crit in MEASURES:
            pts = []
            for s_b, tb in zip(rates, th_b):
                ta = curve_point(pop, crit, tb)
                pts.append((float(dist_a.tail(ta)), float(s_b)))
            if crit == "DP":
                pts = [(float(s), float(s)) for s in rates]
            curves[crit] = np.array(pts)
        elif crit == "EO":
            gt = np.abs(
                pop.group_a.dist_qualified.tail(th_a)[:, None] - pop.group_b.dist_qualified.tail(th_b)[None, :]
            )
            gf = np.abs(
                pop.group_a.dist_unqualified.tail(th_a)[:, None]
                - pop.group_b.dist_unqualified.tail(th_b)[None, :]
            )
            ii, jj = np.nonzero((gt <= epsilon) & (gf <= epsilon))
            curves["EO"] = np.column_stack([rates[ii], rates[jj]])
        else:
            raise UnsupportedCriterion(crit)
    return ContourResult(rates, mat, curves)

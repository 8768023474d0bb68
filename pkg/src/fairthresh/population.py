"""Two-group populations and conversions between their equivalent primitives.

A group is described by its qualification rate ``alpha`` and the score
densities of its qualified and unqualified members.  The qualification
profile ``gamma(x) = P(y=1 | x)`` and the overall density are derived; a
profile plus an overall density can be inverted back with Bayes' rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Literal, Mapping

import numpy as np
from scipy import special

from .distributions import Empirical, ScoreDistribution, mixture
from .errors import (
    DegenerateDensityWarning,
    DomainError,
    InconsistentInput,
    RenormalizationWarning,
)

GroupId = Literal["a", "b"]

GAMMA_CLAMP = 1e-9
MLR_SLACK = 1e-9
VALIDATION_POINTS = 2001


@dataclass(frozen=True)
class GroupModel:
    group_id: GroupId
    n: float
    alpha: float
    dist_qualified: ScoreDistribution
    dist_unqualified: ScoreDistribution

    def __post_init__(self):
        if self.group_id not in ("a", "b"):
            raise InconsistentInput(f"group_id must be 'a' or 'b', got {self.group_id!r}")
        if not 0.0 <= self.n <= 1.0:
            raise InconsistentInput(f"group fraction n must lie in [0, 1], got {self.n}")
        if not 0.0 < self.alpha < 1.0:
            raise InconsistentInput(f"qualification rate must lie in (0, 1), got {self.alpha}")

    @property
    def bounds(self) -> tuple[float, float]:
        return (
            min(self.dist_qualified.x_min, self.dist_unqualified.x_min),
            max(self.dist_qualified.x_max, self.dist_unqualified.x_max),
        )

    @property
    def overall(self) -> ScoreDistribution:
        return mixture(
            [self.dist_qualified, self.dist_unqualified], [self.alpha, 1.0 - self.alpha]
        )

    def pdf(self, x):
        return self.alpha * self.dist_qualified.pdf(x) + (1 - self.alpha) * self.dist_unqualified.pdf(x)

    def log_likelihood_ratio(self, x):
        with np.errstate(invalid="ignore"):
            return self.dist_qualified.logpdf(x) - self.dist_unqualified.logpdf(x)

    def likelihood_ratio(self, x):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.log_likelihood_ratio(x))

    def gamma(self, x):
        """Qualification profile, unchecked and vectorised.

        Computed as ``expit(logit(alpha) + log f1 - log f0)``, which stays
        accurate deep in the tails.  Returns NaN where both densities vanish.
        """
        with np.errstate(invalid="ignore"):
            return special.expit(special.logit(self.alpha) + self.log_likelihood_ratio(x))

    def gamma_prime(self, x):
        """Derivative of the qualification profile in the score."""
        f1 = self.dist_qualified.pdf(x)
        f0 = self.dist_unqualified.pdf(x)
        d1 = self.dist_qualified.dpdf(x)
        d0 = self.dist_unqualified.dpdf(x)
        f = self.alpha * f1 + (1 - self.alpha) * f0
        return self.alpha * (1 - self.alpha) * (d1 * f0 - f1 * d0) / (f * f)

    def likelihood_ratio_prime(self, x):
        f1 = self.dist_qualified.pdf(x)
        f0 = self.dist_unqualified.pdf(x)
        d1 = self.dist_qualified.dpdf(x)
        d0 = self.dist_unqualified.dpdf(x)
        return (d1 * f0 - f1 * d0) / (f0 * f0)


@dataclass(frozen=True)
class Population:
    group_a: GroupModel
    group_b: GroupModel
    u_plus: float = 1.0
    u_minus: float = 10.0
    diagnostics: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.group_a.group_id != "a" or self.group_b.group_id != "b":
            raise InconsistentInput("population groups must be ordered (a, b)")
        if abs(self.group_a.n + self.group_b.n - 1.0) > 1e-9:
            raise InconsistentInput(
                f"group fractions must sum to 1, got {self.group_a.n} + {self.group_b.n}"
            )
        if not (self.u_plus > 0 and self.u_minus > 0):
            raise InconsistentInput("u_plus and u_minus must be positive")

    def group(self, g: GroupId) -> GroupModel:
        if g == "a":
            return self.group_a
        if g == "b":
            return self.group_b
        raise KeyError(g)

    @property
    def groups(self) -> tuple[GroupModel, GroupModel]:
        return self.group_a, self.group_b

    @property
    def bounds(self) -> tuple[float, float]:
        (la, ha), (lb, hb) = self.group_a.bounds, self.group_b.bounds
        return min(la, lb), max(ha, hb)

    @property
    def target_gamma(self) -> float:
        """Profile level at which accepting an agent breaks even."""
        return self.u_minus / (self.u_plus + self.u_minus)

    def validation_grid(self, points: int = VALIDATION_POINTS) -> np.ndarray:
        return np.linspace(*self.bounds, points)

    @property
    def disadvantaged_fraction(self) -> float:
        """Share of the validation grid on which ``gamma_b <= gamma_a``."""
        x = self.validation_grid()
        ga, gb = self.group_a.gamma(x), self.group_b.gamma(x)
        ok = np.isfinite(ga) & np.isfinite(gb)
        if not ok.any():
            return float("nan")
        return float(np.mean(gb[ok] <= ga[ok] + 1e-9))

    @property
    def b_disadvantaged(self) -> bool:
        return self.disadvantaged_fraction == 1.0

    def replace_group(self, group: GroupModel) -> "Population":
        if group.group_id == "a":
            return Population(group, self.group_b, self.u_plus, self.u_minus, dict(self.diagnostics))
        return Population(self.group_a, group, self.u_plus, self.u_minus, dict(self.diagnostics))


def gaussian_population(
    n_a: float,
    alpha_a: float,
    alpha_b: float,
    mean_qualified: tuple[float, float] | float,
    mean_unqualified: tuple[float, float] | float,
    std: tuple[float, float] | float,
    u_plus: float = 1.0,
    u_minus: float = 10.0,
) -> Population:
    """Population whose class-conditional scores are normal.

    Per-group parameters may be given as an ``(a, b)`` pair or one shared value.
    All four densities share a common support so thresholds are comparable.
    """
    from .distributions import Gaussian, TRUNCATION_STDS

    def pair(v):
        return tuple(v) if isinstance(v, (tuple, list)) else (v, v)

    m1, m0, sd = pair(mean_qualified), pair(mean_unqualified), pair(std)
    lo = min(min(m1[i], m0[i]) - TRUNCATION_STDS * sd[i] for i in range(2))
    hi = max(max(m1[i], m0[i]) + TRUNCATION_STDS * sd[i] for i in range(2))
    groups = []
    for i, (gid, n, alpha) in enumerate((("a", n_a, alpha_a), ("b", 1.0 - n_a, alpha_b))):
        groups.append(
            GroupModel(
                gid,
                n,
                alpha,
                Gaussian(m1[i], sd[i], (lo, hi)),
                Gaussian(m0[i], sd[i], (lo, hi)),
            )
        )
    return Population(groups[0], groups[1], u_plus, u_minus)


def synthetic_population(
    alpha_b: float = 0.3, u_minus_over_u_plus: float = 10.0
) -> Population:
    """The FICO-inspired synthetic setup used throughout the experiments.

    n_a = 0.8, alpha_a = 0.8, alpha_b = 0.3; qualified scores ~ N(70, 10),
    unqualified ~ N(50, 10) in both groups.
    """
    return gaussian_population(
        n_a=0.8,
        alpha_a=0.8,
        alpha_b=alpha_b,
        mean_qualified=70.0,
        mean_unqualified=50.0,
        std=10.0,
        u_plus=1.0,
        u_minus=u_minus_over_u_plus,
    )


def qualification_profile(g: GroupModel, x):
    """``P(y=1 | x)`` for group ``g`` with bounds and degeneracy checks.

    Raises :class:`DomainError` for scores outside the group's support.  Where
    both class densities vanish the value at the nearest defined score is
    returned and a :class:`DegenerateDensityWarning` is emitted.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = g.bounds
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if np.any(xs < lo - tol) or np.any(xs > hi + tol):
        raise DomainError(f"score outside [{lo:g}, {hi:g}]")
    out = g.gamma(xs)
    bad = ~np.isfinite(out)
    if bad.any():
        warnings.warn(
            f"both densities vanish at {int(bad.sum())} score(s); using nearest defined value",
            DegenerateDensityWarning,
            stacklevel=2,
        )
        grid = np.linspace(lo, hi, VALIDATION_POINTS)
        gvals = g.gamma(grid)
        ok = np.isfinite(gvals)
        if not ok.any():
            raise InconsistentInput("qualification profile undefined everywhere")
        nearest = np.abs(xs[bad][:, None] - grid[ok][None, :]).argmin(axis=1)
        out[bad] = gvals[ok][nearest]
    return out if np.ndim(x) else float(out[0])


def population_from_profile(
    grid,
    gamma_a,
    gamma_b,
    f_a: ScoreDistribution,
    f_b: ScoreDistribution,
    n_a: float,
    alpha_a: float | None = None,
    alpha_b: float | None = None,
    u_plus: float = 1.0,
    u_minus: float = 10.0,
) -> Population:
    """Rebuild class-conditional densities from profiles and overall densities.

    Uses ``f1 = gamma f / alpha`` and ``f0 = (1 - gamma) f / (1 - alpha)`` with
    ``alpha`` taken as the quadrature of ``gamma f`` on ``grid``, so the
    reconstructed densities reproduce ``gamma`` exactly at the grid nodes.  A
    supplied ``alpha`` more than 2% away from that integral triggers a
    :class:`RenormalizationWarning`.
    """
    grid = np.asarray(grid, dtype=float)
    groups = []
    for gid, n, gam, f, alpha in (
        ("a", n_a, gamma_a, f_a, alpha_a),
        ("b", 1.0 - n_a, gamma_b, f_b, alpha_b),
    ):
        gam = np.asarray(gam, dtype=float)
        if gam.shape != grid.shape:
            raise InconsistentInput(f"group {gid}: profile length does not match grid")
        if np.any(~np.isfinite(gam)) or np.any(gam < 0) or np.any(gam > 1):
            raise InconsistentInput(f"group {gid}: qualification profile outside [0, 1]")
        gam = np.clip(gam, GAMMA_CLAMP, 1 - GAMMA_CLAMP)
        fx = f.density if isinstance(f, Empirical) and np.array_equal(f.grid, grid) else f.pdf(grid)
        fx = Empirical(grid, fx).density
        alpha_int = float(np.trapezoid(gam * fx, grid))
        if alpha is not None and abs(alpha_int - alpha) > 0.02 * alpha:
            warnings.warn(
                f"group {gid}: alpha={alpha:g} disagrees with integral {alpha_int:.6g}; renormalising",
                RenormalizationWarning,
                stacklevel=2,
            )
        f1 = Empirical(grid, gam * fx / alpha_int)
        f0 = Empirical(grid, (1 - gam) * fx / (1 - alpha_int))
        groups.append(GroupModel(gid, n, alpha_int, f1, f0))
    return Population(groups[0], groups[1], u_plus, u_minus)


def extract_profile(pop: Population, grid) -> dict:
    """Tabulate ``(gamma, f, alpha)`` per group on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    out = {"grid": grid}
    for g in pop.groups:
        out[f"gamma_{g.group_id}"] = g.gamma(grid)
        out[f"density_{g.group_id}"] = g.pdf(grid)
        out[f"alpha_{g.group_id}"] = g.alpha
    return out


@dataclass(frozen=True)
class MLRReport:
    holds: bool
    worst_cell: float
    max_drop: float


def check_mlr(g: GroupModel, grid=None) -> MLRReport:
    """Check that ``f1/f0`` is nondecreasing on a grid.

    ``max_drop`` is the largest relative decrease ``1 - l(x_{i+1}) / l(x_i)``
    between neighbouring points, and ``worst_cell`` the score where it starts.
    Points where both densities vanish are skipped.
    """
    if grid is None:
        grid = _default_grid(g)
    grid = np.asarray(grid, dtype=float)
    logl = g.log_likelihood_ratio(grid)
    keep = ~np.isnan(logl)
    xs, logl = grid[keep], logl[keep]
    if xs.size < 2:
        return MLRReport(True, float("nan"), 0.0)
    with np.errstate(invalid="ignore"):
        step = np.diff(logl)
    step = np.where(np.isnan(step), 0.0, step)  # inf -> inf
    drops = -np.expm1(np.minimum(step, 0.0))
    i = int(np.argmax(drops))
    max_drop = float(drops[i])
    return MLRReport(max_drop <= MLR_SLACK, float(xs[i]), max_drop)


def _default_grid(g: GroupModel) -> np.ndarray:
    grids = [d.grid for d in (g.dist_qualified, g.dist_unqualified) if isinstance(d, Empirical)]
    if grids:
        return np.unique(np.concatenate(grids))
    return np.linspace(*g.bounds, VALIDATION_POINTS)

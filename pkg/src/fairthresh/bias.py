"""Biased views of a population, as seen through a prior decision-maker's data.

Three families are supported:

``underestimate_b``
    qualified members of group b are recorded as unqualified with probability
    ``1 - beta``.  The recorded qualification rate becomes ``beta * alpha_b``
    and the unqualified density absorbs the relabelled mass.
``overestimate_a``
    unqualified members of group a are recorded as qualified with probability
    ``beta``.
``feature_shift_b``
    group b's scores are mismeasured as ``x - eps(x)`` for the targeted
    class(es).  The shift is scaled by ``1 - beta`` so ``beta = 1`` is unbiased
    and ``beta = 0`` applies :class:`ShiftSpec` in full.

Label flips are represented exactly as mixtures of the true class densities,
so the overall density of each group is unchanged by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Mapping

import numpy as np

from .distributions import Empirical, Gaussian, Mixture, ScoreDistribution, mixture, pushforward
from .errors import InconsistentInput
from .ingest import ScoredRecords
from .population import GroupModel, Population

FAMILIES = ("underestimate_b", "overestimate_a", "feature_shift_b")
SHIFT_KINDS = ("mean_drop", "constant", "affine", "table")
SHIFT_TARGETS = ("qualified", "unqualified", "all")
# how far past the valid range a parameter may go for central differences
EXTRAPOLATION_SLACK = 0.05


@dataclass(frozen=True)
class ShiftSpec:
    """A score measurement error ``eps(x) >= 0`` applied at full strength.

    ``mean_drop`` shifts each targeted class by ``amount`` times its own mean;
    ``constant`` by ``amount``; ``affine`` by ``slope * (x - anchor)`` with
    ``slope`` in [0, 1); ``table`` interpolates ``(scores, shifts)``.
    """

    kind: Literal["mean_drop", "constant", "affine", "table"] = "mean_drop"
    amount: float = 1.0
    slope: float = 0.0
    anchor: float = 0.0
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    target: Literal["qualified", "unqualified", "all"] = "qualified"

    def __post_init__(self):
        if self.kind not in SHIFT_KINDS:
            raise InconsistentInput(f"unknown shift kind {self.kind!r}")
        if self.target not in SHIFT_TARGETS:
            raise InconsistentInput(f"unknown shift target {self.target!r}")
        if self.kind in ("mean_drop", "constant") and self.amount < 0:
            raise InconsistentInput("shift amount must be nonnegative")
        if self.kind == "affine" and not 0.0 <= self.slope < 1.0:
            raise InconsistentInput("affine shift slope must lie in [0, 1)")
        if self.kind == "table":
            if self.table is None:
                raise InconsistentInput("table shift needs (scores, shifts)")
            xs, eps = (np.asarray(v, dtype=float) for v in self.table)
            if xs.shape != eps.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise InconsistentInput("shift table needs ascending scores and matching shifts")
            if np.any(eps < 0):
                raise InconsistentInput("shift table values must be nonnegative")

    def targets(self, label: int) -> bool:
        return self.target == "all" or (self.target == "qualified") == (label == 1)

    def amount_for(self, dist: ScoreDistribution, scale: float) -> float:
        """Constant shift for ``mean_drop``/``constant`` kinds at ``scale``."""
        base = self.amount * dist.mean() if self.kind == "mean_drop" else self.amount
        return scale * base

    def measurement(self, dist: ScoreDistribution, scale: float) -> Callable:
        """Map from true to measured score at ``scale`` times full strength."""
        if self.kind in ("mean_drop", "constant"):
            delta = self.amount_for(dist, scale)
            return lambda x: np.asarray(x, dtype=float) - delta
        if self.kind == "affine":
            c = scale * self.slope
            return lambda x: np.asarray(x, dtype=float) - c * (np.asarray(x, dtype=float) - self.anchor)
        xs, eps = (np.asarray(v, dtype=float) for v in self.table)
        return lambda x: np.asarray(x, dtype=float) - scale * np.interp(x, xs, eps)


@dataclass(frozen=True)
class BiasSpec:
    family: str
    beta: float | None = None
    shift: ShiftSpec | None = None
    seed: int | None = None
    # set only for points just past the valid range, used by finite differences
    extrapolated: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InconsistentInput(f"unknown bias family {self.family!r}")
        if self.beta is None:
            default = {"underestimate_b": 1.0, "overestimate_a": 0.0, "feature_shift_b": 0.0}
            object.__setattr__(self, "beta", default[self.family])
        if self.family == "feature_shift_b" and self.shift is None:
            object.__setattr__(self, "shift", ShiftSpec())
        check_beta(self.family, self.beta, EXTRAPOLATION_SLACK if self.extrapolated else 0.0)

    @property
    def is_identity(self) -> bool:
        return self.beta == unbiased_beta(self.family)


def unbiased_beta(family: str) -> float:
    return 0.0 if family == "overestimate_a" else 1.0


def check_beta(family: str, beta: float, slack: float = 0.0) -> None:
    if family == "underestimate_b":
        ok = 0.0 < beta <= 1.0 + slack
        msg = "(0, 1]"
    elif family == "overestimate_a":
        ok = -slack <= beta < 1.0
        msg = "[0, 1)"
    else:
        ok = 0.0 <= beta <= 1.0 + slack
        msg = "[0, 1]"
    if not ok:
        raise InconsistentInput(f"beta={beta} outside {msg} for {family}")


@dataclass(frozen=True)
class BiasedPopulation:
    biased: Population
    truth: Population
    spec: BiasSpec
    diagnostics: Mapping[str, Any] = field(default_factory=dict, compare=False)


def _underestimate_group(g: GroupModel, beta: float) -> GroupModel:
    alpha = g.alpha
    alpha_hat = beta * alpha
    # relabelled qualified mass joins the unqualified class
    w1 = (alpha - alpha_hat) / (1.0 - alpha_hat)
    f0_hat = mixture([g.dist_qualified, g.dist_unqualified], [w1, 1.0 - w1])
    return GroupModel(g.group_id, g.n, alpha_hat, g.dist_qualified, f0_hat)


def _overestimate_group(g: GroupModel, beta: float) -> GroupModel:
    alpha = g.alpha
    alpha_hat = (1.0 - beta) * alpha + beta
    w0 = (alpha_hat - alpha) / alpha_hat
    f1_hat = mixture([g.dist_qualified, g.dist_unqualified], [1.0 - w0, w0])
    return GroupModel(g.group_id, g.n, alpha_hat, f1_hat, g.dist_unqualified)


def apply_underestimate_b(pop: Population, beta: float, _slack: float = 0.0) -> BiasedPopulation:
    """Group b's qualified agents relabelled unqualified with probability ``1 - beta``."""
    check_beta("underestimate_b", beta, _slack)
    biased = pop if beta == 1.0 else pop.replace_group(_underestimate_group(pop.group_b, beta))
    return BiasedPopulation(biased, pop, BiasSpec("underestimate_b", beta, extrapolated=beta > 1.0))


def apply_overestimate_a(pop: Population, beta: float, _slack: float = 0.0) -> BiasedPopulation:
    """Group a's unqualified agents relabelled qualified with probability ``beta``."""
    check_beta("overestimate_a", beta, _slack)
    biased = pop if beta == 0.0 else pop.replace_group(_overestimate_group(pop.group_a, beta))
    return BiasedPopulation(biased, pop, BiasSpec("overestimate_a", beta, extrapolated=beta < 0.0))


def _shift_distribution(dist: ScoreDistribution, shift: ShiftSpec, scale: float) -> tuple[ScoreDistribution, bool]:
    """Measured-score density and whether mass was pushed off the support."""
    lo, hi = dist.bounds
    if isinstance(dist, Mixture):
        parts = [_shift_distribution(c, shift, scale) for c in dist.components]
        return Mixture([p[0] for p in parts], dist.weights), any(p[1] for p in parts)
    if shift.kind in ("mean_drop", "constant"):
        delta = shift.amount_for(dist, scale)
        out = dist.shifted(delta)
    elif shift.kind == "affine" and isinstance(dist, Gaussian):
        c = scale * shift.slope
        out = dist.affine(1.0 - c, c * shift.anchor)
    else:
        grid = dist.grid if isinstance(dist, Empirical) else np.linspace(lo, hi, 2001)
        out = pushforward(dist, shift.measurement(dist, scale), grid)
    if isinstance(out, Gaussian):
        clipped = out.mu - 8 * out.std < lo - 1e-9 or out.mu + 8 * out.std > hi + 1e-9
    elif isinstance(out, Empirical):
        clipped = abs(out.raw_mass - 1.0) > 1e-9 and isinstance(dist, Empirical) and shift.kind != "table"
    else:
        clipped = False
    return out, bool(clipped)


def apply_feature_shift_b(
    pop: Population, shift: ShiftSpec | None = None, beta: float = 0.0, _slack: float = 0.0
) -> BiasedPopulation:
    """Mismeasure group b's scores for the targeted class(es).

    The applied shift is ``(1 - beta)`` times ``shift``.  Labels and
    qualification rates are untouched.  ``diagnostics`` records whether any
    mass was clipped at the support edge and the share of the validation grid
    on which the biased likelihood ratio does not exceed the true one.
    """
    shift = ShiftSpec() if shift is None else shift
    check_beta("feature_shift_b", beta, _slack)
    scale = 1.0 - beta
    g = pop.group_b
    dists = {1: g.dist_qualified, 0: g.dist_unqualified}
    clipped = False
    if scale != 0.0:
        for label in (1, 0):
            if shift.targets(label):
                dists[label], c = _shift_distribution(dists[label], shift, scale)
                clipped |= c
    biased_b = GroupModel("b", g.n, g.alpha, dists[1], dists[0])
    biased = pop.replace_group(biased_b)
    x = pop.validation_grid()
    with np.errstate(invalid="ignore"):
        below = biased_b.log_likelihood_ratio(x) <= g.log_likelihood_ratio(x) + 1e-9
    diag = {"clipped": clipped, "ratio_not_above_truth": float(np.mean(below))}
    return BiasedPopulation(biased, pop, BiasSpec("feature_shift_b", beta, shift, extrapolated=beta > 1.0), diag)


def apply_bias(pop: Population, spec: BiasSpec, _slack: float = 0.0) -> BiasedPopulation:
    if spec.family == "underestimate_b":
        bp = apply_underestimate_b(pop, spec.beta, _slack)
    elif spec.family == "overestimate_a":
        bp = apply_overestimate_a(pop, spec.beta, _slack)
    else:
        bp = apply_feature_shift_b(pop, spec.shift, spec.beta, _slack)
    return BiasedPopulation(bp.biased, bp.truth, spec, bp.diagnostics)


def sample_dataset(
    bp: BiasedPopulation, n: int, seed: int | None = None, compose: tuple[BiasSpec, ...] = ()
) -> ScoredRecords:
    """Draw ``n`` labelled, scored records as the biased data would record them.

    Ground-truth agents are sampled first; recorded labels are then flipped
    and recorded scores mismeasured according to ``bp.spec`` followed by any
    extra label-flip specs in ``compose``.
    """
    if n < 1:
        raise InconsistentInput("sample size must be at least 1")
    if seed is None:
        seed = bp.spec.seed if bp.spec.seed is not None else 0
    rng = np.random.default_rng(seed)
    truth = bp.truth
    in_b = rng.random(n) < truth.group_b.n
    labels = np.zeros(n, dtype=int)
    scores = np.empty(n)
    for gid, mask in (("a", ~in_b), ("b", in_b)):
        grp = truth.group(gid)
        idx = np.flatnonzero(mask)
        y = (rng.random(idx.size) < grp.alpha).astype(int)
        labels[idx] = y
        for label, dist in ((1, grp.dist_qualified), (0, grp.dist_unqualified)):
            sub = idx[y == label]
            scores[sub] = dist.sample(rng, sub.size)
    recorded = labels.copy()
    for spec in (bp.spec, *compose):
        if spec.family == "underestimate_b":
            flip = in_b & (labels == 1) & (rng.random(n) >= spec.beta)
            recorded[flip] = 0
        elif spec.family == "overestimate_a":
            flip = ~in_b & (labels == 0) & (rng.random(n) < spec.beta)
            recorded[flip] = 1
        elif spec.beta != 1.0:
            g = truth.group_b
            for label, dist in ((1, g.dist_qualified), (0, g.dist_unqualified)):
                if spec.shift.targets(label):
                    sel = in_b & (labels == label)
                    scores[sel] = spec.shift.measurement(dist, 1.0 - spec.beta)(scores[sel])
    groups = np.where(in_b, "b", "a")
    return ScoredRecords(groups, scores, recorded)
